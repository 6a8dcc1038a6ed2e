#include "mbk/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mbk/error.hpp"

namespace mbk::oracle {

double naive_cost(const PointMatrix& points, const PointMatrix& centers) {
    detail::require(!points.empty(), "cost of an empty point tuple is undefined");
    detail::require(!centers.empty(), "need at least one center");
    detail::require(points.dim() == centers.dim(), "dimension mismatch");
    const std::size_t d = points.dim();
    const double* x = points.values().data();
    const double* c = centers.values().data();

    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < centers.size(); ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double diff = x[i * d + l] - c[j * d + l];
                s += diff * diff;
            }
            if (s < best) best = s;
        }
        total += best;
    }
    return total / static_cast<double>(points.size());
}

TinyInstance::TinyInstance(PointMatrix points, std::size_t k)
    : points_(std::move(points)), k_(k) {
    const std::size_t n = points_.size();
    if (n == 0 || k_ == 0) throw InstanceTooLarge("tiny instance needs n >= 1 and k >= 1");
    if (n > kMaxPoints || points_.dim() > kMaxDim || k_ > kMaxK ||
        std::pow(static_cast<double>(k_), static_cast<double>(n)) > kMaxLabelings) {
        throw InstanceTooLarge("instance too large for enumeration: n=" + std::to_string(n) +
                               " d=" + std::to_string(points_.dim()) +
                               " k=" + std::to_string(k_));
    }
}

OptimalClustering brute_force_optimal(const TinyInstance& instance) {
    const PointMatrix& pts = instance.points();
    const std::size_t n = pts.size();
    const std::size_t d = pts.dim();
    const std::size_t k = instance.k();
    const double* x = pts.values().data();

    std::vector<std::size_t> labels(n, 0);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> sizes(k);

    OptimalClustering best;
    best.cost = std::numeric_limits<double>::infinity();

    while (true) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++sizes[labels[i]];
            for (std::size_t l = 0; l < d; ++l) sums[labels[i] * d + l] += x[i * d + l];
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = labels[i];
            const double size = static_cast<double>(sizes[j]);
            for (std::size_t l = 0; l < d; ++l) {
                const double diff = x[i * d + l] - sums[j * d + l] / size;
                total += diff * diff;
            }
        }
        if (total < best.cost) {
            best.cost = total;
            best.labels = labels;
        }

        // Odometer increment in base k.
        std::size_t pos = 0;
        while (pos < n && ++labels[pos] == k) labels[pos++] = 0;
        if (pos == n) break;
    }
    best.cost /= static_cast<double>(n);
    return best;
}

}  // namespace mbk::oracle
