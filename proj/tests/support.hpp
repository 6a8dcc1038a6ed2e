#pragma once

// Random instance generators and slow reference computations shared by the
// unit and acceptance suites. The references work in long double and never
// call into the library's geometry code.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mbk/geometry.hpp"
#include "mbk/random.hpp"

namespace mbk::test {

inline PointMatrix random_points(RandomStream& rng, std::size_t n, std::size_t d,
                                 double lo = 0.0, double hi = 1.0) {
    PointMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : m[i]) v = lo + (hi - lo) * rng.uniform01();
    }
    return m;
}

inline Dataset random_dataset(RandomStream& rng, std::size_t n, std::size_t d) {
    return Dataset(random_points(rng, n, d));
}

inline Centers random_centers(RandomStream& rng, std::size_t k, std::size_t d) {
    return Centers(random_points(rng, k, d));
}

inline long double ref_sqdist(const std::vector<double>& x, const std::vector<double>& y) {
    long double s = 0.0L;
    for (std::size_t l = 0; l < x.size(); ++l) {
        const long double diff = static_cast<long double>(x[l]) - static_cast<long double>(y[l]);
        s += diff * diff;
    }
    return s;
}

inline std::vector<long double> ref_mean(const PointMatrix& s) {
    std::vector<long double> m(s.dim(), 0.0L);
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t l = 0; l < s.dim(); ++l) m[l] += s.values()[i * s.dim() + l];
    }
    for (auto& v : m) v /= static_cast<long double>(s.size());
    return m;
}

/// Mean squared distance to the nearest row of `centers`.
inline long double ref_cost(const PointMatrix& points, const PointMatrix& centers) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < points.size(); ++i) {
        long double best = INFINITY;
        for (std::size_t j = 0; j < centers.size(); ++j) {
            long double s = 0.0L;
            for (std::size_t l = 0; l < points.dim(); ++l) {
                const long double diff =
                    static_cast<long double>(points.values()[i * points.dim() + l]) -
                    centers.values()[j * centers.dim() + l];
                s += diff * diff;
            }
            if (s < best) best = s;
        }
        total += best;
    }
    return total / static_cast<long double>(points.size());
}

/// Cost of an arbitrary labeling with the given centers.
inline long double ref_partition_cost(const PointMatrix& points, const PointMatrix& centers,
                                      const std::vector<std::size_t>& labels) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += ref_sqdist(points.row(i), centers.row(labels[i]));
    }
    return total / static_cast<long double>(points.size());
}

inline bool near_rel(double got, double want, double rel, double abs_floor = 1e-300) {
    return std::abs(got - want) <= rel * std::max(std::abs(want), abs_floor);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("mbk_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace mbk::test
