#include "mbk/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mbk/error.hpp"

namespace mbk {

using detail::require;

PointMatrix::PointMatrix(std::size_t dim) : dim_(dim) {}

PointMatrix::PointMatrix(std::size_t rows, std::size_t dim)
    : dim_(dim), values_(rows * dim, 0.0) {}

PointMatrix::PointMatrix(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    require(dim_ >= 1, "point dimension must be at least 1");
    require(values_.size() % dim_ == 0,
            "value count " + std::to_string(values_.size()) +
                " is not a multiple of dimension " + std::to_string(dim_));
}

PointMatrix::PointMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& r : rows) {
        if (dim_ == 0) {
            require(r.size() >= 1, "point dimension must be at least 1");
            dim_ = r.size();
        }
        require(r.size() == dim_, "all points must share one dimension");
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

void PointMatrix::push_back(std::span<const double> point) {
    if (dim_ == 0) {
        require(!point.empty(), "point dimension must be at least 1");
        dim_ = point.size();
    }
    require(point.size() == dim_, "dimension mismatch: expected " + std::to_string(dim_) +
                                      ", got " + std::to_string(point.size()));
    values_.insert(values_.end(), point.begin(), point.end());
}

Point PointMatrix::row(std::size_t i) const {
    auto r = (*this)[i];
    return Point(r.begin(), r.end());
}

namespace {

void require_finite(const PointMatrix& points, const char* what) {
    for (double v : points.values()) {
        require(std::isfinite(v), std::string(what) + " contains a non-finite coordinate");
    }
}

void require_same_dim(std::size_t a, std::size_t b) {
    require(a == b, "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

Dataset::Dataset(PointMatrix points) : PointMatrix(std::move(points)) {
    require(size() >= 1, "dataset must hold at least one point");
    require_finite(*this, "dataset");
    require(within_unit_cube(*this), "dataset coordinates must lie in [0,1]");
}

Centers::Centers(PointMatrix points) : PointMatrix(std::move(points)) {
    require(size() >= 1, "need at least one center");
    require_finite(*this, "centers");
}

bool within_unit_cube(const PointMatrix& points) {
    for (double v : points.values()) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    require_same_dim(x.size(), y.size());
    double sum = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
        const double diff = x[l] - y[l];
        sum += diff * diff;
    }
    return sum;
}

double delta_set(const PointMatrix& set, std::span<const double> c) {
    if (set.empty()) return 0.0;
    require_same_dim(set.dim(), c.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) sum += squared_distance(set[i], c);
    return sum;
}

Point center_of_mass(const PointMatrix& set) {
    if (set.empty()) throw EmptyClusterError("center of mass of an empty tuple is undefined");
    Point mean(set.dim(), 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto p = set[i];
        for (std::size_t l = 0; l < mean.size(); ++l) mean[l] += p[l];
    }
    const double count = static_cast<double>(set.size());
    for (double& v : mean) v /= count;
    return mean;
}

namespace {

// Index and distance of the nearest center, smallest index on ties.
std::pair<std::size_t, double> nearest(std::span<const double> p, const Centers& centers) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double dist = squared_distance(p, centers[j]);
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
        }
    }
    return {best, best_dist};
}

}  // namespace

Assignment assign(const PointMatrix& points, const Centers& centers) {
    require(centers.size() >= 1, "need at least one center");
    Assignment out;
    out.counts.assign(centers.size(), 0);
    if (points.empty()) return out;
    require_same_dim(points.dim(), centers.dim());
    out.labels.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto j = nearest(points[i], centers).first;
        out.labels.push_back(j);
        ++out.counts[j];
    }
    return out;
}

double cost(const PointMatrix& points, const Centers& centers) {
    require(!points.empty(), "cost of an empty point tuple is undefined");
    require(centers.size() >= 1, "need at least one center");
    require_same_dim(points.dim(), centers.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sum += nearest(points[i], centers).second;
    return sum / static_cast<double>(points.size());
}

double center_movement(const Centers& before, const Centers& after) {
    require(before.size() == after.size(), "center count mismatch");
    require_same_dim(before.dim(), after.dim());
    double sum = 0.0;
    for (std::size_t j = 0; j < before.size(); ++j) sum += squared_distance(before[j], after[j]);
    return sum;
}

}  // namespace mbk
