#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mbk {

using Point = std::vector<double>;

/**
 * Ordered tuple of d-dimensional points stored row-major.
 *
 * The dimension is fixed at construction so an empty tuple still knows
 * which points it may hold. Repeated points are allowed (multiset semantics).
 */
class PointMatrix {
public:
    PointMatrix() = default;
    explicit PointMatrix(std::size_t dim);
    PointMatrix(std::size_t rows, std::size_t dim);
    PointMatrix(std::size_t dim, std::vector<double> values);
    PointMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return values_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<double> operator[](std::size_t i) {
        return {values_.data() + i * dim_, dim_};
    }

    void push_back(std::span<const double> point);
    void reserve(std::size_t rows) { values_.reserve(rows * dim_); }

    const std::vector<double>& values() const { return values_; }
    Point row(std::size_t i) const;

    friend bool operator==(const PointMatrix&, const PointMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

/// n >= 1 finite points, every coordinate in [0,1].
class Dataset : public PointMatrix {
public:
    Dataset() = default;
    explicit Dataset(PointMatrix points);
    Dataset(std::initializer_list<std::initializer_list<double>> rows)
        : Dataset(PointMatrix(rows)) {}
};

/// k >= 1 finite centers. Containment in [0,1]^d is an engine invariant,
/// not a constructor check, so the identities can be exercised on all of R^d.
class Centers : public PointMatrix {
public:
    Centers() = default;
    explicit Centers(PointMatrix points);
    Centers(std::initializer_list<std::initializer_list<double>> rows)
        : Centers(PointMatrix(rows)) {}
};

struct Assignment {
    std::vector<std::size_t> labels;
    std::vector<std::size_t> counts;
};

/// True when every coordinate lies in [0,1].
bool within_unit_cube(const PointMatrix& points);

double squared_distance(std::span<const double> x, std::span<const double> y);

/// Sum of squared distances from every point of `set` to `c`; 0 for an empty set.
double delta_set(const PointMatrix& set, std::span<const double> c);

/// Coordinate-wise mean, accumulated left to right in tuple order.
/// Throws EmptyClusterError for an empty tuple.
Point center_of_mass(const PointMatrix& set);

/// Nearest center per point; ties go to the smallest center index.
Assignment assign(const PointMatrix& points, const Centers& centers);

/// Normalized k-means objective: mean over points of the squared distance to
/// the nearest center.
double cost(const PointMatrix& points, const Centers& centers);

/// Sum over j of the squared distance between before[j] and after[j].
double center_movement(const Centers& before, const Centers& after);

}  // namespace mbk
