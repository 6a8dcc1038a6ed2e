#pragma once

#include <cstddef>
#include <vector>

#include "mbk/geometry.hpp"

// Slow reference implementations. Nothing here calls into the optimized
// geometry routines; they exist to be compared against.
namespace mbk::oracle {

/// Double loop over points and centers, no partition reuse.
double naive_cost(const PointMatrix& points, const PointMatrix& centers);

/// At most 14 points of dimension <= 4, k <= 3, and k^n <= 5e6 labelings.
class TinyInstance {
public:
    static constexpr std::size_t kMaxPoints = 14;
    static constexpr std::size_t kMaxDim = 4;
    static constexpr std::size_t kMaxK = 3;
    static constexpr double kMaxLabelings = 5e6;

    /// Throws InstanceTooLarge when a bound is exceeded.
    TinyInstance(PointMatrix points, std::size_t k);

    const PointMatrix& points() const { return points_; }
    std::size_t k() const { return k_; }

private:
    PointMatrix points_;
    std::size_t k_;
};

struct OptimalClustering {
    double cost = 0.0;
    std::vector<std::size_t> labels;
};

/**
 * Exact normalized k-means optimum by enumerating all k^n labelings.
 *
 * For a fixed partition the best center of each part is its centroid
 * (Delta(S, C) = Delta(S, cm(S)) + |S| Delta(C, cm(S)) is minimized at
 * C = cm(S)), so scanning partitions with centroid centers covers every
 * optimum. Empty parts contribute nothing. Ties keep the first labeling
 * met by the odometer enumeration (label of point 0 varies fastest).
 */
OptimalClustering brute_force_optimal(const TinyInstance& instance);

}  // namespace mbk::oracle
