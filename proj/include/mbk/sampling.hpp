#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mbk/geometry.hpp"
#include "mbk/random.hpp"

namespace mbk {

/// b draws from the dataset, uniform with repetitions, in draw order.
struct Batch {
    std::vector<std::size_t> indices;
    PointMatrix points;
};

Batch sample_batch(const Dataset& dataset, std::size_t b, RandomStream& rng);

enum class InitScheme { KMeansPlusPlus, Random, Explicit };

std::string to_string(InitScheme scheme);
InitScheme parse_init_scheme(std::string_view text);

/// k distinct dataset points chosen uniformly without replacement.
Centers init_random(const Dataset& dataset, std::size_t k, RandomStream& rng);

/**
 * D^2 seeding: the first center is uniform over the dataset, each later one
 * is drawn with probability proportional to the squared distance to the
 * nearest center chosen so far. When every remaining distance is zero the
 * next center is uniform over the indices not chosen yet.
 */
Centers init_kmeanspp(const Dataset& dataset, std::size_t k, RandomStream& rng);

}  // namespace mbk
