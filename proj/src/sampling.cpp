#include "mbk/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "mbk/error.hpp"

namespace mbk {

using detail::require;

Batch sample_batch(const Dataset& dataset, std::size_t b, RandomStream& rng) {
    require(b >= 1, "batch size must be at least 1");
    require(!dataset.empty(), "cannot sample from an empty dataset");
    Batch batch{{}, PointMatrix(dataset.dim())};
    batch.indices.reserve(b);
    batch.points.reserve(b);
    for (std::size_t s = 0; s < b; ++s) {
        const auto i = static_cast<std::size_t>(rng.uniform_index(dataset.size()));
        batch.indices.push_back(i);
        batch.points.push_back(dataset[i]);
    }
    return batch;
}

std::string to_string(InitScheme scheme) {
    switch (scheme) {
        case InitScheme::KMeansPlusPlus: return "kmeanspp";
        case InitScheme::Random: return "random";
        case InitScheme::Explicit: return "explicit";
    }
    return "?";
}

InitScheme parse_init_scheme(std::string_view text) {
    if (text == "kmeanspp") return InitScheme::KMeansPlusPlus;
    if (text == "random") return InitScheme::Random;
    if (text == "explicit") return InitScheme::Explicit;
    throw ContractViolation("unknown init scheme '" + std::string(text) + "'");
}

namespace {

void require_k(const Dataset& dataset, std::size_t k) {
    require(k >= 1, "k must be at least 1");
    require(k <= dataset.size(), "k = " + std::to_string(k) + " exceeds n = " +
                                     std::to_string(dataset.size()));
}

}  // namespace

Centers init_random(const Dataset& dataset, std::size_t k, RandomStream& rng) {
    require_k(dataset, k);
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset in
    // uniform order.
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    PointMatrix centers(dataset.dim());
    centers.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        const auto pick = s + static_cast<std::size_t>(rng.uniform_index(order.size() - s));
        std::swap(order[s], order[pick]);
        centers.push_back(dataset[order[s]]);
    }
    return Centers(std::move(centers));
}

Centers init_kmeanspp(const Dataset& dataset, std::size_t k, RandomStream& rng) {
    require_k(dataset, k);
    const std::size_t n = dataset.size();
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n);

    PointMatrix centers(dataset.dim());
    centers.reserve(k);
    auto take = [&](std::size_t idx, bool first) {
        chosen[idx] = true;
        centers.push_back(dataset[idx]);
        for (std::size_t i = 0; i < n; ++i) {
            const double dist = squared_distance(dataset[i], dataset[idx]);
            d2[i] = first ? dist : std::min(d2[i], dist);
        }
    };

    take(static_cast<std::size_t>(rng.uniform_index(n)), true);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] > 0.0) {
                total += d2[i];
                last_positive = i;
            }
        }

        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n && pick == n; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                if (target < acc) pick = i;
            }
            // Rounding can leave target == acc at the end of the scan.
            if (pick == n) pick = last_positive;
        } else {
            const auto remaining = static_cast<std::uint64_t>(n - c);
            auto r = rng.uniform_index(remaining);
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                if (r == 0) {
                    pick = i;
                    break;
                }
                --r;
            }
        }
        take(pick, false);
    }
    return Centers(std::move(centers));
}

}  // namespace mbk
