#pragma once

#include <array>
#include <cstdint>

namespace mbk {

/**
 * Portable seeded generator: xoshiro256** with its state expanded from a
 * 64-bit seed by splitmix64.
 *
 * Every derived quantity uses a fixed mapping so a seed replays the same
 * sequence on any platform:
 *   - uniform_index(n): Lemire's multiply-shift with rejection (unbiased).
 *   - uniform01(): top 53 bits scaled by 2^-53, in [0,1).
 *   - normal(): Box-Muller cosine branch, one draw per call.
 * normal() goes through std::log/std::cos, so it is only as portable as the
 * platform's libm.
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    std::uint64_t uniform_index(std::uint64_t n);
    double uniform01();
    double normal();

    /// Independent stream for trial/run `index`; see derive_seed().
    RandomStream substream(std::uint64_t index) const {
        return RandomStream(derive_seed(seed_, index));
    }

    /// Split function: mix64(seed XOR mix64(index + golden gamma)).
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace mbk
