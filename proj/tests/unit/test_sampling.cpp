#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "../support.hpp"
#include "mbk/error.hpp"
#include "mbk/random.hpp"
#include "mbk/sampling.hpp"

using namespace mbk;

TEST_SUITE("sampling") {

TEST_CASE("random stream is deterministic per seed") {
    RandomStream a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
}

namespace {

// Reference splitmix64 and xoshiro256** written from the published
// algorithm descriptions.
struct RefXoshiro {
    std::uint64_t s[4];
    explicit RefXoshiro(std::uint64_t seed) {
        for (auto& w : s) {
            seed += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            w = z ^ (z >> 31);
        }
    }
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t next() {
        const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

}  // namespace

TEST_CASE("generator matches the reference xoshiro256** stream") {
    // splitmix64 test vector: the first output for seed 0.
    CHECK(RefXoshiro(0).s[0] == 0xE220A8397B1DCDAFULL);
    for (std::uint64_t seed : {0ULL, 1ULL, 0xDEADBEEFULL, ~0ULL}) {
        RandomStream rng(seed);
        RefXoshiro ref(seed);
        for (int i = 0; i < 1000; ++i) REQUIRE(rng.next_u64() == ref.next());
    }
}

TEST_CASE("substreams") {
    CHECK(RandomStream::derive_seed(0, 0) != RandomStream::derive_seed(0, 1));
    CHECK(RandomStream::derive_seed(0, 1) != RandomStream::derive_seed(1, 0));
    CHECK(RandomStream::derive_seed(7, 3) == RandomStream::derive_seed(7, 3));
    CHECK(RandomStream(5).substream(2).seed() == RandomStream::derive_seed(5, 2));
    std::set<std::uint64_t> seeds;
    for (std::uint64_t t = 0; t < 1000; ++t) seeds.insert(RandomStream::derive_seed(99, t));
    CHECK(seeds.size() == 1000);
    // sample correlation between neighbouring substreams
    RandomStream a = RandomStream(3).substream(0), b = RandomStream(3).substream(1);
    double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
    constexpr int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = a.uniform01(), y = b.uniform01();
        sab += x * y; sa += x; sb += y; saa += x * x; sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
    CHECK(std::abs(corr) < 5.0 / std::sqrt(n));
}

TEST_CASE("uniform_index stays in range and is roughly flat") {
    RandomStream rng(1);
    CHECK_THROWS_AS(rng.uniform_index(0), ContractViolation);
    CHECK(rng.uniform_index(1) == 0);
    constexpr std::size_t bins = 7;
    constexpr std::size_t draws = 70000;
    std::vector<std::size_t> hist(bins, 0);
    for (std::size_t i = 0; i < draws; ++i) {
        const auto v = rng.uniform_index(bins);
        REQUIRE(v < bins);
        ++hist[v];
    }
    double chi2 = 0.0;
    const double expected = static_cast<double>(draws) / bins;
    for (auto h : hist) chi2 += (h - expected) * (h - expected) / expected;
    CHECK(chi2 < 30.0);  // 6 dof; p ~ 4e-5
}

TEST_CASE("uniform01 and normal moments") {
    RandomStream rng(2);
    double sum = 0.0, sq = 0.0, nsum = 0.0, nsq = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
        const double z = rng.normal();
        nsum += z;
        nsq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    CHECK(std::abs(nsum / n) < 0.02);
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sample_batch examples") {
    RandomStream rng(3);
    const Dataset single{{0.4, 0.6}};
    const auto batch = sample_batch(single, 5, rng);
    CHECK(batch.indices == std::vector<std::size_t>(5, 0));
    CHECK(batch.points.size() == 5);
    CHECK(batch.points[4][1] == 0.6);
    CHECK_THROWS_AS(sample_batch(single, 0, rng), ContractViolation);

    RandomStream data_rng(4);
    const auto data = test::random_dataset(data_rng, 50, 3);
    RandomStream r1(9), r2(9);
    const auto b1 = sample_batch(data, 20, r1);
    const auto b2 = sample_batch(data, 20, r2);
    CHECK(b1.indices == b2.indices);
    CHECK(b1.points == b2.points);
    for (std::size_t t = 0; t < b1.indices.size(); ++t) {
        CHECK(b1.points.row(t) == data.row(b1.indices[t]));
    }
}

TEST_CASE("sample_batch frequencies are binomial") {
    // n = b = 1e4. Per index the count is Binomial(b, 1/n) with mean 1 and
    // sd ~1; taking a 5 sd band per single index over 1e4 indices would flag
    // Poisson tails by chance, so indices are pooled into 100 blocks of 100
    // (mean 100, sd ~10) and each block must sit within 5 sd.
    RandomStream data_rng(5);
    const auto data = test::random_dataset(data_rng, 10000, 1);
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        RandomStream rng(seed);
        const auto batch = sample_batch(data, 10000, rng);
        std::vector<double> blocks(100, 0.0);
        for (auto i : batch.indices) {
            REQUIRE(i < data.size());
            blocks[i / 100] += 1.0;
        }
        const double mean = 100.0;
        const double sd = std::sqrt(10000.0 * 0.01 * 0.99);
        for (double c : blocks) CHECK(std::abs(c - mean) <= 5.0 * sd);
    }
}

TEST_CASE("init scheme names") {
    CHECK(parse_init_scheme("kmeanspp") == InitScheme::KMeansPlusPlus);
    CHECK(parse_init_scheme("random") == InitScheme::Random);
    CHECK(to_string(InitScheme::KMeansPlusPlus) == "kmeanspp");
    CHECK_THROWS_AS(parse_init_scheme("kmeans++x"), ContractViolation);
}

TEST_CASE("init_random examples") {
    RandomStream data_rng(6);
    const auto data = test::random_dataset(data_rng, 8, 2);
    RandomStream rng(1);
    const auto all = init_random(data, 8, rng);
    std::multiset<Point> got, want;
    for (std::size_t i = 0; i < 8; ++i) {
        got.insert(all.row(i));
        want.insert(data.row(i));
    }
    CHECK(got == want);

    RandomStream r1(3);
    const Dataset one{{0.25}};
    CHECK(init_random(one, 1, r1).row(0) == Point{0.25});
    RandomStream a(77), b(77);
    CHECK(init_random(data, 3, a) == init_random(data, 3, b));
    CHECK_THROWS_AS(init_random(data, 9, a), ContractViolation);
}

TEST_CASE("init_kmeanspp examples") {
    RandomStream rng(8);
    const Dataset same{{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}};
    const auto c = init_kmeanspp(same, 2, rng);
    CHECK(c.row(0) == Point{0.3, 0.3});
    CHECK(c.row(1) == Point{0.3, 0.3});

    const Dataset two{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomStream r(seed);
        const auto cc = init_kmeanspp(two, 2, r);
        CHECK(cc.row(0) != cc.row(1));
    }
    CHECK_THROWS_AS(init_kmeanspp(two, 5, rng), ContractViolation);
}

TEST_CASE("k=1 k-means++ is a uniform draw") {
    RandomStream data_rng(10);
    const auto data = test::random_dataset(data_rng, 4, 1);
    std::vector<int> hist(4, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
        RandomStream r(seed);
        const auto c = init_kmeanspp(data, 1, r);
        for (std::size_t i = 0; i < 4; ++i) {
            if (c.row(0) == data.row(i)) ++hist[i];
        }
    }
    for (int h : hist) CHECK(std::abs(h - 1000) < 5 * std::sqrt(4000 * 0.25 * 0.75));
}

TEST_CASE("k-means++ skips zero-D2 points while positive ones remain") {
    RandomStream data_rng(12);
    for (int rep = 0; rep < 100; ++rep) {
        // 5 distinct points, each repeated 3 times
        const auto base = test::random_points(data_rng, 5, 2);
        PointMatrix pts(2);
        for (int r = 0; r < 3; ++r) {
            for (std::size_t i = 0; i < base.size(); ++i) pts.push_back(base[i]);
        }
        const Dataset data(pts);
        RandomStream rng(static_cast<std::uint64_t>(rep));
        const auto c = init_kmeanspp(data, 5, rng);
        std::set<Point> distinct;
        for (std::size_t j = 0; j < 5; ++j) distinct.insert(c.row(j));
        CHECK(distinct.size() == 5);
        CHECK(within_unit_cube(c));
    }
}

TEST_CASE("k-means++ second pick follows D2 weights") {
    // X = {0, 0.5, 1} in 1-d; given first pick 0 the weights are 0.25 and 1.
    const Dataset data{{0.0}, {0.5}, {1.0}};
    int first_zero = 0, then_one = 0;
    for (std::uint64_t seed = 0; seed < 30000; ++seed) {
        RandomStream r(seed);
        const auto c = init_kmeanspp(data, 2, r);
        if (c[0][0] != 0.0) continue;
        ++first_zero;
        if (c[1][0] == 1.0) ++then_one;
    }
    const double p = 1.0 / 1.25;
    const double sd = std::sqrt(first_zero * p * (1 - p));
    CHECK(std::abs(then_one - p * first_zero) < 5 * sd);
}

}  // TEST_SUITE
