#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "oatf/rng.hpp"

using namespace oatf;

TEST_CASE("raw engine output matches the standard-mandated sequence") {
    // The 10000th output of mt19937_64 seeded with 5489 (the default seed)
    // is pinned by the C++ standard, so a stream built on it is portable.
    RngStream stream(5489);
    std::uint64_t last = 0;
    for (int i = 0; i < 10000; ++i) last = stream.next_u64();
    REQUIRE(last == 9981545732273789042ULL);
}

TEST_CASE("streams are reproducible and seed-sensitive") {
    RngStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t x = a.next_u64();
        if (x != b.next_u64()) all_equal = false;
        if (x != c.next_u64()) any_diff = true;
    }
    REQUIRE(all_equal);
    REQUIRE(any_diff);
}

TEST_CASE("next_unit stays in the half-open unit interval") {
    RngStream s(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("uniform respects bounds and rejects bad intervals") {
    RngStream s(11);
    for (int i = 0; i < 10000; ++i) {
        const double x = s.uniform(100.0, 400.0);
        REQUIRE(x >= 100.0);
        REQUIRE(x < 400.0);
    }
    REQUIRE(s.uniform(3.0, 3.0) == 3.0);
    REQUIRE_THROWS_AS(s.uniform(4.0, 3.0), std::invalid_argument);
}

TEST_CASE("bernoulli edge probabilities are exact") {
    RngStream s(13);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE_FALSE(s.bernoulli(0.0));
        REQUIRE(s.bernoulli(1.0));
    }
    REQUIRE_THROWS_AS(s.bernoulli(-0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(s.bernoulli(1.1), std::invalid_argument);
}

TEST_CASE("uniform_below covers its range and nothing else") {
    RngStream s(17);
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 50000; ++i) {
        const std::uint64_t x = s.uniform_below(5);
        REQUIRE(x < 5);
        ++hits[static_cast<std::size_t>(x)];
    }
    for (int h : hits) {
        REQUIRE(h > 9000); // each bucket expects 10000; 9000 is > 9 sigma slack
        REQUIRE(h < 11000);
    }
    REQUIRE(s.uniform_below(1) == 0);
    REQUIRE_THROWS_AS(s.uniform_below(0), std::invalid_argument);
}

TEST_CASE("uniform_int includes both endpoints") {
    RngStream s(19);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 10000; ++i) {
        const int x = s.uniform_int(-3, 3);
        REQUIRE(x >= -3);
        REQUIRE(x <= 3);
        saw_lo = saw_lo || x == -3;
        saw_hi = saw_hi || x == 3;
    }
    REQUIRE(saw_lo);
    REQUIRE(saw_hi);
    REQUIRE(s.uniform_int(5, 5) == 5);
    REQUIRE_THROWS_AS(s.uniform_int(2, 1), std::invalid_argument);
}

TEST_CASE("shuffle produces permutations and uses the stream") {
    RngStream s(23);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    const std::vector<int> original = v;
    s.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == original);
    REQUIRE(v != original); // 50 elements landing back in place is ~1/50! unlikely

    std::vector<int> empty;
    s.shuffle(empty);
    REQUIRE(empty.empty());
    std::vector<int> one{9};
    s.shuffle(one);
    REQUIRE(one == std::vector<int>{9});
}

TEST_CASE("derived seeds separate kinds and indices") {
    const std::uint64_t root = 20240101;
    REQUIRE(derive_seed(root, 1, 0) != derive_seed(root, 2, 0));
    REQUIRE(derive_seed(root, 1, 0) != derive_seed(root, 1, 1));
    REQUIRE(derive_seed(root, 1, 7) == derive_seed(root, 1, 7));
    REQUIRE(derive_seed(root, 1, 0) != derive_seed(root + 1, 1, 0));

    // No collisions across a campaign-sized block of round indices.
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 20000; ++i) seeds.push_back(derive_seed(root, 1, i));
    std::sort(seeds.begin(), seeds.end());
    REQUIRE(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("stream family substreams are reproducible") {
    StreamFamily fam(99);
    RngStream a = fam.substream(stream_kind::campaign_round, 3);
    RngStream b = fam.substream(stream_kind::campaign_round, 3);
    for (int i = 0; i < 32; ++i) REQUIRE(a.next_u64() == b.next_u64());
    RngStream c = fam.substream(stream_kind::risk_probability, 3);
    REQUIRE(fam.substream(stream_kind::campaign_round, 3).next_u64() != c.next_u64());
}
