#pragma once

// Seeded random streams with portable draw semantics.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distribution adaptors (<random>'s uniform_*_distribution, bernoulli_...)
// are implementation-defined.  Every mapping from raw engine output to a
// usable value therefore lives here, so that a given seed produces the same
// numbers on every compiler and platform.

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace oatf {

// One step of the splitmix64 generator.  Used only for seed derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a root seed with a (kind, index) pair into an independent child seed.
// Streams for different kinds or indices never share engine state, which is
// what makes per-round sampling order-independent and reproducible.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t kind, std::uint64_t index) {
    std::uint64_t s = root;
    std::uint64_t h = splitmix64_next(s);
    s ^= kind * 0xd1342543de82ef95ULL;
    h ^= splitmix64_next(s);
    s ^= index * 0xaf251af3b0f025b5ULL;
    h ^= splitmix64_next(s);
    return h;
}

// Stream kinds.  Keeping the constants in one place documents which parts of
// the simulator own which substream families.
namespace stream_kind {
constexpr std::uint64_t campaign_round = 1;   // per-round market samples
constexpr std::uint64_t risk_expectation = 2; // Monte Carlo pass estimating means
constexpr std::uint64_t risk_probability = 3; // Monte Carlo pass estimating tail probabilities
constexpr std::uint64_t scratch = 99;         // tests and ad-hoc draws
} // namespace stream_kind

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi); returns lo when the interval is degenerate.
    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("uniform: lo must not exceed hi");
        return lo + (hi - lo) * next_unit();
    }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli: p outside [0,1]");
        return next_unit() < p;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = gen_();
            if (x >= threshold) return x % n;
        }
    }

    // Uniform integer in [lo, hi], both ends included.
    int uniform_int(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        return lo + static_cast<int>(uniform_below(span));
    }

    // Fisher-Yates shuffle driven by uniform_below, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// Factory for independent substreams hanging off one root seed.
class StreamFamily {
public:
    explicit StreamFamily(std::uint64_t root) : root_(root) {}

    RngStream substream(std::uint64_t kind, std::uint64_t index) const {
        return RngStream(derive_seed(root_, kind, index));
    }

    std::uint64_t root() const { return root_; }

private:
    std::uint64_t root_;
};

} // namespace oatf
