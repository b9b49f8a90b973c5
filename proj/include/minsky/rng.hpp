#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace minsky {

// All randomness flows through this wrapper. One user-facing seed plus a fixed
// per-purpose tag yields an independent substream, so adding a consumer never
// perturbs the draws of another. Distributions are hand-rolled on top of the
// (fully specified) mt19937_64 stream; standard-library distributions are
// implementation-defined and would break byte-identical replays across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_tag = 0)
        : engine_(mix(seed, stream_tag)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log or power-law argument.
    double uniform01_open_min() { return 1.0 - uniform01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Rejection keeps the draw exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
        const std::uint64_t bound = std::numeric_limits<std::uint64_t>::max() - rem;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= bound);
        return x % n;
    }

    std::int64_t poisson(double lambda) {
        // Knuth's product method; fine for the mean degrees used here.
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        std::int64_t k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= uniform01_open_min();
        } while (prod > limit);
        return k - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    static std::uint64_t splitmix(std::uint64_t& state) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
        std::uint64_t state = seed;
        std::uint64_t out = splitmix(state);
        state ^= (tag + 1) * 0xbf58476d1ce4e5b9ULL;
        out ^= splitmix(state);
        return out;
    }

    std::mt19937_64 engine_;
};

}  // namespace minsky
