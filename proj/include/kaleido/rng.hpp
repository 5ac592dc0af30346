#pragma once

// Deterministic, platform-independent random streams. Every stochastic
// component (env, exploration, resets, replay sampling, init) pulls from its
// own named stream so adding draws in one place never shifts another.

#include <cstdint>
#include <cmath>
#include <string_view>

namespace kaleido {

inline uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// xoshiro256++
class RngStream {
public:
    RngStream() : RngStream(0, "default") {}

    RngStream(uint64_t seed, std::string_view stream_name) {
        uint64_t x = seed ^ fnv1a64(stream_name);
        for (auto& word : s_) word = splitmix64(x);
        has_spare_ = false;
        spare_ = 0.0;
    }

    uint64_t u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    int uniform_int(int n) { return static_cast<int>(u64() % static_cast<uint64_t>(n)); }

    // Box-Muller with cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    bool has_spare_;
    double spare_;
};

// The fixed stream set a single run draws from.
struct RngSet {
    RngStream env;
    RngStream exploration;
    RngStream reset;
    RngStream sampling;
    RngStream init;

    explicit RngSet(uint64_t master_seed)
        : env(master_seed, "env"),
          exploration(master_seed, "exploration"),
          reset(master_seed, "reset"),
          sampling(master_seed, "sampling"),
          init(master_seed, "init") {}
};

}  // namespace kaleido
