#pragma once

#include <cmath>
#include <cstdint>

namespace ionsim {

// splitmix64, used both as a seed expander and as a cheap hash combiner.
// Every per-shot stream is derived as mix(mix(master_seed, stream), shot),
// so results do not depend on how shots are scheduled across threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + splitmix64(b)));
}

// xoshiro256++ with splitmix-expanded seeding. Self-contained so that
// sampled trajectories are reproducible bit-for-bit across platforms,
// which std::normal_distribution and friends do not guarantee.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x = splitmix64(x);
            w = x;
        }
        have_gauss_ = false;
        gauss_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe as a log argument.
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_;
        }
        // Box-Muller; both values kept.
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        gauss_ = r * std::sin(a);
        have_gauss_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // Exact Poisson sampling. Knuth product method below the split point,
    // recursive halving above it (a Poisson variate is the sum of two
    // independent Poisson variates with half the mean).
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 30.0) {
            const double h = 0.5 * mean;
            return poisson(h) + poisson(mean - h);
        }
        const double limit = std::exp(-mean);
        long n = -1;
        double prod = 1.0;
        do {
            prod *= uniform();
            ++n;
        } while (prod > limit);
        return n;
    }

    // Thermal (geometric) occupation with mean nbar:
    // p(n) = nbar^n / (1 + nbar)^(n+1).
    long thermal_n(double nbar) {
        if (nbar <= 0.0) return 0;
        const double q = nbar / (1.0 + nbar);
        const double u = uniform_pos();
        return static_cast<long>(std::floor(std::log(u) / std::log(q)));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    bool have_gauss_;
    double gauss_;
};

}  // namespace ionsim
