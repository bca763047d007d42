// Seeded random streams. Distribution sampling is hand-rolled on top of
// mt19937_64 so that a (seed, draw-order) pair yields the same values on
// every platform; std::*_distribution makes no such guarantee.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace radrobust {

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Rejection keeps the mapping unbiased.
    uint64_t uniform_index(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // One standard normal via Box-Muller (no spare caching, so the stream
    // position is a pure function of the number of calls).
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Two independent standard normals from one Box-Muller pair.
    void gaussian_pair(double& g1, double& g2) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925287 * u2;
        g1 = r * std::cos(a);
        g2 = r * std::sin(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, back to front.
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace radrobust
