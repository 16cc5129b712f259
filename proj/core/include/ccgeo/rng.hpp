#ifndef CCGEO_RNG_HPP
#define CCGEO_RNG_HPP

#include <cmath>
#include <cstdint>

#include "ccgeo/types.hpp"

namespace ccgeo {

/// Deterministic, platform-independent generator (splitmix64 core).
/// Streams are derived by counter-based forking so that parallel or
/// reordered consumers cannot perturb each other's sequences.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (no state caching: two uniforms per draw).
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vec uniform_in_box(const Box& box) {
        Vec p(box.dim());
        for (int i = 0; i < box.dim(); ++i) p[i] = uniform(box.min[i], box.max[i]);
        return p;
    }

    Vec on_sphere(int n) {
        Vec v(n);
        double nrm = 0.0;
        do {
            for (int i = 0; i < n; ++i) v[i] = normal();
            nrm = v.norm();
        } while (nrm < 1e-12);
        return v / nrm;
    }

    /// Independent child stream.
    Rng fork(std::uint64_t stream) const {
        std::uint64_t z = state_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

  private:
    std::uint64_t state_;
};

/// Van der Corput radical inverse, for low-discrepancy sampling.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

/// i-th Halton point scaled into `box` (dimensions use the first primes).
inline Vec halton_in_box(std::uint64_t i, const Box& box) {
    static const std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    const int n = box.dim();
    Vec p(n);
    for (int d = 0; d < n; ++d) {
        double u = radical_inverse(i + 1, primes[d % 10]);
        p[d] = box.min[d] + u * (box.max[d] - box.min[d]);
    }
    return p;
}

}  // namespace ccgeo

#endif
