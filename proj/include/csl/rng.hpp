#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace csl {

// Deterministic, splittable random stream.
//
// Stream derivation (the reproducibility contract): stream i of master seed s
// is an mt19937_64 seeded with the i-th output of a splitmix64 generator whose
// state starts at s, i.e.
//
//     seed_i = mix64(s + (i + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the splitmix64 finalizer. Uniform doubles take the top 53
// bits of the engine output; normals use Box-Muller on those uniforms. This
// keeps every draw independent of platform library details, so identical
// (seed, stream) pairs reproduce bit-identical trajectories everywhere.
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream)
        : engine_(derive_seed(master_seed, stream)) {}

    static std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) {
        return mix64(master_seed + (stream + 1) * 0x9E3779B97F4A7C15ull);
    }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // u1 = 0 would blow up the log; the top-53-bit uniform can produce it
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace csl
