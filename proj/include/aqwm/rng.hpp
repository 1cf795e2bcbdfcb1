#pragma once

#include <cmath>
#include <cstdint>

namespace aqwm {

// Deterministic random source shared by every module (generator id:
// "splitmix64/box-muller-v1"). All randomness in the library flows through
// this so that fixtures reproduce bit-for-bit across runs and ports.
//
// splitmix64: one 64-bit state, one mixed output per step (Steele et al.).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1); never returns 0 so log() is safe.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Uniform over {+1, -1} from the top output bit.
    int chip() { return (next() >> 63) ? +1 : -1; }

private:
    std::uint64_t state_;
};

// Stream of standard normal deviates: splitmix64 uniforms through the
// trigonometric Box-Muller transform, two deviates per two uniforms.
// Sample i depends only on (seed, i), so a longer stream extends a shorter
// one with the same prefix.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform01();
        const double u2 = rng_.uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent sub-seed for trial/window `index` of a run seeded
// with `seed`. Used wherever many deterministic substreams are needed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return g.next();
}

}  // namespace aqwm
