#pragma once

#include <cstdint>
#include <random>

namespace stablevar::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substream key for (seed, k); used for per-path / per-replicate
// streams so results do not depend on evaluation order.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(splitmix64(seed) ^ splitmix64(k + 0x632be59bd9b4e019ULL));
}

// Uniform draws are produced from raw 64-bit output instead of
// std::uniform_real_distribution, whose mapping is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // open interval (0, 1)
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform on (-pi/2, pi/2)
    double uniform_angle() {
        return 3.14159265358979323846 * (uniform01() - 0.5);
    }

    // standard exponential
    double exponential() {
        return -std::log(uniform01());
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace stablevar::detail
