#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace hqs {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Maps an angle to (-pi, pi].
inline double wrap_pi(double x) {
    double y = std::fmod(x + pi, two_pi);
    if (y <= 0.0) y += two_pi;
    return y - pi;
}

inline double deg(double rad) { return rad * 180.0 / pi; }
inline double rad(double deg) { return deg * pi / 180.0; }

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Decorrelated child seed for a named substream. Used to keep parallel
// tally blocks and protocol segments independent of worker count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

using rng_t = std::mt19937_64;

inline rng_t make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return rng_t(derive_seed(seed, stream));
}

inline double uniform01(rng_t& g) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline bool bernoulli(rng_t& g, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01(g) < p;
}

inline double gaussian(rng_t& g, double mean, double stddev) {
    if (stddev <= 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(g);
}

} // namespace hqs
