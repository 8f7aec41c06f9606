#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace hetres::rng {

// 64-bit finalizer from splitmix64. Full-period bijection with good
// avalanche; the basis of both the sequential stream and the
// counter-indexed noise below.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over a label string; used to derive named sub-streams from the
// master seed so that every random draw in a run is reproducible from
// (master_seed, label).
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label) {
    return mix64(master ^ fnv1a(label));
}

// Uniform double in [0, 1) from the top 53 bits of a word.
inline double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Inverse normal CDF (Acklam's rational approximation, |rel err| < 1.2e-9).
// Used instead of Box-Muller so each normal consumes exactly one word,
// which keeps counter-indexed streams trivially indexable.
inline double inv_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Sequential generator (splitmix64). Deliberately not std::mt19937 so that
// draws are identical across standard-library implementations.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return mix64(state_++); }

    // Uniform in [0, 1).
    double uniform() { return to_unit(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // Map to the open interval (0, 1) to keep the inverse CDF finite.
        double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return inv_normal_cdf(u);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

// Counter-indexed standard normal: the draw for (seed, neuron, step) does
// not depend on evaluation order, so chunked and whole-run simulations
// produce bit-identical noise.
inline double normal_at(std::uint64_t seed, std::uint64_t neuron, std::uint64_t step) {
    std::uint64_t w = mix64(mix64(seed ^ (neuron * 0xd1342543de82ef95ULL)) ^
                            (step * 0x2545f4914f6cdd1dULL));
    double u = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
    return inv_normal_cdf(u);
}

}  // namespace hetres::rng
