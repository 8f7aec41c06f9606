#pragma once

#include <cstdint>
#include <cstring>

namespace hetres::fp16 {

// IEEE 754 binary16 conversion, round-to-nearest-even, with saturation to
// the largest finite half on overflow. No compiler intrinsics so behaviour
// is identical everywhere.

inline std::uint16_t from_float(float f, bool* saturated = nullptr) {
    std::uint32_t x;
    std::memcpy(&x, &f, 4);
    const std::uint32_t sign = (x >> 16) & 0x8000u;
    std::int32_t exp = static_cast<std::int32_t>((x >> 23) & 0xff) - 127 + 15;
    std::uint32_t mant = x & 0x7fffffu;

    if (((x >> 23) & 0xff) == 0xff) {  // inf or nan
        if (mant != 0) return static_cast<std::uint16_t>(sign | 0x7e00u);  // nan
        if (saturated) *saturated = true;
        return static_cast<std::uint16_t>(sign | 0x7bffu);  // clamp inf to max finite
    }
    if (exp >= 0x1f) {  // overflow: saturate
        if (saturated) *saturated = true;
        return static_cast<std::uint16_t>(sign | 0x7bffu);
    }
    if (exp <= 0) {  // subnormal or zero
        if (exp < -10) return static_cast<std::uint16_t>(sign);  // underflow to zero
        mant |= 0x800000u;
        const int shift = 14 - exp;
        std::uint32_t half = mant >> shift;
        const std::uint32_t rem = mant & ((1u << shift) - 1);
        const std::uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1)))
            ++half;
        return static_cast<std::uint16_t>(sign | half);
    }
    std::uint32_t half = (static_cast<std::uint32_t>(exp) << 10) | (mant >> 13);
    const std::uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1)))
        ++half;  // carry may bump the exponent; 0x7c00 (inf) handled below
    if ((half & 0x7fffu) >= 0x7c00u) {
        if (saturated) *saturated = true;
        half = 0x7bffu;
    }
    return static_cast<std::uint16_t>(sign | half);
}

inline float to_float(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1fu;
    const std::uint32_t mant = h & 0x3ffu;
    std::uint32_t x;
    if (exp == 0) {
        if (mant == 0) {
            x = sign;
        } else {  // subnormal: renormalize
            int e = -1;
            std::uint32_t m = mant;
            do {
                ++e;
                m <<= 1;
            } while ((m & 0x400u) == 0);
            x = sign | ((127 - 15 - e) << 23) | ((m & 0x3ffu) << 13);
        }
    } else if (exp == 0x1f) {
        x = sign | 0x7f800000u | (mant << 13);
    } else {
        x = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float f;
    std::memcpy(&f, &x, 4);
    return f;
}

inline double round_trip(double v, bool* saturated = nullptr) {
    return static_cast<double>(to_float(from_float(static_cast<float>(v), saturated)));
}

}  // namespace hetres::fp16
