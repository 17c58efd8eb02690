#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lappix {

// Bad command line or unsupported request.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// File system or file format problem.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed or truncated coded stream.
struct BitstreamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dequantized coefficients are clamped to this magnitude so every later
// integer stage has a proven overflow margin.
inline constexpr int32_t kMaxCoeff = 1 << 18;

inline int32_t clamp_i32(int32_t v, int32_t lo, int32_t hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// Round-to-nearest division, ties away from zero. d > 0.
inline int64_t div_round(int64_t n, int64_t d) {
    return n >= 0 ? (n + d / 2) / d : -((-n + d / 2) / d);
}

// Floor square root of a 64-bit value.
inline uint64_t isqrt64(uint64_t v) {
    if (v == 0) return 0;
    uint64_t r = v;
    uint64_t prev = 0;
    // Newton iteration from a power-of-two seed; monotone descent.
    int bits = 63;
    while (!(v >> bits)) --bits;
    r = uint64_t(1) << (bits / 2 + 1);
    while (true) {
        prev = r;
        r = (r + v / r) >> 1;
        if (r >= prev) break;
    }
    while (prev * prev > v) --prev;
    return prev;
}

namespace detail {
// log2(1 + i/32) and 2^(i/32) in Q16, 33 entries each.
inline constexpr int32_t kLog2Lut[33] = {
    0,     2909,  5732,  8473,  11136, 13727, 16248, 18704, 21098,
    23433, 25711, 27936, 30109, 32234, 34312, 36346, 38336, 40286,
    42196, 44068, 45904, 47705, 49472, 51207, 52911, 54584, 56229,
    57845, 59434, 60997, 62534, 64047, 65536};
inline constexpr int32_t kExp2Lut[33] = {
    65536,  66971,  68438,  69936,  71468,  73032,  74632,  76266, 77936,
    79642,  81386,  83169,  84990,  86851,  88752,  90696,  92682, 94711,
    96785,  98905,  101070, 103283, 105545, 107856, 110218, 112631,
    115098, 117618, 120194, 122825, 125515, 128263, 131072};
}  // namespace detail

// log2(v) in Q16 for v >= 1, by table lookup and linear interpolation.
inline int64_t log2_q16(uint64_t v) {
    int msb = 63;
    while (!(v >> msb)) --msb;
    // mantissa in [1, 2) as Q21 fraction -> 5 index bits + 16 lerp bits
    uint64_t frac;
    if (msb >= 21)
        frac = (v >> (msb - 21)) & ((1 << 21) - 1);
    else
        frac = (v << (21 - msb)) & ((1 << 21) - 1);
    int idx = int(frac >> 16);
    int64_t t = int64_t(frac & 0xffff);
    int64_t lo = detail::kLog2Lut[idx];
    int64_t hi = detail::kLog2Lut[idx + 1];
    return (int64_t(msb) << 16) + lo + ((hi - lo) * t >> 16);
}

// 2^(e/65536) in Q16. e may be negative; result saturates at int64 limits.
inline int64_t exp2_q16(int64_t e_q16) {
    int64_t ip = e_q16 >> 16;                 // floor
    int64_t fp = e_q16 & 0xffff;
    int idx = int(fp >> 11);
    int64_t t = fp & 0x7ff;
    int64_t lo = detail::kExp2Lut[idx];
    int64_t hi = detail::kExp2Lut[idx + 1];
    int64_t m = lo + ((hi - lo) * t >> 11);   // Q16 in [1, 2)
    int sh = int(ip);
    if (sh >= 46) return INT64_MAX;
    if (sh >= 0) return m << sh;
    if (sh < -17) return 0;
    return (m + (int64_t(1) << (-sh - 1))) >> -sh;
}

// v^p with p in Q16, v >= 1 integer; result in Q16.
inline int64_t pow_q16(uint64_t v, int64_t p_q16) {
    if (v == 0) return 0;
    return exp2_q16(log2_q16(v) * p_q16 >> 16);
}

// FNV-1a 64-bit hash; used for golden reconstruction digests.
inline uint64_t fnv1a64(const uint8_t* data, size_t n,
                        uint64_t h = 0xcbf29ce484222325ull) {
    for (size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace lappix
