#pragma once

#include <cstdint>
#include <vector>

#include "lappix/common.hpp"

namespace lappix {

// ---------------------------------------------------------------------------
// Band layout: AC coefficients of an n x n block grouped into bands. Band 0
// covers the low 4x4 corner minus DC; each further band is one L-shaped ring
// region triple (top-right, bottom-left, bottom-right), raster order inside
// each region.
// ---------------------------------------------------------------------------
struct BandLayout {
    std::vector<std::vector<uint16_t>> bands;  // linear indices into n*n
};
const BandLayout& band_layout(int n);

// ---------------------------------------------------------------------------
// Enumerative codebook: integer vectors of dimension n with sum |y_i| = k.
// ---------------------------------------------------------------------------
uint64_t pvq_codebook_size(int n, int k);
uint64_t pvq_index(const int32_t* y, int n);
void pvq_decode_index(uint64_t index, int n, int k, int32_t* y);

// ---------------------------------------------------------------------------
// Gain companding. Gain step index m maps to a reconstructed gain in Q8:
// linear bands use qg*m, others qg*m^(3/2) (exact integer square root).
// ---------------------------------------------------------------------------
int64_t compand_q8(int m, bool linear);
int64_t decoded_gain_q8(int m, int qg, bool linear);

// Number of theta steps (theta index range is [0, steps]).
int n_theta_steps(int m, bool linear);

// Pulse budget from the sine radius (Q8) and quantizer.
int pulse_budget(int64_t radius_q8, int qg);

inline constexpr int kMaxGainIdx = 255;

// Rough exp-golomb style cost of a magnitude, shared by all RD searches.
inline int32_t approx_bits_q4(uint32_t v) {
    return int32_t(2 * (log2_q16(uint64_t(v) + 1) >> 12) + 16);
}
inline constexpr int kMaxK = 240;
inline constexpr int64_t kHalfPiQ30 = 1686629713;  // round(pi/2 * 2^30)

// ---------------------------------------------------------------------------
// Fixed-point trig, deterministic across platforms.
// ---------------------------------------------------------------------------
void cos_sin_q30(int64_t ang_q30, int64_t* c_q30, int64_t* s_q30);
int64_t atan2_q30(int64_t y, int64_t x);  // first quadrant, y,x >= 0

// ---------------------------------------------------------------------------
// Householder reflection mapping the prediction r onto the axis -sign*e_m.
// ---------------------------------------------------------------------------
struct Reflection {
    std::vector<int64_t> v;
    int m = 0;        // pivot axis: first index of max |r_i|
    int sign = 1;     // sign of r_m (+1 when r_m == 0)
    int64_t rnorm = 0;  // floor sqrt(sum r_i^2)
};
Reflection make_reflection(const int32_t* r, int n);

// Exact scaled reflection: out = <v,v>*x - 2<v,x>*v. Involutive in the
// scaled sense: applying twice yields <v,v>^2 * x exactly.
void apply_reflection_exact(const Reflection& h, const int64_t* x, int n,
                            int64_t* out);
// Rounded reflection used in synthesis (identical on encoder and decoder).
void apply_reflection_rounded(const Reflection& h, int64_t* w, int n);

// ---------------------------------------------------------------------------
// Band synthesis shared by encoder and decoder. Writes reconstructed
// coefficients. theta_idx/theta_steps are ignored for noref bands; refl and
// cfl_flip apply only with a reference.
// ---------------------------------------------------------------------------
void pvq_synthesize(const int32_t* y, int n, int64_t gain_q8,
                    const Reflection* refl, int theta_idx, int theta_steps,
                    int32_t* out);

// ---------------------------------------------------------------------------
// Encoder band decision.
// ---------------------------------------------------------------------------
struct PvqBandCode {
    bool noref = true;
    int gain_idx = 0;  // 0 means empty band (no theta, no pulses)
    int theta_idx = 0;
    bool cfl_flip = false;
    std::vector<int32_t> y;
    std::vector<int32_t> recon;
    int64_t dist = 0;  // SSE vs source band
};

// ref may be null; flip_allowed enables trying the sign-flipped reference.
PvqBandCode pvq_encode_band(const int32_t* x, const int32_t* ref, int n,
                            int qg, bool linear, int64_t lambda,
                            bool flip_allowed);

// Pulse search: best codebook vector of K pulses approximating z in
// direction (excl >= 0 excludes that axis). Exposed for tests.
std::vector<int32_t> pvq_pulse_search(const int32_t* z, int n, int k, int excl);

}  // namespace lappix
