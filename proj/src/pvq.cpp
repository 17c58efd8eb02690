#include "lappix/pvq.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <map>

namespace lappix {

// ---------------------------------------------------------------------------
// band layout
// ---------------------------------------------------------------------------

namespace {

BandLayout make_layout(int n) {
    BandLayout bl;
    auto idx = [n](int r, int c) { return uint16_t(r * n + c); };
    // low 4x4 corner minus DC
    std::vector<uint16_t> low{idx(0, 1), idx(1, 0), idx(1, 1)};
    low.push_back(idx(0, 2));
    low.push_back(idx(0, 3));
    low.push_back(idx(1, 2));
    low.push_back(idx(1, 3));
    for (int r = 2; r < 4; ++r)
        for (int c = 0; c < 2; ++c) low.push_back(idx(r, c));
    for (int r = 2; r < 4; ++r)
        for (int c = 2; c < 4; ++c) low.push_back(idx(r, c));
    bl.bands.push_back(std::move(low));
    for (int m = 4; m < n; m *= 2) {
        std::vector<uint16_t> a, b, c;
        for (int r = 0; r < m; ++r)
            for (int col = m; col < 2 * m; ++col) a.push_back(idx(r, col));
        for (int r = m; r < 2 * m; ++r)
            for (int col = 0; col < m; ++col) b.push_back(idx(r, col));
        for (int r = m; r < 2 * m; ++r)
            for (int col = m; col < 2 * m; ++col) c.push_back(idx(r, col));
        bl.bands.push_back(std::move(a));
        bl.bands.push_back(std::move(b));
        bl.bands.push_back(std::move(c));
    }
    return bl;
}

}  // namespace

const BandLayout& band_layout(int n) {
    static const std::map<int, BandLayout> layouts = {
        {4, make_layout(4)},
        {8, make_layout(8)},
        {16, make_layout(16)},
        {32, make_layout(32)},
    };
    return layouts.at(n);
}

// Band 0 of a 4x4 block actually spans the whole block minus DC; the 4x4
// layout built above already enumerates exactly those 15 coefficients.

// ---------------------------------------------------------------------------
// enumerative codebook
// ---------------------------------------------------------------------------

namespace {

uint64_t sat_add(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return s < a ? UINT64_MAX : s;
}

}  // namespace

uint64_t pvq_codebook_size(int n, int k) {
    if (k == 0) return 1;
    if (n == 0) return 0;
    // V(n, k) = V(n-1, k) + V(n, k-1) + V(n-1, k-1)
    std::vector<uint64_t> prev(k + 1, 0), cur(k + 1, 0);
    prev[0] = 1;  // n = 0 row
    for (int d = 1; d <= n; ++d) {
        cur[0] = 1;
        for (int j = 1; j <= k; ++j)
            cur[j] = sat_add(sat_add(prev[j], cur[j - 1]), prev[j - 1]);
        std::swap(prev, cur);
    }
    return prev[k];
}

uint64_t pvq_index(const int32_t* y, int n) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += std::abs(y[i]);
    uint64_t index = 0;
    int krem = k;
    for (int i = 0; i < n && krem > 0; ++i) {
        int d = n - 1 - i;  // dimensions after this one
        int v = y[i];
        int av = std::abs(v);
        // values are ordered 0, +1, -1, +2, -2, ...
        if (av > 0) index = sat_add(index, pvq_codebook_size(d, krem));
        for (int j = 1; j < av; ++j)
            index = sat_add(index,
                            sat_add(pvq_codebook_size(d, krem - j),
                                    pvq_codebook_size(d, krem - j)));
        if (v < 0) index = sat_add(index, pvq_codebook_size(d, krem - av));
        krem -= av;
    }
    return index;
}

void pvq_decode_index(uint64_t index, int n, int k, int32_t* y) {
    int krem = k;
    for (int i = 0; i < n; ++i) {
        if (krem == 0) {
            y[i] = 0;
            continue;
        }
        int d = n - 1 - i;
        uint64_t c0 = pvq_codebook_size(d, krem);
        if (index < c0) {
            y[i] = 0;
            continue;
        }
        index -= c0;
        int j = 1;
        while (true) {
            uint64_t cj = pvq_codebook_size(d, krem - j);
            if (index < cj) {
                y[i] = j;
                krem -= j;
                break;
            }
            index -= cj;
            if (index < cj) {
                y[i] = -j;
                krem -= j;
                break;
            }
            index -= cj;
            ++j;
        }
    }
}

// ---------------------------------------------------------------------------
// companding / theta / pulse budget
// ---------------------------------------------------------------------------

int64_t compand_q8(int m, bool linear) {
    if (linear) return int64_t(m) << 8;
    return int64_t(isqrt64(uint64_t(m) * m * m << 16));
}

int64_t decoded_gain_q8(int m, int qg, bool linear) {
    return compand_q8(m, linear) * qg;
}

int n_theta_steps(int m, bool linear) {
    // ~ (pi/2) * gain-in-steps so angular error balances the gain step
    return 1 + int((compand_q8(m, linear) * 804) >> 17);
}

int pulse_budget(int64_t radius_q8, int qg) {
    int64_t k = div_round(radius_q8 * 3, int64_t(qg) * 512);
    return int(std::clamp<int64_t>(k, 0, kMaxK));
}

// ---------------------------------------------------------------------------
// fixed-point trig
// ---------------------------------------------------------------------------

namespace {

constexpr int64_t kOneQ30 = int64_t(1) << 30;

int64_t mul_q30(int64_t a, int64_t b) { return (a * b) >> 30; }

// sin(x), x in [0, pi/4], Q30
int64_t sin_q30_small(int64_t x) {
    int64_t x2 = mul_q30(x, x);
    int64_t t = kOneQ30 - div_round(x2, 42);
    t = kOneQ30 - div_round(mul_q30(x2, t), 20);
    t = kOneQ30 - div_round(mul_q30(x2, t), 6);
    return mul_q30(x, t);
}

// cos(x), x in [0, pi/4], Q30
int64_t cos_q30_small(int64_t x) {
    int64_t x2 = mul_q30(x, x);
    int64_t t = kOneQ30 - div_round(x2, 56);
    t = kOneQ30 - div_round(mul_q30(x2, t), 30);
    t = kOneQ30 - div_round(mul_q30(x2, t), 12);
    t = kOneQ30 - div_round(mul_q30(x2, t), 2);
    return t;
}

// atan(t), t in [0, ~0.4142], Q30
int64_t atan_q30_small(int64_t t) {
    int64_t t2 = mul_q30(t, t);
    int64_t acc = div_round(kOneQ30, 11);
    acc = div_round(kOneQ30, 9) - mul_q30(t2, acc);
    acc = div_round(kOneQ30, 7) - mul_q30(t2, acc);
    acc = div_round(kOneQ30, 5) - mul_q30(t2, acc);
    acc = div_round(kOneQ30, 3) - mul_q30(t2, acc);
    acc = kOneQ30 - mul_q30(t2, acc);
    return mul_q30(t, acc);
}

constexpr int64_t kQuarterPiQ30 = 843314857;  // round(pi/4 * 2^30)
constexpr int64_t kTanPi8Q30 = 444744447;     // round(tan(pi/8) * 2^30)

}  // namespace

void cos_sin_q30(int64_t ang_q30, int64_t* c_q30, int64_t* s_q30) {
    assert(ang_q30 >= 0 && ang_q30 <= kHalfPiQ30);
    if (ang_q30 <= kQuarterPiQ30) {
        *c_q30 = cos_q30_small(ang_q30);
        *s_q30 = sin_q30_small(ang_q30);
    } else {
        int64_t r = kHalfPiQ30 - ang_q30;
        *c_q30 = sin_q30_small(r);
        *s_q30 = cos_q30_small(r);
    }
}

int64_t atan2_q30(int64_t y, int64_t x) {
    assert(y >= 0 && x >= 0);
    if (y == 0) return 0;
    if (x == 0) return kHalfPiQ30;
    while (y >= (int64_t(1) << 32) || x >= (int64_t(1) << 32)) {
        y >>= 1;
        x >>= 1;
    }
    bool swapped = y > x;
    if (swapped) std::swap(y, x);
    int64_t t = div_round(y << 30, x);  // in (0, 2^30]
    int64_t a;
    if (t <= kTanPi8Q30) {
        a = atan_q30_small(t);
    } else {
        // atan(t) = pi/4 - atan((1-t)/(1+t))
        int64_t u = div_round((kOneQ30 - t) << 30, kOneQ30 + t);
        a = kQuarterPiQ30 - atan_q30_small(u);
    }
    return swapped ? kHalfPiQ30 - a : a;
}

// ---------------------------------------------------------------------------
// householder
// ---------------------------------------------------------------------------

Reflection make_reflection(const int32_t* r, int n) {
    Reflection h;
    h.v.assign(n, 0);
    uint64_t n2 = 0;
    int64_t best = -1;
    for (int i = 0; i < n; ++i) {
        int64_t a = std::abs(int64_t(r[i]));
        n2 += uint64_t(a) * uint64_t(a);
        if (a > best) {
            best = a;
            h.m = i;
        }
    }
    h.rnorm = int64_t(isqrt64(n2));
    h.sign = r[h.m] < 0 ? -1 : 1;
    for (int i = 0; i < n; ++i) h.v[i] = r[i];
    h.v[h.m] += h.sign * h.rnorm;
    return h;
}

void apply_reflection_exact(const Reflection& h, const int64_t* x, int n,
                            int64_t* out) {
    __int128 vv = 0, vx = 0;
    for (int i = 0; i < n; ++i) {
        vv += __int128(h.v[i]) * h.v[i];
        vx += __int128(h.v[i]) * x[i];
    }
    for (int i = 0; i < n; ++i)
        out[i] = int64_t(vv * x[i] - 2 * vx * h.v[i]);
}

void apply_reflection_rounded(const Reflection& h, int64_t* w, int n) {
    int64_t vv = 0, vw = 0;
    for (int i = 0; i < n; ++i) {
        vv += h.v[i] * h.v[i];
        vw += h.v[i] * w[i];
    }
    if (vv == 0) return;
    // t = <v,w>/<v,v> in Q16, pre-shifted so the product stays in range
    int sh = 0;
    int64_t a = std::abs(vw);
    while ((a >> sh) > (int64_t(1) << 46)) ++sh;
    int64_t t_q16 = div_round((vw >> sh) << 16, std::max<int64_t>(vv >> sh, 1));
    for (int i = 0; i < n; ++i)
        w[i] -= div_round(2 * t_q16 * h.v[i], 65536);
}

// ---------------------------------------------------------------------------
// synthesis
// ---------------------------------------------------------------------------

void pvq_synthesize(const int32_t* y, int n, int64_t gain_q8,
                    const Reflection* refl, int theta_idx, int theta_steps,
                    int32_t* out) {
    auto clamp_out = [](int64_t v) {
        return int32_t(std::clamp<int64_t>(v, -kMaxCoeff, kMaxCoeff));
    };
    uint64_t yn2 = 0;
    for (int i = 0; i < n; ++i) yn2 += uint64_t(int64_t(y[i]) * y[i]);
    if (!refl) {
        if (yn2 == 0 || gain_q8 == 0) {
            for (int i = 0; i < n; ++i) out[i] = 0;
            return;
        }
        int64_t den_q12 = int64_t(isqrt64(yn2 << 24));
        for (int i = 0; i < n; ++i)
            out[i] = clamp_out(
                div_round(gain_q8 * int64_t(y[i]) * 4096, den_q12 * 256));
        return;
    }
    int64_t c_q30, s_q30;
    int64_t ang = theta_steps > 0
                      ? div_round(int64_t(theta_idx) * kHalfPiQ30, theta_steps)
                      : 0;
    cos_sin_q30(ang, &c_q30, &s_q30);
    std::vector<int64_t> w(n, 0);
    if (yn2 > 0) {
        int64_t r_q8 = (gain_q8 * s_q30) >> 30;
        int64_t den_q12 = int64_t(isqrt64(yn2 << 24));
        for (int i = 0; i < n; ++i)
            w[i] = div_round(r_q8 * int64_t(y[i]) * 4096, den_q12 * 256);
    }
    w[refl->m] -= refl->sign * ((gain_q8 * c_q30 + (int64_t(1) << 29)) >> 30);
    apply_reflection_rounded(*refl, w.data(), n);
    for (int i = 0; i < n; ++i) out[i] = clamp_out(div_round(w[i], 256));
}

// ---------------------------------------------------------------------------
// pulse search
// ---------------------------------------------------------------------------

std::vector<int32_t> pvq_pulse_search(const int32_t* z, int n, int k, int excl) {
    std::vector<int32_t> y(n, 0);
    if (k <= 0) return y;
    std::vector<int64_t> az(n);
    int64_t l1 = 0;
    for (int i = 0; i < n; ++i) {
        az[i] = i == excl ? 0 : std::abs(int64_t(z[i]));
        l1 += az[i];
    }
    if (l1 == 0) {
        y[excl == 0 ? (n > 1 ? 1 : 0) : 0] = k;
        return y;
    }
    int placed = 0;
    int64_t dot = 0, yy = 0;
    for (int i = 0; i < n; ++i) {
        int32_t yi = int32_t(int64_t((__int128(k) * az[i]) / l1));
        y[i] = yi;
        placed += yi;
        dot += az[i] * yi;
        yy += int64_t(yi) * yi;
    }
    for (; placed < k; ++placed) {
        int best = -1;
        __int128 bnum = 0;
        int64_t bden = 1;
        for (int i = 0; i < n; ++i) {
            if (i == excl) continue;
            __int128 num = __int128(dot + az[i]) * (dot + az[i]);
            int64_t den = yy + 2 * y[i] + 1;
            if (best < 0 || num * bden > bnum * den) {
                best = i;
                bnum = num;
                bden = den;
            }
        }
        dot += az[best];
        yy += 2 * y[best] + 1;
        y[best]++;
    }
    // single-pulse swap refinement: move one pulse while it improves the
    // squared correlation
    for (int sweep = 0; sweep < 32; ++sweep) {
        bool moved = false;
        for (int i = 0; i < n; ++i) {
            if (y[i] == 0) continue;
            int64_t dot_i = dot - az[i];
            int64_t yy_i = yy - 2 * y[i] + 1;
            for (int j = 0; j < n; ++j) {
                if (j == i || j == excl) continue;
                int64_t dot_j = dot_i + az[j];
                int64_t yy_j = yy_i + 2 * y[j] + 1;
                if (__int128(dot_j) * dot_j * yy >
                    __int128(dot) * dot * yy_j) {
                    y[i]--;
                    y[j]++;
                    dot = dot_j;
                    yy = yy_j;
                    moved = true;
                    break;  // donor terms are stale after a move
                }
            }
        }
        if (!moved) break;
    }
    for (int i = 0; i < n; ++i)
        if (z[i] < 0) y[i] = -y[i];
    return y;
}

// ---------------------------------------------------------------------------
// encoder band decision
// ---------------------------------------------------------------------------

namespace {

int inverse_compand(int64_t gnorm, int qg, bool linear) {
    if (linear) return int(div_round(gnorm, qg));
    int64_t target_cq8 = div_round(gnorm * 256, qg);
    if (target_cq8 <= 0) return 0;
    // m = (c/256)^(2/3) = c^(2/3) / 256^(2/3)
    return int(div_round(pow_q16(uint64_t(target_cq8), 43691), 2642246));
}

struct Candidate {
    bool noref;
    bool flip;
    int m;
    int theta;
};

}  // namespace

PvqBandCode pvq_encode_band(const int32_t* x, const int32_t* ref, int n,
                            int qg, bool linear, int64_t lambda,
                            bool flip_allowed) {
    uint64_t xn2 = 0;
    for (int i = 0; i < n; ++i) xn2 += uint64_t(int64_t(x[i]) * x[i]);
    int64_t gnorm = int64_t(isqrt64(xn2));
    uint64_t rn2 = 0;
    if (ref)
        for (int i = 0; i < n; ++i) rn2 += uint64_t(int64_t(ref[i]) * ref[i]);
    bool have_ref = ref && rn2 > 0;

    PvqBandCode best;
    int64_t best_score = INT64_MAX;
    std::vector<int32_t> recon(n), flipped;
    std::vector<int64_t> wx;
    std::vector<int32_t> zbuf(n);

    auto consider = [&](const Candidate& cand, const Reflection* refl,
                        int theta_steps, std::vector<int32_t>&& y) {
        int64_t g_q8 = decoded_gain_q8(cand.m, qg, linear);
        pvq_synthesize(y.data(), n, g_q8, refl, cand.theta, theta_steps,
                       recon.data());
        int64_t dist = 0;
        for (int i = 0; i < n; ++i) {
            int64_t d = int64_t(x[i]) - recon[i];
            dist += d * d;
        }
        int64_t rate_q4 = 16;  // noref flag
        rate_q4 += approx_bits_q4(uint32_t(cand.m));
        if (!cand.noref) {
            if (flip_allowed) rate_q4 += 16;
            if (cand.m > 0) rate_q4 += approx_bits_q4(uint32_t(cand.theta));
        }
        int kk = 0;
        for (int i = 0; i < n; ++i) kk += std::abs(y[i]);
        if (kk > 0) {
            for (int i = 0; i < n; ++i) {
                rate_q4 += approx_bits_q4(uint32_t(std::abs(y[i])));
                if (y[i] != 0) rate_q4 += 16;
            }
        }
        int64_t score = dist * 16 + lambda * rate_q4;
        if (score < best_score) {
            best_score = score;
            best.noref = cand.noref;
            best.gain_idx = cand.m;
            best.theta_idx = cand.theta;
            best.cfl_flip = cand.flip;
            best.y = std::move(y);
            best.recon = recon;
            best.dist = dist;
        }
    };

    // no-reference candidates (always includes the empty band m = 0)
    int m0 = std::clamp(inverse_compand(gnorm, qg, linear), 0, kMaxGainIdx);
    int prev_m = -1;
    for (int m : {0, m0 - 1, m0, m0 + 1}) {
        if (m < 0 || m > kMaxGainIdx || m == prev_m) continue;
        prev_m = m;
        std::vector<int32_t> y(n, 0);
        if (m > 0) {
            int64_t g_q8 = decoded_gain_q8(m, qg, linear);
            int k = pulse_budget(g_q8, qg);
            y = pvq_pulse_search(x, n, k, -1);
        }
        consider({true, false, m, 0}, nullptr, 0, std::move(y));
    }

    if (have_ref) {
        for (int flip = 0; flip <= (flip_allowed ? 1 : 0); ++flip) {
            const int32_t* r = ref;
            if (flip) {
                flipped.assign(n, 0);
                for (int i = 0; i < n; ++i) flipped[i] = -ref[i];
                r = flipped.data();
            }
            Reflection refl = make_reflection(r, n);
            // reflected source in Q8 for the theta estimate and pulse target
            wx.assign(n, 0);
            for (int i = 0; i < n; ++i) wx[i] = int64_t(x[i]) * 256;
            apply_reflection_rounded(refl, wx.data(), n);
            int64_t dot = -refl.sign * wx[refl.m];
            uint64_t perp2 = 0;
            for (int i = 0; i < n; ++i)
                if (i != refl.m) perp2 += uint64_t(wx[i] * wx[i] >> 16);
            int64_t theta_q30 =
                dot <= 0 ? kHalfPiQ30
                         : atan2_q30(int64_t(isqrt64(perp2)) << 8,
                                     dot);
            int64_t mx = 0;
            for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs(wx[i]));
            int shz = 0;
            while ((mx >> shz) >= (int64_t(1) << 29)) ++shz;
            for (int i = 0; i < n; ++i) zbuf[i] = int32_t(wx[i] >> shz);

            for (int m : {m0 - 1, m0, m0 + 1}) {
                if (m < 1 || m > kMaxGainIdx) continue;
                int steps = n_theta_steps(m, linear);
                int64_t g_q8 = decoded_gain_q8(m, qg, linear);
                int t0 = int(div_round(theta_q30 * steps, kHalfPiQ30));
                int prev_t = -1;
                for (int t : {t0 - 1, t0, t0 + 1}) {
                    if (t < 0 || t > steps || t == prev_t) continue;
                    prev_t = t;
                    int64_t c_q30, s_q30;
                    cos_sin_q30(div_round(int64_t(t) * kHalfPiQ30, steps),
                                &c_q30, &s_q30);
                    int k = pulse_budget((g_q8 * s_q30) >> 30, qg);
                    std::vector<int32_t> y =
                        pvq_pulse_search(zbuf.data(), n, k, refl.m);
                    consider({false, flip != 0, m, t}, &refl, steps,
                             std::move(y));
                }
            }
        }
    }
    return best;
}

}  // namespace lappix
