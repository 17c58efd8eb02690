#include "lappix/codec.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>

#include "lappix/common.hpp"
#include "lappix/entropy.hpp"
#include "lappix/parallel.hpp"
#include "lappix/predict.hpp"
#include "lappix/pvq.hpp"
#include "lappix/smooth.hpp"
#include "lappix/transform.hpp"

namespace lappix {

namespace {

constexpr uint8_t kMagic[8] = {'L', 'A', 'P', 'P', 'I', 'X', '0', '1'};
constexpr size_t kHeaderSize = 19;

// ---------------------------------------------------------------------------
// adaptive model set (one instance per stream, shared by all planes)
// ---------------------------------------------------------------------------

enum ModelId : int {
    kMSplit5 = 0,  // node size 32
    kMSplit4,
    kMSplit3,
    kMDering,
    kMSkipLuma,
    kMSkipChroma,
    kMMode,
    kMDcSign,
    kMDcMag,   // 0..15 + escape
    kMNoref,
    kMGain,    // 0..15 + escape
    kMFlip,
    kMTheta,   // 0..15 + escape
    kMPulseMag,  // 0..7 + escape
    kNumModels
};

struct Models {
    std::vector<AdaptiveModel> m;
    Models() {
        const int sizes[kNumModels] = {2, 2, 2, 2, 2, 2, 3, 2,
                                       17, 2, 17, 2, 17, 9};
        m.reserve(kNumModels);
        for (int s : sizes) m.emplace_back(s);
    }
};

// Recorded symbols, replayed through the range coder in normative order
// once all per-superblock decisions (dering flags) are known.
struct Tok {
    uint8_t kind;  // 0 model symbol, 1 raw bits, 2 golomb
    uint8_t aux;   // model id / bit count
    uint32_t val;
};
using TokVec = std::vector<Tok>;

void put_sym(TokVec& t, int model, uint32_t sym) {
    t.push_back({0, uint8_t(model), sym});
}
void put_raw(TokVec& t, int bits, uint32_t v) {
    t.push_back({1, uint8_t(bits), v});
}
void put_golomb(TokVec& t, uint32_t v) { t.push_back({2, 0, v}); }

void put_escape(TokVec& t, int model, uint32_t esc_at, uint32_t v) {
    if (v < esc_at) {
        put_sym(t, model, v);
    } else {
        put_sym(t, model, esc_at);
        put_golomb(t, v - esc_at);
    }
}

uint32_t get_escape(RangeDecoder& rc, Models& ms, int model, uint32_t esc_at) {
    uint32_t s = uint32_t(ms.m[model].decode(rc));
    return s < esc_at ? s : esc_at + decode_golomb(rc);
}

// ---------------------------------------------------------------------------
// per-size quantizer and rate model
// ---------------------------------------------------------------------------

int32_t band_rate_q4(const PvqBandCode& c, bool hasref, bool chroma) {
    int32_t r = hasref ? 16 : 0;
    r += approx_bits_q4(uint32_t(c.gain_idx));
    if (c.gain_idx == 0) return r;
    if (!c.noref) {
        if (chroma) r += 16;  // flip
        r += approx_bits_q4(uint32_t(c.theta_idx));
    }
    int kk = 0;
    for (int32_t v : c.y) kk += std::abs(v);
    if (kk > 0)
        for (int32_t v : c.y) {
            r += approx_bits_q4(uint32_t(std::abs(v)));
            if (v != 0) r += 16;
        }
    return r;
}

// Distortion is measured in the coefficient domain, which sits 2^e above
// orthonormal; shifting by 2e makes costs comparable across block sizes.
int64_t leaf_cost_value(int64_t dist, int64_t rate_q4, int e, int64_t lambda) {
    return (16 * dist + (lambda << (2 * e)) * rate_q4) >> (2 * e);
}

// ---------------------------------------------------------------------------
// leaf coding against a prediction (nullptr means all-zero prediction)
// ---------------------------------------------------------------------------

struct CodedLeaf {
    int32_t qdc = 0;
    std::vector<PvqBandCode> bands;
    std::vector<int32_t> recon;  // n*n coefficients
    int64_t dist = 0;
    int32_t rate_q4 = 0;
};

CodedLeaf code_coeffs(const int32_t* blk, const int32_t* pred, int n, int qg,
                      int64_t lambda_coeff, bool chroma) {
    CodedLeaf cl;
    cl.recon.assign(size_t(n) * n, 0);
    bool linear = n == 4;
    int32_t dcp = pred ? pred[0] : 0;
    cl.qdc = int32_t(div_round(blk[0] - dcp, qg));
    int32_t recdc =
        clamp_i32(int32_t(dcp + int64_t(cl.qdc) * qg), -kMaxCoeff, kMaxCoeff);
    cl.recon[0] = recdc;
    int64_t d = blk[0] - recdc;
    cl.dist = d * d;
    cl.rate_q4 = approx_bits_q4(uint32_t(std::abs(cl.qdc)));
    if (cl.qdc != 0) cl.rate_q4 += 16;

    const BandLayout& bl = band_layout(n);
    std::vector<int32_t> xb, rb;
    for (const auto& idx : bl.bands) {
        int nb = int(idx.size());
        xb.resize(nb);
        rb.resize(nb);
        bool hasref = false;
        for (int i = 0; i < nb; ++i) {
            xb[i] = blk[idx[i]];
            rb[i] = pred ? pred[idx[i]] : 0;
            hasref |= rb[i] != 0;
        }
        PvqBandCode c =
            pvq_encode_band(xb.data(), hasref ? rb.data() : nullptr, nb, qg,
                            linear, lambda_coeff, chroma && hasref);
        for (int i = 0; i < nb; ++i) cl.recon[idx[i]] = c.recon[i];
        cl.dist += c.dist;
        cl.rate_q4 += band_rate_q4(c, hasref, chroma);
        cl.bands.push_back(std::move(c));
    }
    return cl;
}

int64_t skip_dist(const int32_t* blk, int n, int32_t dcp) {
    int64_t d0 = blk[0] - dcp;
    int64_t s = d0 * d0;
    for (int i = 1; i < n * n; ++i) s += int64_t(blk[i]) * blk[i];
    return s;
}

// ---------------------------------------------------------------------------
// band emission / decoding (coordinate-wise pulses)
// ---------------------------------------------------------------------------

void emit_band(TokVec& t, const PvqBandCode& c, const int32_t* refb, int nb,
               bool linear, int qg, bool chroma) {
    bool hasref = refb != nullptr;
    if (hasref) put_sym(t, kMNoref, c.noref ? 1 : 0);
    put_escape(t, kMGain, 16, uint32_t(c.gain_idx));
    if (c.gain_idx == 0) return;
    int64_t g_q8 = decoded_gain_q8(c.gain_idx, qg, linear);
    int excl = -1;
    int k;
    if (!c.noref) {
        if (chroma) put_sym(t, kMFlip, c.cfl_flip ? 1 : 0);
        int steps = n_theta_steps(c.gain_idx, linear);
        put_escape(t, kMTheta, 16, uint32_t(c.theta_idx));
        std::vector<int32_t> r(refb, refb + nb);
        if (c.cfl_flip)
            for (auto& v : r) v = -v;
        Reflection refl = make_reflection(r.data(), nb);
        excl = refl.m;
        int64_t cq, sq;
        cos_sin_q30(div_round(int64_t(c.theta_idx) * kHalfPiQ30, steps), &cq,
                    &sq);
        k = pulse_budget((g_q8 * sq) >> 30, qg);
    } else {
        k = pulse_budget(g_q8, qg);
    }
    int last = nb - 1;
    if (last == excl) --last;
    int k_rem = k;
    for (int i = 0; i < nb && k_rem > 0; ++i) {
        if (i == excl) continue;
        int mag = std::abs(c.y[i]);
        if (i != last) {
            put_escape(t, kMPulseMag, 8, uint32_t(mag));
        } else {
            assert(mag == k_rem);
            mag = k_rem;
        }
        if (mag > 0) {
            put_raw(t, 1, c.y[i] < 0 ? 1 : 0);
            k_rem -= mag;
        }
    }
    assert(k_rem == 0 || k == 0);
}

void decode_pulses(RangeDecoder& rc, Models& ms, int nb, int k, int excl,
                   int32_t* y) {
    int last = nb - 1;
    if (last == excl) --last;
    int k_rem = k;
    for (int i = 0; i < nb && k_rem > 0; ++i) {
        if (i == excl) continue;
        int mag;
        if (i != last) {
            mag = int(get_escape(rc, ms, kMPulseMag, 8));
            if (mag > k_rem) throw BitstreamError("pulse count overrun");
        } else {
            mag = k_rem;
        }
        if (mag > 0) {
            uint32_t neg = rc.decode_raw(1);
            y[i] = neg ? -mag : mag;
            k_rem -= mag;
        }
    }
}

void decode_band(RangeDecoder& rc, Models& ms, const int32_t* refb, int nb,
                 bool linear, int qg, bool chroma, int32_t* out) {
    bool hasref = refb != nullptr;
    bool noref = hasref ? ms.m[kMNoref].decode(rc) != 0 : true;
    int gain = int(get_escape(rc, ms, kMGain, 16));
    if (gain > kMaxGainIdx) throw BitstreamError("gain index out of range");
    std::fill(out, out + nb, 0);
    if (gain == 0) return;
    int64_t g_q8 = decoded_gain_q8(gain, qg, linear);
    std::vector<int32_t> y(nb, 0);
    if (!noref) {
        bool flip = false;
        if (chroma) flip = ms.m[kMFlip].decode(rc) != 0;
        int steps = n_theta_steps(gain, linear);
        int theta = int(get_escape(rc, ms, kMTheta, 16));
        if (theta > steps) throw BitstreamError("theta index out of range");
        std::vector<int32_t> r(refb, refb + nb);
        if (flip)
            for (auto& v : r) v = -v;
        Reflection refl = make_reflection(r.data(), nb);
        int64_t cq, sq;
        cos_sin_q30(div_round(int64_t(theta) * kHalfPiQ30, steps), &cq, &sq);
        int k = pulse_budget((g_q8 * sq) >> 30, qg);
        decode_pulses(rc, ms, nb, k, refl.m, y.data());
        pvq_synthesize(y.data(), nb, g_q8, &refl, theta, steps, out);
    } else {
        int k = pulse_budget(g_q8, qg);
        decode_pulses(rc, ms, nb, k, -1, y.data());
        pvq_synthesize(y.data(), nb, g_q8, nullptr, 0, 0, out);
    }
}

// ---------------------------------------------------------------------------
// plane coding context
// ---------------------------------------------------------------------------

struct PlaneCtx {
    const BlockMap* map = nullptr;
    Plane coeff;   // source coefficients (encoder only)
    Plane rec;     // reconstructed coefficients
    ByteMap skip4;
    int sb_log2 = kSbLog2;
    bool chroma = false;
    bool subsampled = false;  // 4:2:0 chroma
};

void gather_block(const Plane& p, int x, int y, int n, int32_t* out) {
    for (int i = 0; i < n; ++i)
        std::memcpy(out + size_t(i) * n, p.row(y + i) + x,
                    sizeof(int32_t) * size_t(n));
}

void scatter_block(Plane& p, int x, int y, int n, const int32_t* in) {
    for (int i = 0; i < n; ++i)
        std::memcpy(p.row(y + i) + x, in + size_t(i) * n,
                    sizeof(int32_t) * size_t(n));
}

void set_skip_cells(ByteMap& m, int x, int y, int n, uint8_t v) {
    for (int cy = y >> 2; cy < (y + n) >> 2; ++cy)
        for (int cx = x >> 2; cx < (x + n) >> 2; ++cx) m.set(cx, cy, v);
}

// Encoder-side leaf: chooses mode and skip by RD, records symbols, fills
// the reconstruction plane.
void encode_leaf(PlaneCtx& pc, const Plane* luma_rec, int q, int64_t lambda,
                 int x, int y, int lg, TokVec& t) {
    const int n = 1 << lg, e = dct_scale_log2(n);
    const int qg = q << e;
    const int64_t lam_coeff = lambda << (2 * e);
    std::vector<int32_t> blk(size_t(n) * n);
    gather_block(pc.coeff, x, y, n, blk.data());

    std::vector<int32_t> pred(size_t(n) * n, 0);
    int32_t dcp = dc_predict(pc.rec, *pc.map, x, y, lg);

    IntraMode best_mode = IntraMode::kNone;
    CodedLeaf best;
    int64_t best_cost = 0;
    bool first = true;
    if (!pc.chroma) {
        for (IntraMode m :
             {IntraMode::kNone, IntraMode::kH, IntraMode::kV}) {
            if (!intra_available(*pc.map, x, y, lg, m)) continue;
            intra_predict(pc.rec, *pc.map, x, y, lg, m, pred.data());
            CodedLeaf cl = code_coeffs(blk.data(), pred.data(), n, qg,
                                       lam_coeff, false);
            int64_t cost =
                leaf_cost_value(cl.dist, 16 + 26 + cl.rate_q4, e, lambda);
            if (first || cost < best_cost) {
                best_cost = cost;
                best = std::move(cl);
                best_mode = m;
                first = false;
            }
        }
    } else {
        cfl_reference(*luma_rec, x, y, lg, pc.subsampled, pred.data());
        pred[0] = dcp;
        best = code_coeffs(blk.data(), pred.data(), n, qg, lam_coeff, true);
        best_cost = leaf_cost_value(best.dist, 16 + best.rate_q4, e, lambda);
    }

    int64_t cost_skip = leaf_cost_value(skip_dist(blk.data(), n, dcp), 16, e,
                                        lambda);
    bool skip = cost_skip <= best_cost;
    put_sym(t, pc.chroma ? kMSkipChroma : kMSkipLuma, skip ? 1 : 0);
    set_skip_cells(pc.skip4, x, y, n, skip ? 1 : 0);
    if (skip) {
        std::vector<int32_t> rec(size_t(n) * n, 0);
        rec[0] = dcp;
        scatter_block(pc.rec, x, y, n, rec.data());
        return;
    }
    if (!pc.chroma) {
        put_sym(t, kMMode, uint32_t(best_mode));
        intra_predict(pc.rec, *pc.map, x, y, lg, best_mode, pred.data());
    } else {
        cfl_reference(*luma_rec, x, y, lg, pc.subsampled, pred.data());
        pred[0] = dcp;
    }
    put_escape(t, kMDcMag, 16, uint32_t(std::abs(best.qdc)));
    if (best.qdc != 0) put_sym(t, kMDcSign, best.qdc < 0 ? 1 : 0);
    const BandLayout& bl = band_layout(n);
    std::vector<int32_t> rb;
    for (size_t b = 0; b < bl.bands.size(); ++b) {
        const auto& idx = bl.bands[b];
        int nb = int(idx.size());
        rb.resize(nb);
        bool hasref = false;
        for (int i = 0; i < nb; ++i) {
            rb[i] = pred[idx[i]];
            hasref |= rb[i] != 0;
        }
        emit_band(t, best.bands[b], hasref ? rb.data() : nullptr, nb, n == 4,
                  qg, pc.chroma);
    }
    scatter_block(pc.rec, x, y, n, best.recon.data());
}

// Decoder-side leaf, the exact mirror.
void decode_leaf(RangeDecoder& rc, Models& ms, PlaneCtx& pc,
                 const Plane* luma_rec, int q, int x, int y, int lg) {
    const int n = 1 << lg;
    const int qg = q << dct_scale_log2(n);
    bool skip = ms.m[pc.chroma ? kMSkipChroma : kMSkipLuma].decode(rc) != 0;
    set_skip_cells(pc.skip4, x, y, n, skip ? 1 : 0);
    int32_t dcp = dc_predict(pc.rec, *pc.map, x, y, lg);
    std::vector<int32_t> rec(size_t(n) * n, 0);
    if (skip) {
        rec[0] = dcp;
        scatter_block(pc.rec, x, y, n, rec.data());
        return;
    }
    std::vector<int32_t> pred(size_t(n) * n, 0);
    if (!pc.chroma) {
        IntraMode mode = IntraMode(ms.m[kMMode].decode(rc));
        if (!intra_available(*pc.map, x, y, lg, mode))
            throw BitstreamError("intra reference unavailable");
        intra_predict(pc.rec, *pc.map, x, y, lg, mode, pred.data());
    } else {
        cfl_reference(*luma_rec, x, y, lg, pc.subsampled, pred.data());
        pred[0] = dcp;
    }
    uint32_t mag = get_escape(rc, ms, kMDcMag, 16);
    int32_t qdc = 0;
    if (mag > 0) {
        if (mag > uint32_t(kMaxCoeff)) throw BitstreamError("dc out of range");
        qdc = ms.m[kMDcSign].decode(rc) ? -int32_t(mag) : int32_t(mag);
    }
    rec[0] = clamp_i32(int32_t(pred[0] + int64_t(qdc) * qg), -kMaxCoeff,
                       kMaxCoeff);
    const BandLayout& bl = band_layout(n);
    std::vector<int32_t> rb, ob;
    for (const auto& idx : bl.bands) {
        int nb = int(idx.size());
        rb.resize(nb);
        ob.resize(nb);
        bool hasref = false;
        for (int i = 0; i < nb; ++i) {
            rb[i] = pred[idx[i]];
            hasref |= rb[i] != 0;
        }
        decode_band(rc, ms, hasref ? rb.data() : nullptr, nb, n == 4, qg,
                    pc.chroma, ob.data());
        for (int i = 0; i < nb; ++i) rec[idx[i]] = ob[i];
    }
    scatter_block(pc.rec, x, y, n, rec.data());
}

// ---------------------------------------------------------------------------
// partition coding
// ---------------------------------------------------------------------------

void emit_splits(const BlockMap& bm, int x, int y, int lg, TokVec& t) {
    if (lg == kMinBlockLog2) return;
    bool split = bm.is_split(x, y, lg);
    put_sym(t, kMSplit5 + (kSbLog2 - lg), split ? 1 : 0);
    if (split) {
        int h = 1 << (lg - 1);
        emit_splits(bm, x, y, lg - 1, t);
        emit_splits(bm, x + h, y, lg - 1, t);
        emit_splits(bm, x, y + h, lg - 1, t);
        emit_splits(bm, x + h, y + h, lg - 1, t);
    }
}

void decode_splits(RangeDecoder& rc, Models& ms, BlockMap& bm, int x, int y,
                   int lg) {
    if (lg == kMinBlockLog2) {
        bm.set_leaf(x, y, lg);
        return;
    }
    bool split = ms.m[kMSplit5 + (kSbLog2 - lg)].decode(rc) != 0;
    if (!split) {
        bm.set_leaf(x, y, lg);
        return;
    }
    int h = 1 << (lg - 1);
    decode_splits(rc, ms, bm, x, y, lg - 1);
    decode_splits(rc, ms, bm, x + h, y, lg - 1);
    decode_splits(rc, ms, bm, x, y + h, lg - 1);
    decode_splits(rc, ms, bm, x + h, y + h, lg - 1);
}

// ---------------------------------------------------------------------------
// shared reconstruction pipeline (encoder and decoder run the same code)
// ---------------------------------------------------------------------------

struct StreamInfo {
    int w = 0, h = 0;
    ChromaFormat fmt = ChromaFormat::kMono;
    LapMode lap = LapMode::k8;
    bool dering = true;
    bool smooth = true;
    int q = 32;
};

int plane_sb_log2(const StreamInfo& si, int p) {
    return (p > 0 && si.fmt == ChromaFormat::k420) ? kSbLog2 - 1 : kSbLog2;
}

// Inverse transform + unlapping + un-centering, per plane.
void recon_pixels(std::vector<Plane>& rec, const std::vector<PlaneCtx>& pcs,
                  const StreamInfo& si) {
    for (size_t p = 0; p < rec.size(); ++p) {
        Plane& pl = rec[p];
        int sbl = pcs[p].sb_log2;
        int sb = 1 << sbl;
        int sbw = pl.w / sb, sbh = pl.h / sb;
        parallel_for(sbw * sbh, [&](int sbi) {
            int sx = (sbi % sbw) * sb, sy = (sbi / sbw) * sb;
            walk_leaves(*pcs[p].map, sx, sy, sbl, [&](int x, int y, int lg) {
                idct_2d(&pl.at(x, y), pl.w, 1 << lg);
            });
        });
        postfilter_plane(pl, *pcs[p].map, sbl, si.lap,
                         pcs[p].subsampled);
        for (auto& v : pl.v) v += 128;
    }
}

// Dering + smoothing + clamp + crop into the output image.
Image finish_output(std::vector<Plane>& recpix, const std::vector<PlaneCtx>& pcs,
                    const StreamInfo& si,
                    const std::vector<uint8_t>& dering_flags,
                    std::vector<DeringBlockInfo>* luma_info) {
    Image out(si.w, si.h, si.fmt);
    for (size_t p = 0; p < recpix.size(); ++p) {
        Plane& pl = recpix[p];
        int sb = 1 << pcs[p].sb_log2;
        if (si.dering) {
            Plane der(pl.w, pl.h);
            dering_plane(pl, der, pcs[p].skip4, dering_flags, sb, si.q,
                         p == 0 ? luma_info : nullptr);
            pl = std::move(der);
        }
        if (si.smooth)
            smooth_plane(pl, *pcs[p].map, sb, si.q,
                         p == 0 ? kSmoothAlphaLuma : kSmoothAlphaChroma);
        Plane& dst = out.plane(int(p));
        for (int y = 0; y < dst.h; ++y)
            for (int x = 0; x < dst.w; ++x)
                dst.at(x, y) = clamp_i32(pl.at(x, y), 0, 255);
    }
    return out;
}

// ---------------------------------------------------------------------------
// container header
// ---------------------------------------------------------------------------

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 24));
}
void put_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(uint8_t(x));
    v.push_back(uint8_t(x >> 8));
}
uint32_t get_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
           uint32_t(p[3]) << 24;
}
uint16_t get_u16(const uint8_t* p) {
    return uint16_t(p[0] | p[1] << 8);
}

StreamInfo parse_header(const std::vector<uint8_t>& data) {
    if (data.size() < kHeaderSize) throw BitstreamError("truncated header");
    if (!std::equal(kMagic, kMagic + 8, data.begin()))
        throw BitstreamError("bad magic");
    StreamInfo si;
    si.w = int(get_u32(data.data() + 8));
    si.h = int(get_u32(data.data() + 12));
    if (si.w < 1 || si.h < 1 || si.w > (1 << 20) || si.h > (1 << 20))
        throw BitstreamError("bad dimensions");
    uint8_t flags = data[16];
    int fmt = flags & 3;
    if (fmt > 2) throw BitstreamError("bad chroma format");
    si.fmt = ChromaFormat(fmt);
    si.lap = (flags & 4) ? LapMode::k8 : LapMode::k4;
    si.dering = !(flags & 8);
    si.smooth = !(flags & 16);
    if (flags & 0xe0) throw BitstreamError("reserved flags set");
    si.q = get_u16(data.data() + 17);
    if (si.q < 1 || si.q > kMaxQ) throw BitstreamError("quantizer out of range");
    return si;
}

}  // namespace

int64_t rd_lambda(int q) {
    return std::max<int64_t>(1, (int64_t(q) * q) >> 3);
}

// ---------------------------------------------------------------------------
// leaf cost table + partition search
// ---------------------------------------------------------------------------

LeafCosts compute_leaf_costs(const Plane& centered, LapMode lap, bool force4,
                             int q) {
    LeafCosts lc;
    lc.pw = centered.w;
    lc.ph = centered.h;
    const int64_t lambda = rd_lambda(q);
    for (int lg = kMinBlockLog2; lg <= kSbLog2; ++lg) {
        Plane snap = centered;
        BlockMap uni(snap.w, snap.h, uint8_t(lg));
        prefilter_plane(snap, uni, kSbLog2, lap, force4);
        const int n = 1 << lg, e = dct_scale_log2(n);
        const int qg = q << e;
        const int64_t lam_coeff = lambda << (2 * e);
        const int bw = snap.w >> lg, bh = snap.h >> lg;
        auto& tab = lc.cost[lg - 2];
        tab.resize(size_t(bw) * bh);
        parallel_for(bw * bh, [&](int bi) {
            int x = (bi % bw) * n, y = (bi / bw) * n;
            std::vector<int32_t> blk(size_t(n) * n);
            gather_block(snap, x, y, n, blk.data());
            fdct_2d(blk.data(), n, n);
            CodedLeaf cl =
                code_coeffs(blk.data(), nullptr, n, qg, lam_coeff, false);
            int64_t coded =
                leaf_cost_value(cl.dist, 16 + cl.rate_q4, e, lambda);
            int64_t skipc =
                leaf_cost_value(skip_dist(blk.data(), n, 0), 16, e, lambda);
            tab[bi] = std::min(coded, skipc);
        });
    }
    return lc;
}

namespace {

int64_t dp_solve(const LeafCosts& lc, int64_t lambda, BlockMap& bm, int x,
                 int y, int lg) {
    if (lg == kMinBlockLog2) {
        bm.set_leaf(x, y, lg);
        return lc.at(lg, x, y);
    }
    int h = 1 << (lg - 1);
    int64_t sc = dp_solve(lc, lambda, bm, x, y, lg - 1) +
                 dp_solve(lc, lambda, bm, x + h, y, lg - 1) +
                 dp_solve(lc, lambda, bm, x, y + h, lg - 1) +
                 dp_solve(lc, lambda, bm, x + h, y + h, lg - 1);
    int64_t leaf = lc.at(lg, x, y);
    if (leaf <= sc) {
        bm.set_leaf(x, y, lg);
        return lambda * 16 + leaf;
    }
    return lambda * 16 + sc;
}

}  // namespace

BlockMap choose_partition(const LeafCosts& lc, int64_t lambda) {
    BlockMap bm(lc.pw, lc.ph, uint8_t(kSbLog2));
    int sbw = lc.pw >> kSbLog2, sbh = lc.ph >> kSbLog2;
    parallel_for(sbw * sbh, [&](int sbi) {
        dp_solve(lc, lambda, bm, (sbi % sbw) << kSbLog2,
                 (sbi / sbw) << kSbLog2, kSbLog2);
    });
    return bm;
}

// ---------------------------------------------------------------------------
// encoder
// ---------------------------------------------------------------------------

std::vector<uint8_t> encode_image(const Image& img, const EncodeParams& par,
                                  EncodeStats* stats) {
    if (par.q < 1 || par.q > kMaxQ) throw UsageError("quantizer out of range");
    if (img.w < 1 || img.h < 1) throw UsageError("empty image");
    StreamInfo si;
    si.w = img.w;
    si.h = img.h;
    si.fmt = img.fmt;
    si.lap = par.lap;
    si.dering = par.dering;
    si.smooth = par.smooth;
    si.q = par.q;
    const int np = img.num_planes();
    const int64_t lambda = rd_lambda(si.q);

    // Padded source (for dering decisions) and centered planes.
    std::vector<Plane> orig(np), centered(np);
    for (int p = 0; p < np; ++p) {
        orig[p] = pad_plane(img.plane(p), 1 << plane_sb_log2(si, p));
        centered[p] = orig[p];
        for (auto& v : centered[p].v) v -= 128;
    }

    // Luma partition by RD search; chroma follows.
    LeafCosts lcost = compute_leaf_costs(centered[0], si.lap, false, si.q);
    BlockMap ymap = choose_partition(lcost, lambda);
    BlockMap cmap;
    if (np > 1)
        cmap = si.fmt == ChromaFormat::k420 ? chroma_map_420(ymap) : ymap;

    std::vector<PlaneCtx> pcs(np);
    for (int p = 0; p < np; ++p) {
        PlaneCtx& pc = pcs[p];
        pc.map = p == 0 ? &ymap : &cmap;
        pc.chroma = p > 0;
        pc.subsampled = p > 0 && si.fmt == ChromaFormat::k420;
        pc.sb_log2 = plane_sb_log2(si, p);
        pc.coeff = centered[p];
        prefilter_plane(pc.coeff, *pc.map, pc.sb_log2, si.lap, pc.subsampled);
        int sb = 1 << pc.sb_log2;
        int sbw = pc.coeff.w / sb, sbh = pc.coeff.h / sb;
        parallel_for(sbw * sbh, [&](int sbi) {
            int sx = (sbi % sbw) * sb, sy = (sbi / sbw) * sb;
            walk_leaves(*pc.map, sx, sy, pc.sb_log2, [&](int x, int y, int lg) {
                fdct_2d(&pc.coeff.at(x, y), pc.coeff.w, 1 << lg);
            });
        });
        pc.rec = Plane(pc.coeff.w, pc.coeff.h);
        pc.skip4 = ByteMap(pc.coeff.w / 4, pc.coeff.h / 4, 0);
    }

    // Symbol pass, sequential: prediction reads reconstructed neighbors.
    const int sbw = centered[0].w >> kSbLog2;
    const int sbh = centered[0].h >> kSbLog2;
    const int nsb = sbw * sbh;
    std::vector<TokVec> sb_split(nsb), sb_leaf(nsb);
    for (int sbi = 0; sbi < nsb; ++sbi) {
        int sx = (sbi % sbw) << kSbLog2, sy = (sbi / sbw) << kSbLog2;
        emit_splits(ymap, sx, sy, kSbLog2, sb_split[sbi]);
        TokVec& t = sb_leaf[sbi];
        walk_leaves(ymap, sx, sy, kSbLog2, [&](int x, int y, int lg) {
            encode_leaf(pcs[0], nullptr, si.q, lambda, x, y, lg, t);
        });
        for (int p = 1; p < np; ++p) {
            int shift = pcs[p].subsampled ? 1 : 0;
            walk_leaves(*pcs[p].map, sx >> shift, sy >> shift, pcs[p].sb_log2,
                        [&](int x, int y, int lg) {
                            encode_leaf(pcs[p], &pcs[0].rec, si.q, lambda, x,
                                        y, lg, t);
                        });
        }
    }

    // Reconstruction and dering decisions.
    std::vector<Plane> recpix(np);
    for (int p = 0; p < np; ++p) recpix[p] = pcs[p].rec;
    recon_pixels(recpix, pcs, si);

    std::vector<uint8_t> flags(size_t(nsb), 0);
    if (si.dering) {
        std::vector<uint8_t> allon(size_t(nsb), 1);
        std::vector<Plane> cand(np);
        for (int p = 0; p < np; ++p) {
            cand[p] = Plane(recpix[p].w, recpix[p].h);
            dering_plane(recpix[p], cand[p], pcs[p].skip4, allon,
                         1 << pcs[p].sb_log2, si.q, nullptr);
        }
        for (int sbi = 0; sbi < nsb; ++sbi) {
            int64_t with = 0, without = 0;
            for (int p = 0; p < np; ++p) {
                int sb = 1 << pcs[p].sb_log2;
                int x0 = (sbi % sbw) * sb, y0 = (sbi / sbw) * sb;
                int iw = p == 0 ? si.w : chroma_width(si.w, si.fmt);
                int ih = p == 0 ? si.h : chroma_height(si.h, si.fmt);
                int x1 = std::min(x0 + sb, iw), y1 = std::min(y0 + sb, ih);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        int64_t s = orig[p].at(x, y);
                        int64_t dw = cand[p].at(x, y) - s;
                        int64_t dn = recpix[p].at(x, y) - s;
                        with += dw * dw;
                        without += dn * dn;
                    }
            }
            flags[sbi] = with < without ? 1 : 0;
        }
    }

    std::vector<DeringBlockInfo> dinfo;
    Image recon = finish_output(recpix, pcs, si, flags,
                                si.dering ? &dinfo : nullptr);

    // Entropy pass in normative order.
    RangeEncoder rc;
    Models ms;
    auto replay = [&](const TokVec& t) {
        for (const Tok& tk : t) {
            if (tk.kind == 0)
                ms.m[tk.aux].encode(rc, int(tk.val));
            else if (tk.kind == 1)
                rc.encode_raw(tk.val, tk.aux);
            else
                encode_golomb(rc, tk.val);
        }
    };
    for (int sbi = 0; sbi < nsb; ++sbi) {
        replay(sb_split[sbi]);
        if (si.dering) ms.m[kMDering].encode(rc, flags[sbi]);
        replay(sb_leaf[sbi]);
    }
    std::vector<uint8_t> payload = rc.finish();

    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, uint32_t(si.w));
    put_u32(out, uint32_t(si.h));
    uint8_t fl = uint8_t(si.fmt);
    if (si.lap == LapMode::k8) fl |= 4;
    if (!si.dering) fl |= 8;
    if (!si.smooth) fl |= 16;
    out.push_back(fl);
    put_u16(out, uint16_t(si.q));
    out.insert(out.end(), payload.begin(), payload.end());

    if (stats) {
        stats->luma_map = ymap;
        stats->dering_flags = flags;
        stats->dering_luma = std::move(dinfo);
        stats->recon = std::move(recon);
    }
    return out;
}

// ---------------------------------------------------------------------------
// decoder
// ---------------------------------------------------------------------------

Image decode_stream(const std::vector<uint8_t>& data, DecodeStats* stats) {
    StreamInfo si = parse_header(data);
    const int np = si.fmt == ChromaFormat::kMono ? 1 : 3;

    std::vector<PlaneCtx> pcs(np);
    BlockMap ymap, cmap;
    {
        int pw = (si.w + 31) / 32 * 32, ph = (si.h + 31) / 32 * 32;
        ymap = BlockMap(pw, ph, uint8_t(kSbLog2));
        pcs[0].rec = Plane(pw, ph);
        pcs[0].skip4 = ByteMap(pw / 4, ph / 4, 0);
        pcs[0].map = &ymap;
    }
    for (int p = 1; p < np; ++p) {
        PlaneCtx& pc = pcs[p];
        pc.chroma = true;
        pc.subsampled = si.fmt == ChromaFormat::k420;
        pc.sb_log2 = plane_sb_log2(si, p);
        int cw = chroma_width(si.w, si.fmt), ch = chroma_height(si.h, si.fmt);
        int sb = 1 << pc.sb_log2;
        int pw = (cw + sb - 1) / sb * sb, phh = (ch + sb - 1) / sb * sb;
        if (p == 1) cmap = BlockMap(pw, phh, uint8_t(kMinBlockLog2));
        pc.map = &cmap;
        pc.rec = Plane(pw, phh);
        pc.skip4 = ByteMap(pw / 4, phh / 4, 0);
    }

    RangeDecoder rc(data.data() + kHeaderSize, data.size() - kHeaderSize);
    Models ms;
    const int sbw = pcs[0].rec.w >> kSbLog2, sbh = pcs[0].rec.h >> kSbLog2;
    const int nsb = sbw * sbh;
    std::vector<uint8_t> flags(size_t(nsb), 0);
    for (int sbi = 0; sbi < nsb; ++sbi) {
        int sx = (sbi % sbw) << kSbLog2, sy = (sbi / sbw) << kSbLog2;
        decode_splits(rc, ms, ymap, sx, sy, kSbLog2);
        if (np > 1 && si.fmt == ChromaFormat::k420) {
            // derive this superblock's chroma cells from the luma cells
            for (int cy4 = sy >> 3; cy4 < (sy >> 3) + 4; ++cy4)
                for (int cx4 = sx >> 3; cx4 < (sx >> 3) + 4; ++cx4) {
                    int l = ymap.at4(cx4 * 2, cy4 * 2);
                    cmap.lg[size_t(cy4) * cmap.w4 + cx4] =
                        uint8_t(l > kMinBlockLog2 ? l - 1 : kMinBlockLog2);
                }
        } else if (np > 1) {
            for (int cy4 = sy >> 2; cy4 < (sy >> 2) + 8; ++cy4)
                for (int cx4 = sx >> 2; cx4 < (sx >> 2) + 8; ++cx4)
                    cmap.lg[size_t(cy4) * cmap.w4 + cx4] =
                        ymap.at4(cx4, cy4);
        }
        if (si.dering) flags[sbi] = uint8_t(ms.m[kMDering].decode(rc));
        walk_leaves(ymap, sx, sy, kSbLog2, [&](int x, int y, int lg) {
            decode_leaf(rc, ms, pcs[0], nullptr, si.q, x, y, lg);
        });
        for (int p = 1; p < np; ++p) {
            int shift = pcs[p].subsampled ? 1 : 0;
            walk_leaves(*pcs[p].map, sx >> shift, sy >> shift, pcs[p].sb_log2,
                        [&](int x, int y, int lg) {
                            decode_leaf(rc, ms, pcs[p], &pcs[0].rec, si.q, x,
                                        y, lg);
                        });
        }
    }

    std::vector<Plane> recpix(np);
    for (int p = 0; p < np; ++p) recpix[p] = pcs[p].rec;
    recon_pixels(recpix, pcs, si);
    std::vector<DeringBlockInfo>* dinfo = nullptr;
    if (stats) {
        stats->q = si.q;
        stats->fmt = si.fmt;
        stats->lap = si.lap;
        stats->dering = si.dering;
        stats->smooth = si.smooth;
        stats->luma_map = ymap;
        stats->dering_flags = flags;
        stats->dering_luma.clear();
        if (si.dering) dinfo = &stats->dering_luma;
    }
    return finish_output(recpix, pcs, si, flags, dinfo);
}

PsnrResult psnr(const Image& a, const Image& b) {
    if (a.w != b.w || a.h != b.h || a.fmt != b.fmt)
        throw UsageError("image dimensions or formats differ");
    PsnrResult r;
    r.num_planes = a.num_planes();
    int64_t sse_all = 0, n_all = 0;
    auto to_db = [](int64_t sse, int64_t n) {
        if (sse == 0) return std::numeric_limits<double>::infinity();
        return 10.0 * std::log10(255.0 * 255.0 * double(n) / double(sse));
    };
    for (int p = 0; p < r.num_planes; ++p) {
        const Plane& pa = a.plane(p);
        const Plane& pb = b.plane(p);
        int64_t sse = 0;
        for (size_t i = 0; i < pa.v.size(); ++i) {
            int64_t d = pa.v[i] - pb.v[i];
            sse += d * d;
        }
        r.plane[p] = to_db(sse, int64_t(pa.v.size()));
        sse_all += sse;
        n_all += int64_t(pa.v.size());
    }
    r.all = to_db(sse_all, n_all);
    return r;
}

}  // namespace lappix
