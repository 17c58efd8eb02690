#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lappix/codec.hpp"
#include "lappix/common.hpp"
#include "lappix/dering.hpp"
#include "lappix/entropy.hpp"
#include "lappix/io.hpp"
#include "lappix/parallel.hpp"
#include "lappix/pvq.hpp"
#include "lappix/smooth.hpp"
#include "lappix/transform.hpp"

// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. All tolerances are fixed here.

using namespace lappix;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s: %s%s%s\n", ok ? "PASS" : "FAIL", name,
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++g_failures;
}

struct Lcg {
    uint64_t s;
    explicit Lcg(uint64_t seed) : s(seed) {}
    uint32_t next() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return uint32_t(s >> 33);
    }
};

// ---------------------------------------------------------------------------
// 1. transform reversibility
// ---------------------------------------------------------------------------

void random_tree(BlockMap& bm, Lcg& rng, int x, int y, int lg) {
    if (lg > kMinBlockLog2 && (rng.next() & 1)) {
        int h = 1 << (lg - 1);
        random_tree(bm, rng, x, y, lg - 1);
        random_tree(bm, rng, x + h, y, lg - 1);
        random_tree(bm, rng, x, y + h, lg - 1);
        random_tree(bm, rng, x + h, y + h, lg - 1);
    } else {
        bm.set_leaf(x, y, lg);
    }
}

bool crit_transform(std::string& detail) {
    Lcg rng(101);
    for (int n : {4, 8, 16, 32}) {
        std::vector<int32_t> blk(size_t(n) * n), ref;
        for (int it = 0; it < 10000; ++it) {
            for (auto& v : blk) v = int32_t(rng.next() % 511) - 255;
            ref = blk;
            fdct_2d(blk.data(), n, n);
            idct_2d(blk.data(), n, n);
            if (blk != ref) {
                detail = "dct identity broke at n=" + std::to_string(n);
                return false;
            }
        }
    }
    for (int it = 0; it < 100; ++it) {
        for (LapMode m : {LapMode::k4, LapMode::k8})
            for (bool force4 : {false, true}) {
                Plane p(64, 64);
                for (auto& v : p.v) v = int32_t(rng.next() % 511) - 255;
                Plane ref = p;
                BlockMap bm(64, 64, uint8_t(kSbLog2));
                for (int sy = 0; sy < 64; sy += 32)
                    for (int sx = 0; sx < 64; sx += 32)
                        random_tree(bm, rng, sx, sy, kSbLog2);
                prefilter_plane(p, bm, kSbLog2, m, force4);
                for (int sy = 0; sy < 64; sy += 32)
                    for (int sx = 0; sx < 64; sx += 32)
                        walk_leaves(bm, sx, sy, kSbLog2,
                                    [&](int x, int y, int lg) {
                                        fdct_2d(&p.at(x, y), 64, 1 << lg);
                                        idct_2d(&p.at(x, y), 64, 1 << lg);
                                    });
                postfilter_plane(p, bm, kSbLog2, m, force4);
                if (p.v != ref.v) {
                    detail = "lapped pipeline identity broke";
                    return false;
                }
            }
    }
    detail = "40000 blocks + 400 random trees, bit-exact";
    return true;
}

// ---------------------------------------------------------------------------
// 2. pvq codebook
// ---------------------------------------------------------------------------

uint64_t count_lattice(int n, int k) {
    if (n == 0) return k == 0 ? 1 : 0;
    uint64_t c = count_lattice(n - 1, k);
    for (int a = 1; a <= k; ++a) c += 2 * count_lattice(n - 1, k - a);
    return c;
}

void enum_lattice(int n, int k, std::vector<int32_t>& cur,
                  std::vector<std::vector<int32_t>>& out) {
    if (int(cur.size()) == n - 1) {
        for (int s = -1; s <= 1; s += 2) {
            cur.push_back(int32_t(s * k));
            out.push_back(cur);
            cur.pop_back();
            if (k == 0) break;
        }
        return;
    }
    for (int a = -k; a <= k; ++a) {
        cur.push_back(a);
        enum_lattice(n, k - std::abs(a), cur, out);
        cur.pop_back();
    }
}

bool crit_pvq(std::string& detail) {
    if (pvq_codebook_size(2, 1) != 4 || pvq_codebook_size(3, 2) != 18) {
        detail = "known sizes wrong";
        return false;
    }
    for (int n = 1; n <= 8; ++n)
        for (int k = 0; k <= 6; ++k)
            if (pvq_codebook_size(n, k) != count_lattice(n, k)) {
                detail = "size mismatch at n=" + std::to_string(n) +
                         " k=" + std::to_string(k);
                return false;
            }
    for (int n = 1; n <= 6; ++n)
        for (int k = 0; k <= 5; ++k) {
            std::vector<std::vector<int32_t>> all;
            std::vector<int32_t> cur;
            enum_lattice(n, k, cur, all);
            uint64_t size = pvq_codebook_size(n, k);
            if (all.size() != size) {
                detail = "enumeration count mismatch";
                return false;
            }
            std::vector<uint8_t> seen(size, 0);
            std::vector<int32_t> dec(n);
            for (const auto& y : all) {
                uint64_t idx = pvq_index(y.data(), n);
                if (idx >= size || seen[idx]) {
                    detail = "index not bijective";
                    return false;
                }
                seen[idx] = 1;
                pvq_decode_index(idx, n, k, dec.data());
                if (!std::equal(dec.begin(), dec.end(), y.begin())) {
                    detail = "decode(index) != vector";
                    return false;
                }
            }
        }
    detail = "sizes n<=8 k<=6, bijective n<=6 k<=5";
    return true;
}

// ---------------------------------------------------------------------------
// 3. direction search
// ---------------------------------------------------------------------------

int line_bucket(int d, int i, int j) {
    switch (d) {
        case 0: return i + j;
        case 1: return i + (j >> 1);
        case 2: return i;
        case 3: return 3 + i - (j >> 1);
        case 4: return 7 + i - j;
        case 5: return 3 - (i >> 1) + j;
        case 6: return j;
        default: return (i >> 1) + j;
    }
}

bool crit_direction(std::string& detail) {
    for (int d = 0; d < 8; ++d) {
        Plane p(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                p.at(j, i) = 40 + (line_bucket(d, i, j) * 23) % 160;
        int64_t s[8];
        int got = dering_find_dir(p, 0, 0, s);
        if (got != d) {
            detail = "wrong direction on ideal pattern " + std::to_string(d);
            return false;
        }
        int64_t e = 0;
        for (const int32_t v : p.v) e += int64_t(v) * v;
        if (840 * e - s[d] != 0) {  // zero variance along the true direction
            detail = "nonzero variance on ideal pattern";
            return false;
        }
    }
    // score form and variance form agree exactly on random blocks
    Lcg rng(303);
    for (int it = 0; it < 1000; ++it) {
        Plane p(8, 8);
        for (auto& v : p.v) v = int32_t(rng.next() % 256);
        int64_t s[8];
        dering_find_dir(p, 0, 0, s);
        int64_t e = 0;
        for (const int32_t v : p.v) e += int64_t(v) * v;
        for (int d = 0; d < 8; ++d) {
            int64_t sum[16], cnt[16], sq[16];
            std::fill(sum, sum + 16, 0);
            std::fill(cnt, cnt + 16, 0);
            std::fill(sq, sq + 16, 0);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    int b = line_bucket(d, i, j);
                    sum[b] += p.at(j, i);
                    sq[b] += int64_t(p.at(j, i)) * p.at(j, i);
                    cnt[b]++;
                }
            int64_t var840 = 0;
            for (int b = 0; b < 16; ++b)
                if (cnt[b])
                    var840 += (840 / cnt[b]) * (cnt[b] * sq[b] -
                                                sum[b] * sum[b]);
            if (840 * e - s[d] != var840) {
                detail = "variance identity failed";
                return false;
            }
        }
    }
    detail = "8/8 ideal patterns, identity exact on 1000 blocks";
    return true;
}

// ---------------------------------------------------------------------------
// 4. threshold math
// ---------------------------------------------------------------------------

bool crit_threshold(std::string& detail) {
    for (int t = 1; t <= 64; ++t)
        for (int d = -255; d <= 255; ++d)
            if (dering_thresh(d, t << 8) != (std::abs(d) < t ? d : 0)) {
                detail = "hard shrink mismatch";
                return false;
            }
    int32_t t0 = dering_t0_q8(37);
    int32_t lo = int32_t((int64_t(t0) * 32768 + 32768) >> 16);
    int32_t hi = int32_t((int64_t(t0) * 196608 + 32768) >> 16);
    if (dering_td_q8(t0, 0, 0) != lo || dering_td_q8(t0, -5, 100) != lo ||
        dering_td_q8(t0, 1, 0) != lo) {
        detail = "lower clamp not reached";
        return false;
    }
    int64_t big = int64_t(1) << 40;
    if (dering_td_q8(t0, big, big) != hi ||
        dering_td_q8(t0, 4 * big, 4 * big) != hi) {
        detail = "upper clamp not reached";
        return false;
    }
    for (int64_t d = 1; d < (int64_t(1) << 30); d *= 7) {
        int32_t td = dering_td_q8(t0, d, d);
        if (td < lo || td > hi) {
            detail = "threshold escaped the clamp range";
            return false;
        }
    }
    for (int q : {5, 400}) {
        double want = std::pow(double(q), 0.842);
        double got = double(dering_t0_q8(q)) / 256.0;
        if (std::abs(got - want) > 0.01 * want) {
            detail = "base threshold off at q=" + std::to_string(q);
            return false;
        }
    }
    detail = "shrink exhaustive, clamps at both ends, base within 1%";
    return true;
}

// ---------------------------------------------------------------------------
// 5 + 6. dering efficacy and order invariance
// ---------------------------------------------------------------------------

// Whole-image line families: constant along every in-block line of the given
// direction and consistent across block edges, so the clean signal has zero
// variance along the true direction everywhere.
int global_bucket(int d, int x, int y) {
    switch (d) {
        case 0: return x + y;
        case 1: return y + (x >> 1);
        case 2: return y;
        case 3: return y - (x >> 1);
        case 4: return y - x;
        case 5: return x - (y >> 1);
        case 6: return x;
        default: return x + (y >> 1);
    }
}

Plane directional_scene(int d, uint64_t seed, Plane* clean_out) {
    Lcg rng(seed);
    int phase = int(rng.next() % 150);
    Plane clean(64, 64), noisy(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            int t = global_bucket(d, x, y) * 5 + phase;
            clean.at(x, y) = 60 + ((t % 150) + 150) % 150;
            noisy.at(x, y) = clean.at(x, y) + int(rng.next() % 17) - 8;
        }
    if (clean_out) *clean_out = clean;
    return noisy;
}

int64_t plane_sse(const Plane& a, const Plane& b) {
    int64_t s = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        int64_t d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s;
}

bool crit_efficacy(std::string& detail) {
    int improved = 0;
    const int q = 64;
    for (int it = 0; it < 50; ++it) {
        Plane clean;
        Plane noisy = directional_scene(it % 8, 1000 + it, &clean);
        ByteMap skip(16, 16, 0);
        std::vector<uint8_t> on(4, 1);
        Plane out(64, 64);
        dering_plane(noisy, out, skip, on, 32, q, nullptr);
        int64_t before = plane_sse(noisy, clean);
        int64_t after = plane_sse(out, clean);
        if (after < before)
            ++improved;
        else if (after * 100 > before * 101) {
            detail = "hurt image " + std::to_string(it) + " by more than 1%";
            return false;
        }
    }
    if (improved < 45) {
        detail = "improved only " + std::to_string(improved) + "/50";
        return false;
    }
    detail = "improved " + std::to_string(improved) + "/50, rest within 1%";
    return true;
}

bool crit_order(std::string& detail) {
    for (int it = 0; it < 10; ++it) {
        Plane noisy = directional_scene(it % 8, 2000 + it, nullptr);
        ByteMap skip(16, 16, 0);
        std::vector<uint8_t> on(4, 1);
        Plane serial(64, 64), parallel(64, 64);
        set_parallel(false);
        dering_plane(noisy, serial, skip, on, 32, 24, nullptr);
        set_parallel(true);
        dering_plane(noisy, parallel, skip, on, 32, 24, nullptr);
        // random superblock visiting order via one-superblock masks
        Lcg rng(3000 + it);
        int order[4] = {0, 1, 2, 3};
        for (int i = 3; i > 0; --i)
            std::swap(order[i], order[rng.next() % (i + 1)]);
        Plane permuted(64, 64);
        for (int oi = 0; oi < 4; ++oi) {
            int sbi = order[oi];
            std::vector<uint8_t> one(4, 0);
            one[sbi] = 1;
            Plane tmp(64, 64);
            dering_plane(noisy, tmp, skip, one, 32, 24, nullptr);
            int sx = (sbi % 2) * 32, sy = (sbi / 2) * 32;
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x)
                    permuted.at(sx + x, sy + y) = tmp.at(sx + x, sy + y);
        }
        if (serial.v != parallel.v || serial.v != permuted.v) {
            detail = "outputs differ across orders";
            return false;
        }
    }
    detail = "serial == parallel == permuted on 10 images";
    return true;
}

// ---------------------------------------------------------------------------
// 7. partition search optimality
// ---------------------------------------------------------------------------

std::vector<int64_t> all_tree_costs(const LeafCosts& lc, int64_t lambda,
                                    int x, int y, int lg) {
    if (lg == kMinBlockLog2) return {lc.at(lg, x, y)};
    int h = 1 << (lg - 1);
    auto c0 = all_tree_costs(lc, lambda, x, y, lg - 1);
    auto c1 = all_tree_costs(lc, lambda, x + h, y, lg - 1);
    auto c2 = all_tree_costs(lc, lambda, x, y + h, lg - 1);
    auto c3 = all_tree_costs(lc, lambda, x + h, y + h, lg - 1);
    std::vector<int64_t> out;
    out.reserve(1 + c0.size() * c1.size() * c2.size() * c3.size());
    out.push_back(lambda * 16 + lc.at(lg, x, y));
    for (int64_t a : c0)
        for (int64_t b : c1)
            for (int64_t c : c2)
                for (int64_t dd : c3)
                    out.push_back(lambda * 16 + a + b + c + dd);
    return out;
}

int64_t map_cost(const LeafCosts& lc, const BlockMap& bm, int64_t lambda,
                 int x, int y, int lg) {
    if (lg == kMinBlockLog2) return lc.at(lg, x, y);
    if (!bm.is_split(x, y, lg)) return lambda * 16 + lc.at(lg, x, y);
    int h = 1 << (lg - 1);
    return lambda * 16 + map_cost(lc, bm, lambda, x, y, lg - 1) +
           map_cost(lc, bm, lambda, x + h, y, lg - 1) +
           map_cost(lc, bm, lambda, x, y + h, lg - 1) +
           map_cost(lc, bm, lambda, x + h, y + h, lg - 1);
}

bool crit_partition(std::string& detail) {
    Lcg rng(707);
    for (int it = 0; it < 20; ++it) {
        LeafCosts lc;
        lc.pw = lc.ph = 32;
        for (int lg = kMinBlockLog2; lg <= kSbLog2; ++lg) {
            int bw = 32 >> lg;
            lc.cost[lg - 2].resize(size_t(bw) * bw);
            for (auto& v : lc.cost[lg - 2]) v = int64_t(rng.next() % 100000);
        }
        for (int64_t lambda : {int64_t(1), int64_t(9), int64_t(512)}) {
            BlockMap bm = choose_partition(lc, lambda);
            auto costs = all_tree_costs(lc, lambda, 0, 0, kSbLog2);
            int64_t best = *std::min_element(costs.begin(), costs.end());
            if (map_cost(lc, bm, lambda, 0, 0, kSbLog2) != best) {
                detail = "suboptimal tree on table " + std::to_string(it);
                return false;
            }
        }
    }
    detail = "optimal on 20 tables x 3 lambdas (83522 trees each)";
    return true;
}

// ---------------------------------------------------------------------------
// 8. smoothing weights
// ---------------------------------------------------------------------------

bool crit_smoothing(std::string& detail) {
    for (int q : {1, 12, 400})
        for (int alpha : {kSmoothAlphaLuma, kSmoothAlphaChroma})
            if (smooth_weight_q15(q, alpha, 1024, 0) != 32768) {
                detail = "zero fit error must give weight one";
                return false;
            }
    // worked case: weight exactly one half, squared weight one quarter
    int32_t w = smooth_weight_q15(12, 5, 1024, 122880);
    int32_t w2 = int32_t((int64_t(w) * w) >> 15);
    if (w != 16384 || w2 != 8192) {
        detail = "half-weight case off: w=" + std::to_string(w);
        return false;
    }
    Lcg rng(808);
    for (int it = 0; it < 1000; ++it) {
        int px = int(rng.next() % 256), ip = int(rng.next() % 256);
        int32_t ww = smooth_weight_q15(8, 5, 1024, int64_t(rng.next() % 500000));
        int32_t ww2 = int32_t((int64_t(ww) * ww) >> 15);
        int out = px + int((int64_t(ww2) * (ip - px) + 16384) >> 15);
        if (out < std::min(px, ip) || out > std::max(px, ip)) {
            detail = "blend left the convex hull";
            return false;
        }
    }
    detail = "unit cases exact, convex bound on 1000 blends";
    return true;
}

// ---------------------------------------------------------------------------
// 9. end to end on the committed corpus
// ---------------------------------------------------------------------------

bool crit_end_to_end(std::string& detail) {
    const std::string root = LAPPIX_SOURCE_DIR;
    const char* names[5] = {"scene.pgm", "texture.pgm", "color.ppm",
                            "frame420.y4m", "detail444.y4m"};
    std::map<std::string, std::string> hashes;
    {
        std::ifstream hf(root + "/tests/golden/hashes.tsv");
        if (!hf) {
            detail = "missing golden hashes";
            return false;
        }
        std::string img, pl, hx;
        int q;
        while (hf >> img >> q >> pl >> hx)
            hashes[img + "/" + std::to_string(q) + "/" + pl] = hx;
    }
    for (const char* name : names) {
        Image img = read_image(root + "/tests/data/" + name);
        std::string base(name);
        base = base.substr(0, base.find('.'));
        double prev = -1;
        for (int q : {128, 32, 8}) {
            std::string lpx = root + "/tests/golden/" + base + "_q" +
                              std::to_string(q) + ".lpx";
            std::vector<uint8_t> golden = read_file(lpx);
            EncodeParams par;
            par.q = q;
            if (encode_image(img, par) != golden) {
                detail = std::string("re-encode differs from golden ") + base +
                         " q" + std::to_string(q);
                return false;
            }
            Image dec = decode_stream(golden);
            const char* pn[3] = {"y", "cb", "cr"};
            for (int p = 0; p < dec.num_planes(); ++p) {
                std::vector<uint8_t> bytes;
                for (int32_t v : dec.plane(p).v) bytes.push_back(uint8_t(v));
                char hx[17];
                std::snprintf(hx, sizeof hx, "%016llx",
                              (unsigned long long)fnv1a64(bytes.data(),
                                                          bytes.size()));
                if (hashes[std::string(name) + "/" + std::to_string(q) + "/" +
                           pn[p]] != hx) {
                    detail = std::string("decoded hash differs for ") + name;
                    return false;
                }
            }
            double db = psnr(dec, img).all;
            if (db < prev) {  // finer quantizer must not lose quality
                detail = std::string("quality regressed on ") + name;
                return false;
            }
            prev = db;
        }
    }
    Image gray(256, 256, ChromaFormat::kMono);
    for (auto& v : gray.y.v) v = 128;
    EncodeParams par;
    std::vector<uint8_t> bits = encode_image(gray, par);
    if (bits.size() * 100 >= size_t(256) * 256) {
        detail = "constant image not under 1% of raw";
        return false;
    }
    detail = "5 images x 3 quantizers: golden-exact, quality monotone";
    return true;
}

// ---------------------------------------------------------------------------
// 10. entropy coder
// ---------------------------------------------------------------------------

bool crit_entropy(std::string& detail) {
    const int n = 100000;
    const int counts_w[8] = {100, 40, 20, 10, 5, 3, 2, 1};
    int tot_w = 0;
    for (int w : counts_w) tot_w += w;
    Lcg rng(909);
    std::vector<int> syms(n);
    int64_t hist[8] = {0};
    for (auto& s : syms) {
        int r = int(rng.next() % tot_w), acc = 0;
        for (int k = 0; k < 8; ++k) {
            acc += counts_w[k];
            if (r < acc) {
                s = k;
                break;
            }
        }
        hist[s]++;
    }
    RangeEncoder re;
    AdaptiveModel em(8);
    for (int s : syms) em.encode(re, s);
    std::vector<uint8_t> bytes = re.finish();
    RangeDecoder rd(bytes.data(), bytes.size());
    AdaptiveModel dm(8);
    for (int s : syms)
        if (dm.decode(rd) != s) {
            detail = "round trip mismatch";
            return false;
        }
    double entropy = 0;
    for (int64_t c : hist)
        if (c) entropy -= double(c) / n * std::log2(double(c) / n);
    double bits = 8.0 * double(bytes.size());
    if (bits > 1.02 * entropy * n + 64) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "rate %.4f vs entropy %.4f bits/sym",
                      bits / n, entropy);
        detail = buf;
        return false;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d symbols exact, %.4f vs %.4f bits/sym",
                  n, bits / n, entropy);
    detail = buf;
    return true;
}

}  // namespace

int main() {
    struct Crit {
        const char* name;
        bool (*fn)(std::string&);
    } crits[] = {
        {"transform-reversibility", crit_transform},
        {"pvq-codebook", crit_pvq},
        {"direction-search", crit_direction},
        {"threshold-math", crit_threshold},
        {"dering-efficacy", crit_efficacy},
        {"dering-order-invariance", crit_order},
        {"partition-search-optimal", crit_partition},
        {"smoothing-weights", crit_smoothing},
        {"end-to-end-roundtrip", crit_end_to_end},
        {"entropy-coder", crit_entropy},
    };
    for (const Crit& c : crits) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        report(c.name, ok, detail);
    }
    return g_failures == 0 ? 0 : 1;
}
