#include "lappix/dering.hpp"

#include <algorithm>
#include <cassert>

#include "lappix/common.hpp"
#include "lappix/parallel.hpp"

namespace lappix {

namespace {

// Pixels on the same directional line share one index; 15 indices cover all
// eight direction families on an 8x8 block (i = row, j = column).
inline int line_index(int d, int i, int j) {
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

// 840 / k for k = 1..8; 840 is divisible by every line count, so the score
// sum stays an exact integer.
constexpr int kDiv840[9] = {0, 840, 420, 280, 210, 168, 140, 120, 105};

// First-stage tap offsets (dy, dx) at distances 1..3 along each direction.
// The backward taps are the negations.
constexpr int kTapY[8][3] = {{-1, -2, -3}, {0, -1, -1}, {0, 0, 0},
                             {0, 1, 1},    {1, 2, 3},   {1, 2, 3},
                             {1, 2, 3},    {1, 2, 3}};
constexpr int kTapX[8][3] = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3},
                             {1, 2, 3}, {0, 1, 1}, {0, 0, 0}, {0, -1, -1}};
constexpr int kW1[3] = {3, 2, 2};

// An 8x8 block is exempt only when its own four 4x4 units and the full ring
// of 4x4 units around them are all skipped; out-of-plane ring units count as
// skipped.
bool block_exempt(const ByteMap& skip4, int cx0, int cy0) {
    for (int cy = cy0 - 1; cy < cy0 + 3; ++cy)
        for (int cx = cx0 - 1; cx < cx0 + 3; ++cx) {
            if (cx < 0 || cy < 0 || cx >= skip4.w || cy >= skip4.h) continue;
            if (!skip4.at(cx, cy)) return false;
        }
    return true;
}

}  // namespace

int dering_find_dir(const Plane& p, int x, int y, int64_t s[8]) {
    for (int d = 0; d < 8; ++d) {
        int64_t sum[15] = {};
        int cnt[15] = {};
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                int l = line_index(d, i, j);
                sum[l] += p.at(x + j, y + i);
                ++cnt[l];
            }
        int64_t sc = 0;
        for (int l = 0; l < 15; ++l)
            if (cnt[l]) sc += sum[l] * sum[l] * kDiv840[cnt[l]];
        s[d] = sc;
    }
    int best = 0;
    for (int d = 1; d < 8; ++d)
        if (s[d] > s[best]) best = d;
    return best;
}

int32_t dering_t0_q8(int q) {
    // q^0.842, Q8.
    return int32_t((pow_q16(uint64_t(q), 55181) + 128) >> 8);
}

int32_t dering_td_q8(int32_t t0_q8, int64_t delta, int64_t delta_sb) {
    int64_t f_q16 = 32768;
    if (delta > 0 && delta_sb > 0) {
        // 1.02 * (delta * delta_sb / 840^2)^0.16 in log2 domain.
        int64_t l = log2_q16(uint64_t(delta)) + log2_q16(uint64_t(delta_sb)) -
                    2 * log2_q16(840);
        f_q16 = exp2_q16((l * 10486 >> 16) + 1872);
        f_q16 = std::max<int64_t>(32768, std::min<int64_t>(196608, f_q16));
    }
    return int32_t((int64_t(t0_q8) * f_q16 + 32768) >> 16);
}

void dering_plane(const Plane& src, Plane& dst, const ByteMap& skip4,
                  const std::vector<uint8_t>& sb_on, int sb, int q,
                  std::vector<DeringBlockInfo>* info) {
    assert(&src != &dst);
    assert(src.w % sb == 0 && src.h % sb == 0);
    dst = src;
    const int bw = src.w / 8;
    if (info) info->assign(size_t(bw) * (src.h / 8), DeringBlockInfo{});
    const int sbw = src.w / sb, sbh = src.h / sb;
    const int nb = sb / 8;
    const int32_t t0 = dering_t0_q8(q);

    parallel_for(sbw * sbh, [&](int sbi) {
        const int sbx = (sbi % sbw) * sb, sby = (sbi / sbw) * sb;
        std::vector<int> dir(nb * nb);
        std::vector<int64_t> delta(nb * nb);
        std::vector<int32_t> td(nb * nb);
        std::vector<uint8_t> exempt(nb * nb);
        int64_t dsum = 0;
        for (int by = 0; by < nb; ++by)
            for (int bx = 0; bx < nb; ++bx) {
                int64_t s[8];
                int b = by * nb + bx;
                dir[b] = dering_find_dir(src, sbx + bx * 8, sby + by * 8, s);
                delta[b] = s[dir[b]] - s[(dir[b] + 4) & 7];
                dsum += delta[b];
                exempt[b] = block_exempt(skip4, (sbx + bx * 8) / 4,
                                         (sby + by * 8) / 4);
            }
        // The superblock strength uses the unconditional mean over all its
        // blocks, exempt ones included.
        int64_t dsb = div_round(dsum, nb * nb);
        for (int b = 0; b < nb * nb; ++b)
            td[b] = dering_td_q8(t0, delta[b], dsb);
        if (info)
            for (int by = 0; by < nb; ++by)
                for (int bx = 0; bx < nb; ++bx) {
                    int b = by * nb + bx;
                    (*info)[size_t(sby / 8 + by) * bw + (sbx / 8 + bx)] =
                        DeringBlockInfo{dir[b], delta[b], td[b]};
                }
        if (!sb_on[sbi]) return;

        // Stage 1 writes a private superblock buffer so stage 2 can mix
        // filtered pixels inside the superblock with untouched neighbors.
        std::vector<int32_t> buf(size_t(sb) * sb);
        for (int y = 0; y < sb; ++y)
            for (int x = 0; x < sb; ++x)
                buf[size_t(y) * sb + x] = src.at(sbx + x, sby + y);
        for (int by = 0; by < nb; ++by)
            for (int bx = 0; bx < nb; ++bx) {
                int b = by * nb + bx;
                if (exempt[b]) continue;
                int d = dir[b];
                for (int i = 0; i < 8; ++i)
                    for (int j = 0; j < 8; ++j) {
                        int px = sbx + bx * 8 + j, py = sby + by * 8 + i;
                        int32_t x = src.at(px, py);
                        int32_t acc = 0;
                        for (int k = 0; k < 3; ++k) {
                            int fy = py + kTapY[d][k], fx = px + kTapX[d][k];
                            if (fx >= 0 && fy >= 0 && fx < src.w && fy < src.h)
                                acc += kW1[k] *
                                       dering_thresh(src.at(fx, fy) - x, td[b]);
                            int gy = py - kTapY[d][k], gx = px - kTapX[d][k];
                            if (gx >= 0 && gy >= 0 && gx < src.w && gy < src.h)
                                acc += kW1[k] *
                                       dering_thresh(src.at(gx, gy) - x, td[b]);
                        }
                        buf[size_t(py - sby) * sb + (px - sbx)] =
                            x + ((acc + 8) >> 4);
                    }
            }

        // Stage 2 runs across the detected direction with a cap tied to how
        // much stage 1 already moved the pixel.
        for (int by = 0; by < nb; ++by)
            for (int bx = 0; bx < nb; ++bx) {
                int b = by * nb + bx;
                if (exempt[b]) continue;
                int sy = dir[b] <= 4 ? 1 : 0, sx = dir[b] <= 4 ? 0 : 1;
                for (int i = 0; i < 8; ++i)
                    for (int j = 0; j < 8; ++j) {
                        int px = sbx + bx * 8 + j, py = sby + by * 8 + i;
                        int32_t x = src.at(px, py);
                        int32_t y1 = buf[size_t(py - sby) * sb + (px - sbx)];
                        int32_t t2 = std::min<int64_t>(
                            td[b], td[b] / 3 + (int64_t(std::abs(y1 - x)) << 8));
                        int32_t acc = 0;
                        for (int k = 1; k <= 2; ++k)
                            for (int sgn = -1; sgn <= 1; sgn += 2) {
                                int fy = py + sgn * k * sy;
                                int fx = px + sgn * k * sx;
                                if (fx < 0 || fy < 0 || fx >= src.w ||
                                    fy >= src.h)
                                    continue;
                                int32_t val;
                                if (fx >= sbx && fx < sbx + sb && fy >= sby &&
                                    fy < sby + sb)
                                    val = buf[size_t(fy - sby) * sb +
                                              (fx - sbx)];
                                else
                                    val = src.at(fx, fy);
                                acc += 3 * dering_thresh(val - y1, t2);
                            }
                        dst.at(px, py) = y1 + ((acc + 8) >> 4);
                    }
            }
    });
}

}  // namespace lappix
