#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "lappix/image.hpp"

namespace lappix {

// Directional deringing filter. Directions are estimated per 8x8 block by
// maximizing the 840-scaled line-sum score; the filter then averages along
// the detected direction with hard thresholding, plus a weaker second stage
// across it.

struct DeringBlockInfo {
    int dir = 0;
    int64_t delta = 0;   // s[dir] - s[dir+4 mod 8], 840-scaled
    int32_t td_q8 = 0;   // applied threshold
};

// Per-cell boolean map (granularity chosen by the caller).
struct ByteMap {
    int w = 0, h = 0;
    std::vector<uint8_t> v;
    ByteMap() = default;
    ByteMap(int width, int height, uint8_t fill)
        : w(width), h(height), v(size_t(width) * height, fill) {}
    uint8_t at(int x, int y) const { return v[size_t(y) * w + x]; }
    void set(int x, int y, uint8_t val) { v[size_t(y) * w + x] = val; }
};

// Direction search on the 8x8 block at (x, y). Fills s[8] with the scores.
int dering_find_dir(const Plane& p, int x, int y, int64_t s[8]);

// Base threshold from the quantizer, Q8.
int32_t dering_t0_q8(int q);
// Block threshold from the base and the 840-scaled block/superblock deltas.
int32_t dering_td_q8(int32_t t0_q8, int64_t delta, int64_t delta_sb);

// Hard shrink: keep d when |d| (pixel units) is strictly below t_q8.
inline int32_t dering_thresh(int32_t d, int32_t t_q8) {
    return (int64_t(std::abs(d)) << 8) < t_q8 ? d : 0;
}

// Filters src into dst (same dims, padded to superblock multiples).
// skip4: per-4x4 skip flags for this plane; an 8x8 block is left untouched
// only when every 4x4 in it and a 4-pixel ring around it is skipped.
// sb_on: per-superblock enable flags, raster order.
// sb: superblock pixel size for this plane. q: header quantizer.
// info: optional per-8x8 raster output (for analysis dumps).
void dering_plane(const Plane& src, Plane& dst, const ByteMap& skip4,
                  const std::vector<uint8_t>& sb_on, int sb, int q,
                  std::vector<DeringBlockInfo>* info);

}  // namespace lappix
