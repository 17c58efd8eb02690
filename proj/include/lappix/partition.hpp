#pragma once

#include <cstdint>
#include <vector>

#include "lappix/image.hpp"

namespace lappix {

inline constexpr int kSbLog2 = 5;        // 32x32 luma superblocks
inline constexpr int kMinBlockLog2 = 2;  // 4x4 smallest transform

// Leaf-size map at 4x4 cell granularity: each cell stores log2 of the
// transform block covering it. A node is split iff the stored size at its
// top-left cell is smaller than the node.
struct BlockMap {
    int w4 = 0, h4 = 0;  // padded plane dims / 4
    std::vector<uint8_t> lg;

    BlockMap() = default;
    BlockMap(int pw, int ph, uint8_t fill)
        : w4(pw >> 2), h4(ph >> 2), lg(size_t(w4) * h4, fill) {}

    uint8_t at4(int x4, int y4) const { return lg[size_t(y4) * w4 + x4]; }
    uint8_t at_px(int x, int y) const { return at4(x >> 2, y >> 2); }

    void set_leaf(int x, int y, int size_log2) {
        int n4 = 1 << (size_log2 - 2);
        for (int j = 0; j < n4; ++j)
            for (int i = 0; i < n4; ++i)
                lg[size_t((y >> 2) + j) * w4 + (x >> 2) + i] = uint8_t(size_log2);
    }

    bool is_split(int x, int y, int size_log2) const {
        return at_px(x, y) < size_log2;
    }
};

// Chroma map for 4:2:0: sizes halve, clamped at 4x4.
inline BlockMap chroma_map_420(const BlockMap& luma) {
    BlockMap cm(luma.w4 * 4 / 2, luma.h4 * 4 / 2, kMinBlockLog2);
    for (int y4 = 0; y4 < cm.h4; ++y4)
        for (int x4 = 0; x4 < cm.w4; ++x4) {
            int l = luma.at4(x4 * 2, y4 * 2);
            cm.lg[size_t(y4) * cm.w4 + x4] =
                uint8_t(l > kMinBlockLog2 ? l - 1 : kMinBlockLog2);
        }
    return cm;
}

// Depth-first leaf walk of one superblock, children in raster order.
// f(x, y, size_log2) with pixel coordinates in the padded plane.
template <class F>
void walk_leaves(const BlockMap& bm, int x, int y, int size_log2, F&& f) {
    if (bm.is_split(x, y, size_log2)) {
        int h = 1 << (size_log2 - 1);
        walk_leaves(bm, x, y, size_log2 - 1, f);
        walk_leaves(bm, x + h, y, size_log2 - 1, f);
        walk_leaves(bm, x, y + h, size_log2 - 1, f);
        walk_leaves(bm, x + h, y + h, size_log2 - 1, f);
    } else {
        f(x, y, size_log2);
    }
}

}  // namespace lappix
