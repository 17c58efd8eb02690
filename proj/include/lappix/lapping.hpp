#pragma once

#include "lappix/image.hpp"
#include "lappix/partition.hpp"

namespace lappix {

enum class LapMode : uint8_t {
    k4 = 0,  // 4-point filters on every edge
    k8 = 1,  // 8-point on superblock lines and crosses of nodes >= 16
};

// In-place lapped-transform prefilter over a padded plane. Edges are
// processed in normative order: all vertical superblock lines, all
// horizontal superblock lines, then per-superblock interior crosses in
// depth-first pre-order (vertical segment before horizontal). The image
// outer boundary is never filtered. force4 selects 4-point filters on all
// edges regardless of mode (subsampled chroma).
void prefilter_plane(Plane& p, const BlockMap& bm, int sb_log2, LapMode mode,
                     bool force4);

// Exact inverse of prefilter_plane (same arguments, reversed order).
void postfilter_plane(Plane& p, const BlockMap& bm, int sb_log2, LapMode mode,
                      bool force4);

// Single-edge filters, exposed for tests. k is the filter half-length
// (2 or 4); a vertical edge at x touches columns [x-k, x+k).
void filter_edge_v(Plane& p, int x, int y0, int len, int k, bool inverse);
void filter_edge_h(Plane& p, int x0, int y, int len, int k, bool inverse);

}  // namespace lappix
