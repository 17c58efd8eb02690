#pragma once

#include <cstdint>

#include "lappix/image.hpp"
#include "lappix/partition.hpp"

namespace lappix {

// Unsignaled smoothing of unsplit superblocks: fit the bilinear surface
// through the four corner pixels and blend toward it when the fit error is
// small relative to the quantizer. Runs identically in encoder and decoder,
// so it costs no bits.

inline constexpr int kSmoothAlphaLuma = 5;
inline constexpr int kSmoothAlphaChroma = 20;

// Blend weight in Q15 from the bilinear fit error over one superblock.
// npx is the superblock pixel count; sse the summed squared fit error.
int32_t smooth_weight_q15(int q, int alpha, int npx, int64_t sse);

// bm is this plane's leaf map; sb its superblock pixel size (a power of 2).
void smooth_plane(Plane& p, const BlockMap& bm, int sb, int q, int alpha);

}  // namespace lappix
