#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lappix/dering.hpp"
#include "lappix/image.hpp"
#include "lappix/lapping.hpp"
#include "lappix/partition.hpp"

namespace lappix {

inline constexpr int kMaxQ = 512;

struct EncodeParams {
    int q = 32;
    LapMode lap = LapMode::k4;  // 4-point everywhere; k8 is the legacy mode
    bool dering = true;
    bool smooth = true;
};

// Encoder-side observables for analysis dumps and tests.
struct EncodeStats {
    BlockMap luma_map;
    std::vector<uint8_t> dering_flags;
    std::vector<DeringBlockInfo> dering_luma;
    Image recon;  // exact decoder output for this stream
};

// Decoder-side observables, filled as the stream is parsed.
struct DecodeStats {
    int q = 0;
    ChromaFormat fmt = ChromaFormat::kMono;
    LapMode lap = LapMode::k4;
    bool dering = false;
    bool smooth = false;
    BlockMap luma_map;
    std::vector<uint8_t> dering_flags;
    std::vector<DeringBlockInfo> dering_luma;  // empty when dering is off
};

std::vector<uint8_t> encode_image(const Image& img, const EncodeParams& par,
                                  EncodeStats* stats = nullptr);
Image decode_stream(const std::vector<uint8_t>& data,
                    DecodeStats* stats = nullptr);

// Peak signal-to-noise ratio per plane and over all samples; identical
// planes report infinity.
struct PsnrResult {
    double plane[3] = {0, 0, 0};
    double all = 0;
    int num_planes = 1;
};
PsnrResult psnr(const Image& a, const Image& b);

// Rate-distortion weight for a given quantizer.
int64_t rd_lambda(int q);

// Leaf coding costs for every block position and size over a padded plane.
struct LeafCosts {
    int pw = 0, ph = 0;
    std::array<std::vector<int64_t>, 4> cost;  // index: size log2 - 2

    int64_t at(int lg, int x, int y) const {
        return cost[lg - 2][size_t(y >> lg) * (pw >> lg) + (x >> lg)];
    }
    int64_t& at(int lg, int x, int y) {
        return cost[lg - 2][size_t(y >> lg) * (pw >> lg) + (x >> lg)];
    }
};

// Reference-free leaf costs over the centered padded plane: each size is
// evaluated under the lapping state implied by its own uniform partition,
// which matches the per-leaf state of any tree containing that leaf.
LeafCosts compute_leaf_costs(const Plane& centered, LapMode lap, bool force4,
                             int q);

// Quadtree DP over a cost table. Charges lambda*16 per split flag, prefers
// the larger leaf on ties; minimum equals an exhaustive tree search.
BlockMap choose_partition(const LeafCosts& lc, int64_t lambda);

}  // namespace lappix
