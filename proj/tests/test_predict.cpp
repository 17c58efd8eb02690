#include <random>

#include "doctest.h"
#include "lappix/predict.hpp"

using namespace lappix;

namespace {

Plane coeff_plane(int w, int h, uint32_t seed) {
    Plane p(w, h);
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int32_t> d(-900, 900);
    for (auto& v : p.v) v = d(rng);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("predict");

TEST_CASE("availability needs an aligned same-size neighbor") {
    BlockMap bm(64, 64, 5);
    bm.set_leaf(0, 0, 4);
    bm.set_leaf(16, 0, 4);
    bm.set_leaf(0, 16, 4);
    bm.set_leaf(16, 16, 3);
    bm.set_leaf(24, 16, 3);
    bm.set_leaf(16, 24, 3);
    bm.set_leaf(24, 24, 3);

    REQUIRE(intra_available(bm, 16, 0, 4, IntraMode::kH));
    REQUIRE(intra_available(bm, 0, 16, 4, IntraMode::kV));
    REQUIRE(intra_available(bm, 0, 0, 4, IntraMode::kNone));
    // Plane edges have no neighbor.
    REQUIRE(!intra_available(bm, 0, 0, 4, IntraMode::kH));
    REQUIRE(!intra_available(bm, 0, 0, 4, IntraMode::kV));
    // Left of (16,16) is a 16 leaf but (16,16) itself is 8: size mismatch.
    REQUIRE(!intra_available(bm, 16, 16, 3, IntraMode::kH));
    REQUIRE(!intra_available(bm, 16, 16, 3, IntraMode::kV));
    // Cross-superblock: the split first superblock disqualifies kH at 32,
    // while untouched superblocks qualify.
    REQUIRE(!intra_available(bm, 32, 0, 5, IntraMode::kH));
    REQUIRE(intra_available(bm, 32, 32, 5, IntraMode::kV));
    REQUIRE(intra_available(bm, 32, 32, 5, IntraMode::kH));
    BlockMap un(64, 64, 5);
    REQUIRE(intra_available(un, 32, 0, 5, IntraMode::kH));
    REQUIRE(!intra_available(un, 32, 0, 5, IntraMode::kV));
}

TEST_CASE("dc prediction averages available neighbors") {
    BlockMap bm(32, 32, 3);  // uniform 8x8 leaves
    Plane c(32, 32, 0);
    c.at(0, 0) = 60;  // DC of block (0,0)
    c.at(8, 0) = 3;   // DC of block (8,0)
    c.at(0, 8) = 4;   // DC of block (0,8)
    REQUIRE(dc_predict(c, bm, 0, 0, 3) == 0);    // corner: nothing coded yet
    REQUIRE(dc_predict(c, bm, 8, 0, 3) == 60);   // left only
    REQUIRE(dc_predict(c, bm, 0, 8, 3) == 60);   // above only
    // both neighbors: mean rounds ties away from zero (3+4)/2 -> 4
    REQUIRE(dc_predict(c, bm, 8, 8, 3) == 4);
    c.at(8, 0) = -3;
    c.at(0, 8) = -4;
    REQUIRE(dc_predict(c, bm, 8, 8, 3) == -4);
    // size mismatch disqualifies a neighbor
    BlockMap mixed(32, 32, 3);
    mixed.set_leaf(0, 0, 2);
    mixed.set_leaf(4, 0, 2);
    mixed.set_leaf(0, 4, 2);
    mixed.set_leaf(4, 4, 2);
    REQUIRE(dc_predict(c, mixed, 8, 0, 3) == 0);  // left is split into 4s
    REQUIRE(dc_predict(c, mixed, 0, 8, 3) == 0);  // above split, left off-plane
}

TEST_CASE("H and V copy one coefficient lane from the neighbor") {
    BlockMap bm(32, 32, 3);
    Plane c = coeff_plane(32, 32, 9);
    int32_t pred[64];
    intra_predict(c, bm, 8, 8, 3, IntraMode::kH, pred);
    REQUIRE(pred[0] == dc_predict(c, bm, 8, 8, 3));
    for (int i = 1; i < 8; ++i) {
        REQUIRE(pred[i * 8] == c.at(0, 8 + i));
        for (int j = 1; j < 8; ++j) REQUIRE(pred[i * 8 + j] == 0);
    }
    intra_predict(c, bm, 8, 8, 3, IntraMode::kV, pred);
    for (int j = 1; j < 8; ++j) {
        REQUIRE(pred[j] == c.at(8 + j, 0));
        for (int i = 1; i < 8; ++i) REQUIRE(pred[i * 8 + j] == 0);
    }
    intra_predict(c, bm, 8, 8, 3, IntraMode::kNone, pred);
    for (int i = 1; i < 64; ++i) REQUIRE(pred[i] == 0);
}

TEST_CASE("cfl reads the co-located luma window") {
    Plane luma = coeff_plane(64, 64, 11);
    int32_t ref[256];
    cfl_reference(luma, 8, 12, 3, true, ref);
    REQUIRE(ref[0] == 0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            if (i || j) REQUIRE(ref[i * 8 + j] == luma.at(16 + j, 24 + i));
    cfl_reference(luma, 16, 8, 4, false, ref);
    REQUIRE(ref[0] == 0);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            if (i || j) REQUIRE(ref[i * 16 + j] == luma.at(16 + j, 8 + i));
}

TEST_SUITE_END();
