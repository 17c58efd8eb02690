#include <random>
#include <vector>

#include "doctest.h"
#include "lappix/parallel.hpp"
#include "lappix/smooth.hpp"

using namespace lappix;

namespace {

// Exact bilinear surface over 32x32 tiles; reproduced exactly by corner
// interpolation, so the fit error is zero.
Plane ramp_plane(int w, int h) {
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            p.at(x, y) = 40 + 2 * (x & 31) + 3 * (y & 31) + (x & 31) * (y & 31);
    return p;
}

double mse(const Plane& a, const Plane& b) {
    double s = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s / double(a.v.size());
}

}  // namespace

TEST_SUITE_BEGIN("smooth");

TEST_CASE("weight formula hits the worked example exactly") {
    // q=12, alpha=5, 1024 pixels, mean squared error 120 -> w = 1/2.
    REQUIRE(smooth_weight_q15(12, 5, 1024, 120 * 1024) == 16384);
    REQUIRE(smooth_weight_q15(12, 5, 1024, 0) == 32768);
    REQUIRE(smooth_weight_q15(12, 5, 1024, int64_t(1) << 40) == 0);
    // Saturates once the fit error is small enough.
    REQUIRE(smooth_weight_q15(512, 5, 1024, 1) == 32768);
    // Monotone in the error.
    int32_t prev = 32768;
    for (int64_t sse = 1; sse < (int64_t(1) << 30); sse *= 7) {
        int32_t w = smooth_weight_q15(64, 5, 1024, sse);
        REQUIRE(w <= prev);
        prev = w;
    }
    // Chroma weighting is exactly four times stronger below the cap.
    REQUIRE(smooth_weight_q15(12, 20, 1024, 120 * 4 * 1024) ==
            smooth_weight_q15(12, 5, 1024, 120 * 1024));
}

TEST_CASE("exact bilinear content is a fixed point") {
    Plane p = ramp_plane(64, 32);
    Plane orig = p;
    BlockMap bm(64, 32, 5);
    smooth_plane(p, bm, 32, 300, kSmoothAlphaLuma);
    REQUIRE(p.v == orig.v);
}

TEST_CASE("worked example block adjusts by exactly minus four") {
    // 480 interior pixels off by +16: sse = 480*256 = 120*1024, so w2 = 1/4
    // and each off pixel moves by (8192*-16 + 16384) >> 15 = -4.
    Plane p = ramp_plane(32, 32);
    Plane base = p;
    int placed = 0;
    for (int y = 1; y < 31 && placed < 480; ++y)
        for (int x = 1; x < 31 && placed < 480; ++x) {
            p.at(x, y) += 16;
            ++placed;
        }
    REQUIRE(placed == 480);
    BlockMap bm(32, 32, 5);
    smooth_plane(p, bm, 32, 12, 5);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            int32_t want = base.at(x, y);
            if (p.at(x, y) != want) REQUIRE(p.at(x, y) == want + 16 - 4);
        }
    // And the bumped pixels really did move: count them.
    int moved = 0;
    for (size_t i = 0; i < p.v.size(); ++i) moved += p.v[i] != base.v[i];
    REQUIRE(moved == 480);
}

TEST_CASE("split superblocks are never touched") {
    Plane p = ramp_plane(32, 32);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int32_t> n(-9, 9);
    for (auto& v : p.v) v += n(rng);
    Plane orig = p;
    BlockMap bm(32, 32, 5);
    bm.set_leaf(0, 0, 4);  // splitting one child marks the root split
    bm.set_leaf(16, 0, 4);
    bm.set_leaf(0, 16, 4);
    bm.set_leaf(16, 16, 4);
    smooth_plane(p, bm, 32, 300, kSmoothAlphaLuma);
    REQUIRE(p.v == orig.v);
}

TEST_CASE("pulls noisy gradients toward the surface") {
    Plane clean = ramp_plane(64, 64);
    Plane p = clean;
    std::mt19937 rng(5);
    std::uniform_int_distribution<int32_t> n(-6, 6);
    for (auto& v : p.v) v += n(rng);
    BlockMap bm(64, 64, 5);
    double before = mse(p, clean);
    smooth_plane(p, bm, 32, 200, kSmoothAlphaLuma);
    REQUIRE(mse(p, clean) < 0.6 * before);
}

TEST_CASE("serial and parallel paths agree") {
    Plane p = ramp_plane(96, 64);
    std::mt19937 rng(8);
    std::uniform_int_distribution<int32_t> n(-5, 5);
    for (auto& v : p.v) v += n(rng);
    Plane a = p, b = p;
    BlockMap bm(96, 64, 5);
    set_parallel(false);
    smooth_plane(a, bm, 32, 100, kSmoothAlphaLuma);
    set_parallel(true);
    smooth_plane(b, bm, 32, 100, kSmoothAlphaLuma);
    REQUIRE(a.v == b.v);
}

TEST_SUITE_END();
