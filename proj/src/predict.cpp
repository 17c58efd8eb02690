#include "lappix/predict.hpp"

#include <cstring>

#include "lappix/common.hpp"

namespace lappix {

bool intra_available(const BlockMap& bm, int x, int y, int lg, IntraMode m) {
    int n = 1 << lg;
    switch (m) {
        case IntraMode::kNone: return true;
        case IntraMode::kH: return x >= n && bm.at_px(x - n, y) == lg;
        case IntraMode::kV: return y >= n && bm.at_px(x, y - n) == lg;
    }
    return false;
}

int32_t dc_predict(const Plane& coeff, const BlockMap& bm, int x, int y,
                   int lg) {
    int n = 1 << lg;
    int64_t sum = 0;
    int cnt = 0;
    if (x >= n && bm.at_px(x - n, y) == lg) sum += coeff.at(x - n, y), ++cnt;
    if (y >= n && bm.at_px(x, y - n) == lg) sum += coeff.at(x, y - n), ++cnt;
    return cnt ? int32_t(div_round(sum, cnt)) : 0;
}

void intra_predict(const Plane& coeff, const BlockMap& bm, int x, int y,
                   int lg, IntraMode m, int32_t* pred) {
    int n = 1 << lg;
    std::memset(pred, 0, sizeof(int32_t) * size_t(n) * n);
    pred[0] = dc_predict(coeff, bm, x, y, lg);
    if (m == IntraMode::kH) {
        for (int i = 1; i < n; ++i) pred[i * n] = coeff.at(x - n, y + i);
    } else if (m == IntraMode::kV) {
        for (int j = 1; j < n; ++j) pred[j] = coeff.at(x + j, y - n);
    }
}

void cfl_reference(const Plane& luma_coeff, int cx, int cy, int lg,
                   bool subsampled, int32_t* ref) {
    int n = 1 << lg;
    int lx = subsampled ? 2 * cx : cx, ly = subsampled ? 2 * cy : cy;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            ref[i * n + j] = luma_coeff.at(lx + j, ly + i);
    ref[0] = 0;
}

}  // namespace lappix
