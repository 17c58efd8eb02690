#include "lappix/smooth.hpp"

#include <vector>

#include "lappix/common.hpp"
#include "lappix/parallel.hpp"

namespace lappix {

int32_t smooth_weight_q15(int q, int alpha, int npx, int64_t sse) {
    if (sse <= 0) return 32768;
    int64_t num = int64_t(alpha) * q * q * npx << 15;
    int64_t w = num / (12 * sse);
    return int32_t(w > 32768 ? 32768 : w);
}

void smooth_plane(Plane& p, const BlockMap& bm, int sb, int q, int alpha) {
    const int sbw = p.w / sb, sbh = p.h / sb;
    const int s1 = sb - 1;
    const int64_t den = int64_t(s1) * s1;
    int sb_log2 = 0;
    while ((1 << sb_log2) < sb) ++sb_log2;

    parallel_for(sbw * sbh, [&](int sbi) {
        const int x0 = (sbi % sbw) * sb, y0 = (sbi / sbw) * sb;
        if (bm.is_split(x0, y0, sb_log2)) return;
        const int64_t c00 = p.at(x0, y0), c10 = p.at(x0 + s1, y0);
        const int64_t c01 = p.at(x0, y0 + s1), c11 = p.at(x0 + s1, y0 + s1);
        std::vector<int32_t> interp(size_t(sb) * sb);
        int64_t sse = 0;
        for (int dy = 0; dy < sb; ++dy)
            for (int dx = 0; dx < sb; ++dx) {
                int64_t num = c00 * (s1 - dx) * (s1 - dy) +
                              c10 * dx * (s1 - dy) + c01 * (s1 - dx) * dy +
                              c11 * dx * dy;
                int32_t ip = int32_t(div_round(num, den));
                interp[size_t(dy) * sb + dx] = ip;
                int64_t d = p.at(x0 + dx, y0 + dy) - ip;
                sse += d * d;
            }
        int64_t w = smooth_weight_q15(q, alpha, sb * sb, sse);
        int64_t w2 = w * w >> 15;
        if (w2 == 0) return;
        for (int dy = 0; dy < sb; ++dy)
            for (int dx = 0; dx < sb; ++dx) {
                int32_t& px = p.at(x0 + dx, y0 + dy);
                int64_t d = interp[size_t(dy) * sb + dx] - px;
                px += int32_t((w2 * d + 16384) >> 15);
            }
    });
}

}  // namespace lappix
