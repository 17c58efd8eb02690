#include "lappix/lapping.hpp"

#include "lappix/parallel.hpp"

namespace lappix {

namespace {

// Det-1 lifting filters on the mirrored-difference lanes, tuned offline for
// AR(1) coding gain. Q14.
inline int32_t lt(int32_t v, int32_t c) {
    return int32_t((int64_t(v) * c + (1 << 13)) >> 14);
}

void lap4(int32_t* q[4], bool inverse) {
    // q = [a0 a1 | b0 b1] across the edge; pairs (a0,b1), (a1,b0)
    int32_t d0 = *q[0] - *q[3];
    int32_t s0 = *q[3] + (d0 >> 1);
    int32_t d1 = *q[1] - *q[2];
    int32_t s1 = *q[2] + (d1 >> 1);
    if (!inverse) {
        d1 += lt(d0, 1966);
        d0 += lt(d1, -1802);
        d1 += lt(d0, 6554);
    } else {
        d1 -= lt(d0, 6554);
        d0 -= lt(d1, -1802);
        d1 -= lt(d0, 1966);
    }
    *q[3] = s0 - (d0 >> 1);
    *q[0] = d0 + *q[3];
    *q[2] = s1 - (d1 >> 1);
    *q[1] = d1 + *q[2];
}

void lap8(int32_t* q[8], bool inverse) {
    int32_t d[4], s[4];
    for (int j = 0; j < 4; ++j) {
        d[j] = *q[j] - *q[7 - j];
        s[j] = *q[7 - j] + (d[j] >> 1);
    }
    static constexpr int kSeq[8][3] = {
        {1, 0, 3277},  {0, 1, 2458},  {3, 2, 6554},  {2, 3, -3277},
        {2, 0, 4915},  {3, 1, 5734},  {0, 2, -4096}, {1, 3, -3277},
    };
    if (!inverse) {
        for (const auto& e : kSeq) d[e[0]] += lt(d[e[1]], e[2]);
    } else {
        for (int i = 7; i >= 0; --i) d[kSeq[i][0]] -= lt(d[kSeq[i][1]], kSeq[i][2]);
    }
    for (int j = 0; j < 4; ++j) {
        *q[7 - j] = s[j] - (d[j] >> 1);
        *q[j] = d[j] + *q[7 - j];
    }
}

int cross_half_len(int node_log2, LapMode mode, bool force4) {
    if (force4 || mode == LapMode::k4) return 2;
    return node_log2 - 1 >= 3 ? 4 : 2;  // child blocks >= 8 get 8-point
}

int line_half_len(LapMode mode, bool force4) {
    return (force4 || mode == LapMode::k4) ? 2 : 4;
}

template <class F>
void walk_crosses_pre(const BlockMap& bm, int x, int y, int lg, F&& f) {
    if (!bm.is_split(x, y, lg)) return;
    int h = 1 << (lg - 1);
    f(x, y, lg);
    walk_crosses_pre(bm, x, y, lg - 1, f);
    walk_crosses_pre(bm, x + h, y, lg - 1, f);
    walk_crosses_pre(bm, x, y + h, lg - 1, f);
    walk_crosses_pre(bm, x + h, y + h, lg - 1, f);
}

template <class F>
void walk_crosses_post(const BlockMap& bm, int x, int y, int lg, F&& f) {
    if (!bm.is_split(x, y, lg)) return;
    int h = 1 << (lg - 1);
    walk_crosses_post(bm, x + h, y + h, lg - 1, f);
    walk_crosses_post(bm, x, y + h, lg - 1, f);
    walk_crosses_post(bm, x + h, y, lg - 1, f);
    walk_crosses_post(bm, x, y, lg - 1, f);
    f(x, y, lg);
}

void cross_filter(Plane& p, int x, int y, int lg, LapMode mode, bool force4,
                  bool inverse) {
    int size = 1 << lg;
    int half = size >> 1;
    int k = cross_half_len(lg, mode, force4);
    if (!inverse) {
        filter_edge_v(p, x + half, y, size, k, false);
        filter_edge_h(p, x, y + half, size, k, false);
    } else {
        filter_edge_h(p, x, y + half, size, k, true);
        filter_edge_v(p, x + half, y, size, k, true);
    }
}

void run_filter(Plane& p, const BlockMap& bm, int sb_log2, LapMode mode,
                bool force4, bool inverse) {
    int sb = 1 << sb_log2;
    int lk = line_half_len(mode, force4);
    int nvx = p.w / sb - 1;  // interior vertical superblock lines
    int nvy = p.h / sb - 1;
    int sbs_x = p.w / sb, sbs_y = p.h / sb;

    auto vlines = [&] {
        parallel_for(nvx, [&](int i) {
            filter_edge_v(p, (i + 1) * sb, 0, p.h, lk, inverse);
        });
    };
    auto hlines = [&] {
        parallel_for(nvy, [&](int i) {
            filter_edge_h(p, 0, (i + 1) * sb, p.w, lk, inverse);
        });
    };
    auto crosses = [&] {
        parallel_for(sbs_x * sbs_y, [&](int s) {
            int sx = (s % sbs_x) * sb, sy = (s / sbs_x) * sb;
            if (!inverse) {
                walk_crosses_pre(bm, sx, sy, sb_log2, [&](int x, int y, int lg) {
                    cross_filter(p, x, y, lg, mode, force4, false);
                });
            } else {
                walk_crosses_post(bm, sx, sy, sb_log2, [&](int x, int y, int lg) {
                    cross_filter(p, x, y, lg, mode, force4, true);
                });
            }
        });
    };
    if (!inverse) {
        vlines();
        hlines();
        crosses();
    } else {
        crosses();
        hlines();
        vlines();
    }
}

}  // namespace

void filter_edge_v(Plane& p, int x, int y0, int len, int k, bool inverse) {
    for (int y = y0; y < y0 + len; ++y) {
        int32_t* r = p.row(y);
        if (k == 2) {
            int32_t* q[4] = {r + x - 2, r + x - 1, r + x, r + x + 1};
            lap4(q, inverse);
        } else {
            int32_t* q[8] = {r + x - 4, r + x - 3, r + x - 2, r + x - 1,
                             r + x,     r + x + 1, r + x + 2, r + x + 3};
            lap8(q, inverse);
        }
    }
}

void filter_edge_h(Plane& p, int x0, int y, int len, int k, bool inverse) {
    for (int x = x0; x < x0 + len; ++x) {
        if (k == 2) {
            int32_t* q[4] = {&p.at(x, y - 2), &p.at(x, y - 1), &p.at(x, y),
                             &p.at(x, y + 1)};
            lap4(q, inverse);
        } else {
            int32_t* q[8] = {&p.at(x, y - 4), &p.at(x, y - 3), &p.at(x, y - 2),
                             &p.at(x, y - 1), &p.at(x, y),     &p.at(x, y + 1),
                             &p.at(x, y + 2), &p.at(x, y + 3)};
            lap8(q, inverse);
        }
    }
}

void prefilter_plane(Plane& p, const BlockMap& bm, int sb_log2, LapMode mode,
                     bool force4) {
    run_filter(p, bm, sb_log2, mode, force4, false);
}

void postfilter_plane(Plane& p, const BlockMap& bm, int sb_log2, LapMode mode,
                      bool force4) {
    run_filter(p, bm, sb_log2, mode, force4, true);
}

}  // namespace lappix
