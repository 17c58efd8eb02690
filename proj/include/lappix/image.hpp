#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lappix/common.hpp"

namespace lappix {

// One sample plane. Samples are int32 so the same storage carries pixels,
// lapped pixels and transform coefficients.
struct Plane {
    int w = 0, h = 0;
    std::vector<int32_t> v;

    Plane() = default;
    Plane(int width, int height, int32_t fill = 0)
        : w(width), h(height), v(size_t(width) * height, fill) {}

    int32_t* row(int y) { return v.data() + size_t(y) * w; }
    const int32_t* row(int y) const { return v.data() + size_t(y) * w; }
    int32_t& at(int x, int y) { return v[size_t(y) * w + x]; }
    int32_t at(int x, int y) const { return v[size_t(y) * w + x]; }
};

enum class ChromaFormat : uint8_t {
    kMono = 0,  // luma only
    k420 = 1,
    k444 = 2,
};

inline int chroma_width(int w, ChromaFormat f) {
    return f == ChromaFormat::k420 ? (w + 1) / 2 : w;
}
inline int chroma_height(int h, ChromaFormat f) {
    return f == ChromaFormat::k420 ? (h + 1) / 2 : h;
}

struct Image {
    int w = 0, h = 0;
    ChromaFormat fmt = ChromaFormat::kMono;
    Plane y, cb, cr;

    Image() = default;
    Image(int width, int height, ChromaFormat f) : w(width), h(height), fmt(f) {
        y = Plane(w, h);
        if (f != ChromaFormat::kMono) {
            cb = Plane(chroma_width(w, f), chroma_height(h, f));
            cr = Plane(chroma_width(w, f), chroma_height(h, f));
        }
    }

    int num_planes() const { return fmt == ChromaFormat::kMono ? 1 : 3; }
    Plane& plane(int i) { return i == 0 ? y : (i == 1 ? cb : cr); }
    const Plane& plane(int i) const { return i == 0 ? y : (i == 1 ? cb : cr); }
};

// Pads a plane to multiples of `mult` by edge replication.
inline Plane pad_plane(const Plane& p, int mult) {
    int pw = (p.w + mult - 1) / mult * mult;
    int ph = (p.h + mult - 1) / mult * mult;
    Plane out(pw, ph);
    for (int y = 0; y < ph; ++y) {
        int sy = y < p.h ? y : p.h - 1;
        const int32_t* src = p.row(sy);
        int32_t* dst = out.row(y);
        for (int x = 0; x < p.w; ++x) dst[x] = src[x];
        for (int x = p.w; x < pw; ++x) dst[x] = src[p.w - 1];
    }
    return out;
}

inline Plane crop_plane(const Plane& p, int w, int h) {
    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        const int32_t* src = p.row(y);
        int32_t* dst = out.row(y);
        for (int x = 0; x < w; ++x) dst[x] = src[x];
    }
    return out;
}

}  // namespace lappix
