#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "lappix/codec.hpp"
#include "lappix/dering.hpp"
#include "lappix/parallel.hpp"

using namespace lappix;

namespace {

// Multi-octave value noise: busy enough that every pipeline stage does work.
Image make_image(int w, int h) {
    Image img(w, h, ChromaFormat::k420);
    std::mt19937_64 rng(99);
    std::vector<int> grid(64 * 64);
    for (auto& g : grid) g = int(rng() % 256);
    auto value_at = [&](int x, int y, int scale) {
        int gx = (x / scale) & 63, gy = (y / scale) & 63;
        return grid[size_t(gy) * 64 + gx];
    };
    for (int p = 0; p < 3; ++p) {
        Plane& pl = img.plane(p);
        for (int y = 0; y < pl.h; ++y)
            for (int x = 0; x < pl.w; ++x) {
                int v = (value_at(x, y, 32) * 2 + value_at(x, y, 8) +
                         value_at(x, y, 2)) / 4;
                pl.at(x, y) = clamp_i32(v, 0, 255);
            }
    }
    return img;
}

template <class F>
double time_ms(F&& f, int reps) {
    double best = 1e18;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best,
                        std::chrono::duration<double, std::milli>(t1 - t0)
                            .count());
    }
    return best;
}

}  // namespace

int main() {
    const int w = 1280, h = 720, q = 24;
    Image img = make_image(w, h);
    EncodeParams par;
    par.q = q;
    std::vector<uint8_t> bits = encode_image(img, par);

    Plane pad = pad_plane(img.y, 32);
    ByteMap skip(pad.w / 4, pad.h / 4, 0);
    std::vector<uint8_t> on(size_t(pad.w / 32) * (pad.h / 32), 1);
    Plane dst(pad.w, pad.h);

    struct Row {
        const char* name;
        double serial, parallel;
    } rows[] = {
        {"encode", 0, 0}, {"decode", 0, 0}, {"dering", 0, 0}};

    for (int mode = 0; mode < 2; ++mode) {
        set_parallel(mode == 1);
        double* slot[3] = {mode ? &rows[0].parallel : &rows[0].serial,
                           mode ? &rows[1].parallel : &rows[1].serial,
                           mode ? &rows[2].parallel : &rows[2].serial};
        *slot[0] = time_ms([&] { encode_image(img, par); }, 3);
        *slot[1] = time_ms([&] { decode_stream(bits); }, 3);
        *slot[2] =
            time_ms([&] { dering_plane(pad, dst, skip, on, 32, q, nullptr); },
                    5);
    }
    set_parallel(true);

    // serial and parallel paths must agree bit-exactly
    set_parallel(false);
    std::vector<uint8_t> sb = encode_image(img, par);
    Image sd = decode_stream(sb);
    set_parallel(true);
    std::vector<uint8_t> pb = encode_image(img, par);
    Image pd = decode_stream(pb);
    bool same = sb == pb && sd.y.v == pd.y.v && sd.cb.v == pd.cb.v &&
                sd.cr.v == pd.cr.v;

    std::printf("%dx%d 4:2:0, q=%d, %zu bytes coded\n", w, h, q, bits.size());
    std::printf("%-8s %10s %10s %8s\n", "stage", "serial", "openmp",
                "speedup");
    for (const Row& r : rows)
        std::printf("%-8s %8.1fms %8.1fms %7.2fx\n", r.name, r.serial,
                    r.parallel, r.serial / r.parallel);
    std::printf("serial/parallel outputs identical: %s\n",
                same ? "yes" : "NO");
    return same ? 0 : 1;
}
