#include <cstdio>
#include <string>
#include <vector>

#include "lappix/codec.hpp"
#include "lappix/io.hpp"

// Regenerates the committed test corpus: five deterministic images with
// natural-looking multi-scale content, their coded streams at three
// quantizers, and the decoded-plane digests. Integer math only, so the
// bytes are identical on every platform.

using namespace lappix;

namespace {

struct Lcg {
    uint64_t s;
    explicit Lcg(uint64_t seed) : s(seed) {}
    uint32_t next() {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return uint32_t(s >> 33);
    }
};

// Smooth value noise: random lattice + integer bilinear interpolation.
struct ValueNoise {
    std::vector<int> lat;
    int lw, lh;
    ValueNoise(int w, int h, int cell, uint64_t seed)
        : lw(w / cell + 2), lh(h / cell + 2) {
        Lcg rng(seed);
        lat.resize(size_t(lw) * lh);
        for (auto& v : lat) v = int(rng.next() % 256);
        cell_ = cell;
    }
    int at(int x, int y) const {
        int cx = x / cell_, cy = y / cell_;
        int fx = x % cell_, fy = y % cell_;
        int a = lat[size_t(cy) * lw + cx], b = lat[size_t(cy) * lw + cx + 1];
        int c = lat[size_t(cy + 1) * lw + cx];
        int d = lat[size_t(cy + 1) * lw + cx + 1];
        int top = a * (cell_ - fx) + b * fx;
        int bot = c * (cell_ - fx) + d * fx;
        return (top * (cell_ - fy) + bot * fy) / (cell_ * cell_);
    }
    int cell_;
};

Plane natural_plane(int w, int h, uint64_t seed) {
    ValueNoise n32(w, h, 32, seed);
    ValueNoise n8(w, h, 8, seed + 1);
    ValueNoise n2(w, h, 2, seed + 2);
    Plane p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int v = (n32.at(x, y) * 5 + n8.at(x, y) * 2 + n2.at(x, y)) / 8;
            p.at(x, y) = clamp_i32(v, 0, 255);
        }
    return p;
}

void add_disc(Plane& p, int cx, int cy, int r, int delta) {
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r)
                p.at(x, y) = clamp_i32(p.at(x, y) + delta, 0, 255);
}

void add_edge(Plane& p, int pos, bool vertical, int delta) {
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x)
            if ((vertical ? x : y) >= pos)
                p.at(x, y) = clamp_i32(p.at(x, y) + delta, 0, 255);
}

Image fixture(int idx) {
    switch (idx) {
        case 0: {  // smooth mono scene with a hard occluder
            Image img(96, 64, ChromaFormat::kMono);
            img.y = natural_plane(96, 64, 11);
            add_disc(img.y, 30, 28, 14, 55);
            add_edge(img.y, 70, true, -40);
            return img;
        }
        case 1: {  // odd-sized busy mono texture
            Image img(129, 65, ChromaFormat::kMono);
            img.y = natural_plane(129, 65, 23);
            add_disc(img.y, 90, 20, 9, -50);
            return img;
        }
        case 2: {  // color 4:4:4 via ppm
            Image img(75, 50, ChromaFormat::k444);
            img.y = natural_plane(75, 50, 31);
            img.cb = natural_plane(75, 50, 37);
            img.cr = natural_plane(75, 50, 41);
            for (auto& v : img.cb.v) v = 96 + (v - 128) / 3;
            for (auto& v : img.cr.v) v = 144 + (v - 128) / 4;
            add_disc(img.y, 50, 25, 12, 45);
            return img;
        }
        case 3: {  // subsampled video-style frame
            Image img(120, 80, ChromaFormat::k420);
            img.y = natural_plane(120, 80, 53);
            img.cb = natural_plane(60, 40, 59);
            img.cr = natural_plane(60, 40, 61);
            for (auto& v : img.cb.v) v = 112 + (v - 128) / 4;
            for (auto& v : img.cr.v) v = 136 + (v - 128) / 4;
            add_edge(img.y, 40, false, 35);
            add_disc(img.y, 84, 56, 16, -45);
            return img;
        }
        default: {  // full-rate color with fine detail
            Image img(64, 48, ChromaFormat::k444);
            img.y = natural_plane(64, 48, 71);
            img.cb = natural_plane(64, 48, 73);
            img.cr = natural_plane(64, 48, 79);
            for (int y = 0; y < 48; ++y)
                for (int x = 0; x < 64; ++x)
                    if (((x / 3) + (y / 3)) % 2 && x > 32)
                        img.y.at(x, y) = clamp_i32(img.y.at(x, y) + 30, 0, 255);
            return img;
        }
    }
}

const char* kNames[5] = {"scene.pgm", "texture.pgm", "color.ppm",
                         "frame420.y4m", "detail444.y4m"};

}  // namespace

int main(int argc, char** argv) {
    std::string root = argc > 1 ? argv[1] : ".";
    std::string data = root + "/tests/data/";
    std::string gold = root + "/tests/golden/";
    FILE* hf = std::fopen((gold + "hashes.tsv").c_str(), "w");
    if (!hf) {
        std::fprintf(stderr, "cannot write %shashes.tsv\n", gold.c_str());
        return 1;
    }
    for (int i = 0; i < 5; ++i) {
        Image img = fixture(i);
        write_image(data + kNames[i], img);
        // Goldens must match what a consumer decodes from the committed
        // file; PPM color conversion does not round-trip bit-exactly.
        img = read_image(data + kNames[i]);
        for (int q : {8, 32, 128}) {
            EncodeParams par;
            par.q = q;
            std::vector<uint8_t> bits = encode_image(img, par);
            std::string base = std::string(kNames[i]);
            base = base.substr(0, base.find('.'));
            char lpx[64];
            std::snprintf(lpx, sizeof lpx, "%s_q%d.lpx", base.c_str(), q);
            write_file(gold + lpx, bits);
            Image dec = decode_stream(bits);
            const char* pn[3] = {"y", "cb", "cr"};
            for (int p = 0; p < dec.num_planes(); ++p) {
                const Plane& pl = dec.plane(p);
                std::vector<uint8_t> bytes;
                bytes.reserve(pl.v.size());
                for (int32_t v : pl.v) bytes.push_back(uint8_t(v));
                uint64_t hsh = fnv1a64(bytes.data(), bytes.size());
                std::fprintf(hf, "%s\t%d\t%s\t%016llx\n", kNames[i], q, pn[p],
                             (unsigned long long)hsh);
            }
            std::printf("%s q=%d: %zu bytes\n", kNames[i], q, bits.size());
        }
    }
    std::fclose(hf);
    return 0;
}
