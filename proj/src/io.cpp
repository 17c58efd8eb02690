#include "lappix/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lappix/common.hpp"

namespace lappix {

namespace {

int32_t clamp255(int64_t v) { return v < 0 ? 0 : (v > 255 ? 255 : int32_t(v)); }

struct ByteReader {
    const std::vector<uint8_t>& d;
    size_t pos = 0;

    bool eof() const { return pos >= d.size(); }
    uint8_t next() {
        if (eof()) throw IoError("unexpected end of file");
        return d[pos++];
    }
    uint8_t peek() const {
        if (eof()) throw IoError("unexpected end of file");
        return d[pos];
    }
    void read_block(int32_t* dst, size_t n) {
        if (pos + n > d.size()) throw IoError("truncated pixel data");
        for (size_t i = 0; i < n; ++i) dst[i] = d[pos + i];
        pos += n;
    }
};

// PNM header integer: skips whitespace and '#' comments first.
int pnm_uint(ByteReader& r) {
    for (;;) {
        uint8_t c = r.peek();
        if (std::isspace(c)) {
            r.next();
        } else if (c == '#') {
            while (r.next() != '\n') {
            }
        } else {
            break;
        }
    }
    if (!std::isdigit(r.peek())) throw IoError("bad header token");
    int64_t v = 0;
    while (!r.eof() && std::isdigit(r.peek())) {
        v = v * 10 + (r.next() - '0');
        if (v > (1 << 20)) throw IoError("header value out of range");
    }
    return int(v);
}

Image decode_pnm(ByteReader& r, bool color) {
    int w = pnm_uint(r);
    int h = pnm_uint(r);
    int maxval = pnm_uint(r);
    if (w <= 0 || h <= 0) throw IoError("empty image");
    if (maxval <= 0 || maxval > 255) throw IoError("only 8-bit samples supported");
    r.next();  // single whitespace before the raster
    if (!color) {
        Image img(w, h, ChromaFormat::kMono);
        r.read_block(img.y.v.data(), img.y.v.size());
        return img;
    }
    Image img(w, h, ChromaFormat::k444);
    if (r.pos + size_t(w) * h * 3 > r.d.size())
        throw IoError("truncated pixel data");
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int32_t rr = r.next(), gg = r.next(), bb = r.next();
            rgb_to_ycbcr(rr, gg, bb, &img.y.at(x, y), &img.cb.at(x, y),
                         &img.cr.at(x, y));
        }
    return img;
}

std::string read_line(ByteReader& r) {
    std::string s;
    for (;;) {
        uint8_t c = r.next();
        if (c == '\n') return s;
        s.push_back(char(c));
        if (s.size() > 4096) throw IoError("header line too long");
    }
}

Image decode_y4m(ByteReader& r) {
    std::string header = read_line(r);
    std::istringstream hs(header);
    std::string tok;
    hs >> tok;  // magic, already checked
    int w = 0, h = 0;
    ChromaFormat fmt = ChromaFormat::k420;
    while (hs >> tok) {
        if (tok.size() < 2) continue;
        switch (tok[0]) {
            case 'W': w = std::atoi(tok.c_str() + 1); break;
            case 'H': h = std::atoi(tok.c_str() + 1); break;
            case 'C': {
                std::string cs = tok.substr(1);
                if (cs == "420" || cs == "420jpeg" || cs == "420mpeg2")
                    fmt = ChromaFormat::k420;
                else if (cs == "444")
                    fmt = ChromaFormat::k444;
                else
                    throw IoError("unsupported y4m colorspace " + cs);
                break;
            }
            default: break;  // frame rate, aspect, interlace, X params
        }
    }
    if (w <= 0 || h <= 0) throw IoError("y4m missing dimensions");
    std::string frame = read_line(r);
    if (frame.substr(0, 5) != "FRAME") throw IoError("y4m missing FRAME");
    Image img(w, h, fmt);
    r.read_block(img.y.v.data(), img.y.v.size());
    r.read_block(img.cb.v.data(), img.cb.v.size());
    r.read_block(img.cr.v.data(), img.cr.v.size());
    return img;  // trailing frames are ignored
}

void append_text(std::vector<uint8_t>& out, const std::string& s) {
    out.insert(out.end(), s.begin(), s.end());
}

void append_plane(std::vector<uint8_t>& out, const Plane& p) {
    out.reserve(out.size() + p.v.size());
    for (int32_t v : p.v) out.push_back(uint8_t(clamp255(v)));
}

bool plane_constant(const Plane& p, int32_t val) {
    return std::all_of(p.v.begin(), p.v.end(),
                       [val](int32_t v) { return v == val; });
}

}  // namespace

void rgb_to_ycbcr(int32_t r, int32_t g, int32_t b, int32_t* y, int32_t* cb,
                  int32_t* cr) {
    *y = clamp255(div_round(19595ll * r + 38470ll * g + 7471ll * b, 65536));
    *cb = clamp255(128 + div_round(-11059ll * r - 21709ll * g + 32768ll * b,
                                   65536));
    *cr = clamp255(128 + div_round(32768ll * r - 27440ll * g - 5328ll * b,
                                   65536));
}

void ycbcr_to_rgb(int32_t y, int32_t cb, int32_t cr, int32_t* r, int32_t* g,
                  int32_t* b) {
    int64_t u = cb - 128, v = cr - 128;
    *r = clamp255(y + div_round(91881 * v, 65536));
    *g = clamp255(y + div_round(-22554 * u - 46802 * v, 65536));
    *b = clamp255(y + div_round(116130 * u, 65536));
}

Image decode_image(const std::vector<uint8_t>& data, FileFormat* fmt) {
    ByteReader r{data};
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '5') {
        r.pos = 2;
        if (fmt) *fmt = FileFormat::kPgm;
        return decode_pnm(r, false);
    }
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') {
        r.pos = 2;
        if (fmt) *fmt = FileFormat::kPpm;
        return decode_pnm(r, true);
    }
    const char* magic = "YUV4MPEG2";
    if (data.size() >= 9 && std::equal(magic, magic + 9, data.begin())) {
        if (fmt) *fmt = FileFormat::kY4m;
        return decode_y4m(r);
    }
    throw IoError("unrecognized image format");
}

std::vector<uint8_t> encode_pgm(const Image& img) {
    if (img.fmt != ChromaFormat::kMono &&
        !(plane_constant(img.cb, 128) && plane_constant(img.cr, 128)))
        throw IoError("image has chroma; cannot write pgm");
    std::vector<uint8_t> out;
    append_text(out, "P5\n" + std::to_string(img.w) + " " +
                         std::to_string(img.h) + "\n255\n");
    append_plane(out, img.y);
    return out;
}

std::vector<uint8_t> encode_ppm(const Image& img) {
    std::vector<uint8_t> out;
    append_text(out, "P6\n" + std::to_string(img.w) + " " +
                         std::to_string(img.h) + "\n255\n");
    out.reserve(out.size() + size_t(img.w) * img.h * 3);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            int32_t cb = 128, cr = 128;
            if (img.fmt == ChromaFormat::k444) {
                cb = img.cb.at(x, y);
                cr = img.cr.at(x, y);
            } else if (img.fmt == ChromaFormat::k420) {
                cb = img.cb.at(x >> 1, y >> 1);
                cr = img.cr.at(x >> 1, y >> 1);
            }
            int32_t r, g, b;
            ycbcr_to_rgb(clamp255(img.y.at(x, y)), cb, cr, &r, &g, &b);
            out.push_back(uint8_t(r));
            out.push_back(uint8_t(g));
            out.push_back(uint8_t(b));
        }
    return out;
}

std::vector<uint8_t> encode_y4m(const Image& img) {
    std::vector<uint8_t> out;
    bool full = img.fmt == ChromaFormat::k444;
    append_text(out, "YUV4MPEG2 W" + std::to_string(img.w) + " H" +
                         std::to_string(img.h) + " F25:1 Ip A1:1 C" +
                         (full ? "444" : "420jpeg") + "\nFRAME\n");
    append_plane(out, img.y);
    if (img.fmt == ChromaFormat::kMono) {
        // synthesize neutral chroma so grayscale output stays viewable
        size_t n = size_t(chroma_width(img.w, ChromaFormat::k420)) *
                   chroma_height(img.h, ChromaFormat::k420);
        out.insert(out.end(), 2 * n, uint8_t(128));
    } else {
        append_plane(out, img.cb);
        append_plane(out, img.cr);
    }
    return out;
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size()));
    if (!f) throw IoError("short write to " + path);
}

Image read_image(const std::string& path, FileFormat* fmt) {
    return decode_image(read_file(path), fmt);
}

void write_image(const std::string& path, const Image& img) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".pgm")
        write_file(path, encode_pgm(img));
    else if (ext == ".ppm")
        write_file(path, encode_ppm(img));
    else if (ext == ".y4m")
        write_file(path, encode_y4m(img));
    else
        throw UsageError("unsupported output extension: " + path);
}

}  // namespace lappix
