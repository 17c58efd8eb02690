#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lappix/codec.hpp"
#include "lappix/io.hpp"

namespace lappix {
namespace {

void print_db(FILE* f, const char* name, double db) {
    if (std::isinf(db))
        std::fprintf(f, "%s\tinf\n", name);
    else
        std::fprintf(f, "%s\t%.4f\n", name, db);
}

void cmd_encode(const std::string& in, const std::string& out,
                const EncodeParams& par) {
    Image img = read_image(in);
    std::vector<uint8_t> bits = encode_image(img, par);
    write_file(out, bits);
    std::fprintf(stderr, "%s: %dx%d q=%d -> %zu bytes\n", out.c_str(), img.w,
                 img.h, par.q, bits.size());
}

void cmd_decode(const std::string& in, const std::string& out) {
    Image img = decode_stream(read_file(in));
    write_image(out, img);
    std::fprintf(stderr, "%s: %dx%d\n", out.c_str(), img.w, img.h);
}

// The standalone deringing filter: every superblock enabled, nothing
// marked skipped, thresholds from the given quantizer.
void cmd_dering(const std::string& in, const std::string& out, int q) {
    Image img = read_image(in);
    for (int p = 0; p < img.num_planes(); ++p) {
        int sb = (p > 0 && img.fmt == ChromaFormat::k420) ? 16 : 32;
        Plane pad = pad_plane(img.plane(p), sb);
        ByteMap skip(pad.w / 4, pad.h / 4, 0);
        std::vector<uint8_t> on(size_t(pad.w / sb) * (pad.h / sb), 1);
        Plane dst(pad.w, pad.h);
        dering_plane(pad, dst, skip, on, sb, q, nullptr);
        Plane& dp = img.plane(p);
        for (int y = 0; y < dp.h; ++y)
            for (int x = 0; x < dp.w; ++x)
                dp.at(x, y) = clamp_i32(dst.at(x, y), 0, 255);
    }
    write_image(out, img);
}

void cmd_analyze(const std::string& in, const std::string& out) {
    std::vector<uint8_t> bits = read_file(in);
    DecodeStats st;
    Image img = decode_stream(bits, &st);
    if (!st.dering) {
        // stream skipped the filter; measure directions on the output
        Plane pad = pad_plane(img.y, 32);
        ByteMap skip(pad.w / 4, pad.h / 4, 0);
        std::vector<uint8_t> on(size_t(pad.w / 32) * (pad.h / 32), 1);
        Plane dst(pad.w, pad.h);
        dering_plane(pad, dst, skip, on, 32, st.q, &st.dering_luma);
    }
    FILE* f = out.empty() ? stdout : std::fopen(out.c_str(), "w");
    if (!f) throw IoError("cannot open " + out);
    int pw = st.luma_map.w4 * 4, ph = st.luma_map.h4 * 4;
    std::fprintf(f, "# %dx%d coded %dx%d q=%d\n", img.w, img.h, pw, ph, st.q);
    std::fprintf(f, "# leaf <x> <y> <size>\n");
    for (int sy = 0; sy < ph; sy += 32)
        for (int sx = 0; sx < pw; sx += 32)
            walk_leaves(st.luma_map, sx, sy, kSbLog2,
                        [&](int x, int y, int lg) {
                            std::fprintf(f, "leaf\t%d\t%d\t%d\n", x, y,
                                         1 << lg);
                        });
    std::fprintf(f, "# dir8 <x> <y> <dir> <delta> <td_q8>\n");
    int bw = pw / 8;
    for (size_t i = 0; i < st.dering_luma.size(); ++i) {
        const DeringBlockInfo& bi = st.dering_luma[i];
        std::fprintf(f, "dir8\t%d\t%d\t%d\t%lld\t%d\n", int(i % bw) * 8,
                     int(i / bw) * 8, bi.dir, (long long)bi.delta, bi.td_q8);
    }
    if (f != stdout) std::fclose(f);
}

void cmd_psnr(const std::string& a_path, const std::string& b_path) {
    Image a = read_image(a_path);
    Image b = read_image(b_path);
    PsnrResult r = psnr(a, b);
    const char* names[3] = {"y", "cb", "cr"};
    for (int p = 0; p < r.num_planes; ++p)
        print_db(stdout, names[p], r.plane[p]);
    print_db(stdout, "all", r.all);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"lappix still image codec"};
    app.require_subcommand(1);

    std::string in, out;
    EncodeParams par;
    int lap = 4;

    CLI::App* enc = app.add_subcommand("encode", "compress an image");
    enc->add_option("input", in, "pgm/ppm/y4m input")->required();
    enc->add_option("output", out, "coded output (.lpx)")->required();
    enc->add_option("-q,--quantizer", par.q, "quantizer, 1 (fine) .. 512")
        ->check(CLI::Range(1, int(kMaxQ)));
    enc->add_option("--lap", lap, "lapping filter length (4 or 8)")
        ->check(CLI::IsMember({4, 8}));
    enc->add_flag("--no-dering", [&](size_t) { par.dering = false; },
                  "disable the deringing filter");
    enc->add_flag("--no-smooth", [&](size_t) { par.smooth = false; },
                  "disable the smoothing filter");
    enc->callback([&] {
        par.lap = lap == 8 ? LapMode::k8 : LapMode::k4;
        cmd_encode(in, out, par);
    });

    CLI::App* dec = app.add_subcommand("decode", "decompress a stream");
    dec->add_option("input", in, "coded input (.lpx)")->required();
    dec->add_option("output", out, "pgm/ppm/y4m output")->required();
    dec->callback([&] { cmd_decode(in, out); });

    int dq = 32;
    CLI::App* der = app.add_subcommand("dering", "run the deringing filter");
    der->add_option("input", in, "pgm/ppm/y4m input")->required();
    der->add_option("output", out, "filtered output")->required();
    der->add_option("-q,--quantizer", dq, "quantizer driving the thresholds")
        ->check(CLI::Range(1, int(kMaxQ)));
    der->callback([&] { cmd_dering(in, out, dq); });

    std::string report;
    CLI::App* ana = app.add_subcommand("analyze", "dump coded structure");
    ana->add_option("input", in, "coded input (.lpx)")->required();
    ana->add_option("-o,--output", report, "report path (default stdout)");
    ana->callback([&] { cmd_analyze(in, report); });

    std::string pa, pb;
    CLI::App* ps = app.add_subcommand("psnr", "compare two images");
    ps->add_option("a", pa, "reference image")->required();
    ps->add_option("b", pb, "test image")->required();
    ps->callback([&] { cmd_psnr(pa, pb); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const BitstreamError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace lappix

int main(int argc, char** argv) { return lappix::run(argc, argv); }
