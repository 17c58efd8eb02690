#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lappix/image.hpp"

namespace lappix {

enum class FileFormat { kPgm, kPpm, kY4m };

// Full-range BT.601 in Q16 with exactly balanced rows: gray stays gray and
// Y of a gray pixel is the pixel. Results clamp to [0, 255].
void rgb_to_ycbcr(int32_t r, int32_t g, int32_t b, int32_t* y, int32_t* cb,
                  int32_t* cr);
void ycbcr_to_rgb(int32_t y, int32_t cb, int32_t cr, int32_t* r, int32_t* g,
                  int32_t* b);

// Sniffs the magic and parses one image. PGM loads as monochrome, PPM as
// 4:4:4 YCbCr, Y4M (first frame) as whatever the stream header says.
// Throws IoError on malformed input and on unsupported variants.
Image decode_image(const std::vector<uint8_t>& data,
                   FileFormat* fmt = nullptr);

std::vector<uint8_t> encode_pgm(const Image& img);
std::vector<uint8_t> encode_ppm(const Image& img);
std::vector<uint8_t> encode_y4m(const Image& img);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& data);

Image read_image(const std::string& path, FileFormat* fmt = nullptr);
// Picks the container from the file extension (.pgm/.ppm/.y4m).
void write_image(const std::string& path, const Image& img);

}  // namespace lappix
