#pragma once

#include <cstdint>
#include <vector>

#include "lappix/common.hpp"

namespace lappix {

// Multisymbol range coder (carry-counting byte output, 32-bit range,
// renormalization below 2^24). Cumulative totals must stay below 2^15.

class RangeEncoder {
  public:
    void encode(uint32_t cum, uint32_t freq, uint32_t tot);
    void encode_raw(uint32_t v, int nbits);  // big-endian chunks
    std::vector<uint8_t> finish();

  private:
    void shift_low();
    std::vector<uint8_t> out_;
    uint64_t low_ = 0;
    uint32_t range_ = 0xffffffffu;
    uint8_t cache_ = 0;
    int64_t cache_size_ = 1;
};

class RangeDecoder {
  public:
    RangeDecoder(const uint8_t* data, size_t size);
    // Returns a value in [0, tot); caller maps it to a symbol, then must
    // call update() with that symbol's interval.
    uint32_t decode_cum(uint32_t tot);
    void update(uint32_t cum, uint32_t freq);
    uint32_t decode_raw(int nbits);

  private:
    uint8_t next_byte();
    const uint8_t* data_;
    size_t size_, pos_ = 0;
    uint32_t range_ = 0xffffffffu;
    uint32_t code_ = 0;
};

// Adaptive frequency model: freq += 32 on update, halved (floor, min 1)
// when the total exceeds 2^13.
class AdaptiveModel {
  public:
    explicit AdaptiveModel(int n) : freq_(n, 1), tot_(uint32_t(n)) {}
    void encode(RangeEncoder& rc, int sym);
    int decode(RangeDecoder& rc);
    // Code length in Q4 bits, for rate estimation without coding.
    int32_t bits_q4(int sym) const;
    int size() const { return int(freq_.size()); }

  private:
    void update(int sym);
    std::vector<uint16_t> freq_;
    uint32_t tot_;
};

// Exp-Golomb escape for unbounded magnitudes, built on raw bits.
void encode_golomb(RangeEncoder& rc, uint32_t v);
uint32_t decode_golomb(RangeDecoder& rc);

}  // namespace lappix
