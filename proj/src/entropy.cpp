#include "lappix/entropy.hpp"

#include <cassert>

namespace lappix {

// ---------------------------------------------------------------------------
// encoder
// ---------------------------------------------------------------------------

void RangeEncoder::shift_low() {
    uint32_t hi = uint32_t(low_ >> 32);
    if (hi != 0 || low_ < 0xff000000ull) {
        while (cache_size_ != 0) {
            out_.push_back(uint8_t(cache_ + hi));
            cache_ = 0xff;
            --cache_size_;
        }
        cache_ = uint8_t(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ << 8) & 0xffffffffull;
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq, uint32_t tot) {
    assert(freq > 0 && cum + freq <= tot && tot < (1u << 15));
    range_ /= tot;
    low_ += uint64_t(cum) * range_;
    range_ *= freq;
    while (range_ < (1u << 24)) {
        shift_low();
        range_ <<= 8;
    }
}

void RangeEncoder::encode_raw(uint32_t v, int nbits) {
    while (nbits > 12) {
        nbits -= 12;
        encode((v >> nbits) & 0xfff, 1, 1u << 12);
    }
    if (nbits > 0) encode(v & ((1u << nbits) - 1), 1, 1u << nbits);
}

std::vector<uint8_t> RangeEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

// ---------------------------------------------------------------------------
// decoder
// ---------------------------------------------------------------------------

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size)
    : data_(data), size_(size) {
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    if (pos_ >= size_) throw BitstreamError("truncated stream");
    return data_[pos_++];
}

uint32_t RangeDecoder::decode_cum(uint32_t tot) {
    range_ /= tot;
    uint32_t v = code_ / range_;
    return v >= tot ? tot - 1 : v;
}

void RangeDecoder::update(uint32_t cum, uint32_t freq) {
    code_ -= cum * range_;
    range_ *= freq;
    while (range_ < (1u << 24)) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
}

uint32_t RangeDecoder::decode_raw(int nbits) {
    uint32_t v = 0;
    while (nbits > 12) {
        nbits -= 12;
        uint32_t c = decode_cum(1u << 12);
        update(c, 1);
        v = (v << 12) | c;
    }
    if (nbits > 0) {
        uint32_t c = decode_cum(1u << nbits);
        update(c, 1);
        v = (v << nbits) | c;
    }
    return v;
}

// ---------------------------------------------------------------------------
// adaptive model
// ---------------------------------------------------------------------------

void AdaptiveModel::update(int sym) {
    freq_[sym] += 32;
    tot_ += 32;
    if (tot_ > (1u << 13)) {
        tot_ = 0;
        for (auto& f : freq_) {
            f = uint16_t((f + 1) >> 1);
            tot_ += f;
        }
    }
}

void AdaptiveModel::encode(RangeEncoder& rc, int sym) {
    uint32_t cum = 0;
    for (int i = 0; i < sym; ++i) cum += freq_[i];
    rc.encode(cum, freq_[sym], tot_);
    update(sym);
}

int AdaptiveModel::decode(RangeDecoder& rc) {
    uint32_t target = rc.decode_cum(tot_);
    uint32_t cum = 0;
    int sym = 0;
    while (cum + freq_[sym] <= target) cum += freq_[sym++];
    rc.update(cum, freq_[sym]);
    update(sym);
    return sym;
}

int32_t AdaptiveModel::bits_q4(int sym) const {
    // (log2(tot) - log2(freq)) in Q4
    return int32_t((log2_q16(tot_) - log2_q16(freq_[sym])) >> 12);
}

// ---------------------------------------------------------------------------
// exp-golomb escape
// ---------------------------------------------------------------------------

void encode_golomb(RangeEncoder& rc, uint32_t v) {
    uint32_t n = v + 1;
    int msb = 31;
    while (!(n >> msb)) --msb;
    for (int i = 0; i < msb; ++i) rc.encode_raw(1, 1);
    rc.encode_raw(0, 1);
    if (msb > 0) rc.encode_raw(n & ((1u << msb) - 1), msb);
}

uint32_t decode_golomb(RangeDecoder& rc) {
    int msb = 0;
    while (rc.decode_raw(1)) {
        if (++msb > 31) throw BitstreamError("invalid golomb code");
    }
    uint32_t n = 1u << msb;
    if (msb > 0) n |= rc.decode_raw(msb);
    return n - 1;
}

}  // namespace lappix
