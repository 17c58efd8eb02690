#pragma once

#include <cstdint>

namespace lappix {

// Reversible integer lifting DCTs for n in {4, 8, 16, 32}.
//
// Every 1-D output sits at the same scale sqrt(2)^e relative to the
// orthonormal DCT-II (e = dct_scale_log2(n)), so a 2-D block comes out at
// 2^e times orthonormal. The inverse reproduces the input bit exactly.

// Per-size half-exponent e of the uniform output scale.
int dct_scale_log2(int n);

// In-place 1-D transforms on n contiguous lanes.
void fdct_1d(int32_t* x, int n);
void idct_1d(int32_t* x, int n);

// In-place 2-D transforms on an n x n block with row stride `stride`.
// Forward runs rows then columns; inverse exactly reverses that.
void fdct_2d(int32_t* data, int stride, int n);
void idct_2d(int32_t* data, int stride, int n);

}  // namespace lappix
