#pragma once

#include <cstdint>

#include "lappix/image.hpp"
#include "lappix/partition.hpp"

namespace lappix {

// Frequency-domain intra prediction. Blocks predict from already coded
// same-size neighbors: H copies the left neighbor's first coefficient
// column, V the top neighbor's first row. DC predicts from the mean of the
// available same-size neighbor DCs regardless of mode.

enum class IntraMode : uint8_t { kNone = 0, kH = 1, kV = 2 };

// H/V need an aligned same-size neighbor; kNone is always available.
bool intra_available(const BlockMap& bm, int x, int y, int lg, IntraMode m);

// Mean of the available same-size neighbor DCs, 0 when none qualifies.
int32_t dc_predict(const Plane& coeff, const BlockMap& bm, int x, int y,
                   int lg);

// Fills pred[n*n] row-major: pred[0] is the DC prediction, AC entries are
// the copied row/column (zero for kNone and off the copied lane).
void intra_predict(const Plane& coeff, const BlockMap& bm, int x, int y,
                   int lg, IntraMode m, int32_t* pred);

// Chroma-from-luma reference: the co-located window of reconstructed luma
// coefficients (the low-frequency quadrant when subsampled). pred[0] = 0;
// chroma DC predicts from chroma neighbors instead.
void cfl_reference(const Plane& luma_coeff, int cx, int cy, int lg,
                   bool subsampled, int32_t* ref);

}  // namespace lappix
