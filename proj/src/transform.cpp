#include "lappix/transform.hpp"

#include <cassert>
#include <cstddef>

namespace lappix {

namespace {

enum class LiftKind : uint8_t { kHbd, kHbs, kEb, kAbm, kLift, kNeg };

struct LiftOp {
    LiftKind kind;
    uint8_t a, b;
    int16_t c;  // Q14 constant, kLift only
};

#include "transform_plan.inc"

inline int32_t lift_term(int32_t v, int16_t c) {
    return int32_t((int64_t(v) * c + (1 << 13)) >> 14);
}

void run_fwd(const LiftOp* ops, size_t n_ops, int32_t* x) {
    for (size_t i = 0; i < n_ops; ++i) {
        const LiftOp& op = ops[i];
        int32_t* a = x + op.a;
        int32_t* b = x + op.b;
        switch (op.kind) {
            case LiftKind::kHbd:
                *a -= *b;
                *b += *a >> 1;
                break;
            case LiftKind::kHbs:
                *a += *b;
                *b -= *a >> 1;
                break;
            case LiftKind::kEb:
                *a += *b;
                *b = *a - (*b << 1);
                break;
            case LiftKind::kAbm:
                *a += *b >> 1;
                *b = *a - *b;
                break;
            case LiftKind::kLift:
                *a += lift_term(*b, op.c);
                break;
            case LiftKind::kNeg:
                *a = -*a;
                break;
        }
    }
}

void run_inv(const LiftOp* ops, size_t n_ops, int32_t* x) {
    for (size_t i = n_ops; i-- > 0;) {
        const LiftOp& op = ops[i];
        int32_t* a = x + op.a;
        int32_t* b = x + op.b;
        switch (op.kind) {
            case LiftKind::kHbd:
                *b -= *a >> 1;
                *a += *b;
                break;
            case LiftKind::kHbs:
                *b += *a >> 1;
                *a -= *b;
                break;
            case LiftKind::kEb:
                // forward wrote (s, d) = (a+b, a-b); s-d is always even
                *b = (*a - *b) >> 1;
                *a -= *b;
                break;
            case LiftKind::kAbm:
                *b = *a - *b;
                *a -= *b >> 1;
                break;
            case LiftKind::kLift:
                *a -= lift_term(*b, op.c);
                break;
            case LiftKind::kNeg:
                *a = -*a;
                break;
        }
    }
}

struct SizePlan {
    const LiftOp* ops;
    size_t n_ops;
    const uint8_t* perm;
};

SizePlan plan_for(int n) {
    switch (n) {
        case 4:
            return {kDctOps4, sizeof(kDctOps4) / sizeof(LiftOp), kDctPerm4};
        case 8:
            return {kDctOps8, sizeof(kDctOps8) / sizeof(LiftOp), kDctPerm8};
        case 16:
            return {kDctOps16, sizeof(kDctOps16) / sizeof(LiftOp), kDctPerm16};
        default:
            assert(n == 32);
            return {kDctOps32, sizeof(kDctOps32) / sizeof(LiftOp), kDctPerm32};
    }
}

}  // namespace

int dct_scale_log2(int n) {
    switch (n) {
        case 4: return kDctScaleLog2[0];
        case 8: return kDctScaleLog2[1];
        case 16: return kDctScaleLog2[2];
        default: assert(n == 32); return kDctScaleLog2[3];
    }
}

void fdct_1d(int32_t* x, int n) {
    SizePlan p = plan_for(n);
    run_fwd(p.ops, p.n_ops, x);
    int32_t tmp[32];
    for (int k = 0; k < n; ++k) tmp[k] = x[p.perm[k]];
    for (int k = 0; k < n; ++k) x[k] = tmp[k];
}

void idct_1d(int32_t* x, int n) {
    SizePlan p = plan_for(n);
    int32_t tmp[32];
    for (int k = 0; k < n; ++k) tmp[p.perm[k]] = x[k];
    for (int k = 0; k < n; ++k) x[k] = tmp[k];
    run_inv(p.ops, p.n_ops, x);
}

void fdct_2d(int32_t* data, int stride, int n) {
    int32_t lane[32];
    for (int y = 0; y < n; ++y) fdct_1d(data + ptrdiff_t(y) * stride, n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) lane[y] = data[ptrdiff_t(y) * stride + x];
        fdct_1d(lane, n);
        for (int y = 0; y < n; ++y) data[ptrdiff_t(y) * stride + x] = lane[y];
    }
}

void idct_2d(int32_t* data, int stride, int n) {
    int32_t lane[32];
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) lane[y] = data[ptrdiff_t(y) * stride + x];
        idct_1d(lane, n);
        for (int y = 0; y < n; ++y) data[ptrdiff_t(y) * stride + x] = lane[y];
    }
    for (int y = 0; y < n; ++y) idct_1d(data + ptrdiff_t(y) * stride, n);
}

}  // namespace lappix
