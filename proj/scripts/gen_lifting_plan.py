#!/usr/bin/env python3
"""Generates the frozen lifting schedules for the reversible block transforms.

Emits src/transform_plan.inc: for each block size (4, 8, 16, 32) an op table
realizing an integer lifting DCT whose outputs all sit at the same
power-of-sqrt(2) scale relative to the orthonormal DCT-II, with an exact
integer add/shift chain on the DC lane so constant inputs produce exactly
zero AC coefficients.

Also performs a small coding-gain search for the lapping filter lifting
constants and prints the chosen values (frozen by hand into lapping.cpp).

Run from the repo root:  python3 scripts/gen_lifting_plan.py
"""

import math
import numpy as np

QBITS = 14
EPS = 1e-9

HBD, HBS, EB, ABM, LIFT, NEG = "HBD", "HBS", "EB", "ABM", "LIFT", "NEG"

# Scale bookkeeping uses half-exponents: a lane at exponent e holds
# sqrt(2)^e times the orthonormal value of whatever it represents.


class Plan:
    def __init__(self, n):
        self.n = n
        self.ops = []  # (kind, a, b, c_real or None)
        self.e = [0] * n  # per-lane half-exponent
        self.kappa = [0] * n  # per-lane constant-value exponent (value = 2^kappa * c)

    def hbd(self, a, b):
        assert self.e[a] == self.e[b] and self.kappa[a] == self.kappa[b]
        self.ops.append((HBD, a, b, None))
        ka = self.kappa[a]
        self.e[a] += 1          # diff lane
        self.e[b] -= 1          # sum lane, value unchanged for constants
        self.kappa[b] = ka
        return b, a, +1         # (sum_lane, diff_lane, diff_sign)

    def hbs(self, a, b):
        assert self.e[a] == self.e[b] and self.kappa[a] == self.kappa[b]
        self.ops.append((HBS, a, b, None))
        self.kappa[a] += 1
        self.e[a] += 1          # sum lane
        self.e[b] -= 1          # diff lane, negated
        return a, b, -1

    def eb(self, a, b):
        assert self.e[a] == self.e[b] and self.kappa[a] == self.kappa[b]
        self.ops.append((EB, a, b, None))
        self.kappa[a] += 1
        self.e[a] += 1
        self.e[b] += 1
        return a, b, +1

    def abm(self, lo, hi):
        assert self.e[hi] - self.e[lo] == 2, (self.e[lo], self.e[hi])
        assert self.kappa[lo] == self.kappa[hi] - 1
        self.ops.append((ABM, lo, hi, None))
        self.kappa[lo] += 1
        self.e[lo] += 1         # sum lane
        self.e[hi] -= 1         # diff lane
        return lo, hi, +1

    def neg(self, a):
        self.ops.append((NEG, a, None, None))

    def lift(self, a, b, c):
        self.ops.append((LIFT, a, b, float(c)))

    # --- general det +-1 2x2 via lifting steps -----------------------------
    def lift3(self, a, b, m):
        m = np.asarray(m, dtype=float)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        assert abs(abs(det) - 1.0) < 1e-7, det
        if det < 0:
            # M = M' * diag(1, -1): negate x[b] first.
            self.neg(b)
            m = m @ np.diag([1.0, -1.0])
        A, B, C, D = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        if abs(C) > 1e-8:
            p = (A - 1.0) / C
            r = (D - 1.0) / C
            if max(abs(p), abs(C), abs(r)) <= 1.90:
                self.lift(a, b, r)
                self.lift(b, a, C)
                self.lift(a, b, p)
                return
        elif abs(A - 1.0) < 1e-9 and abs(D - 1.0) < 1e-9:
            if abs(B) > 1e-12:
                self.lift(a, b, B)
            return
        elif abs(A + 1.0) < 1e-9 and abs(D + 1.0) < 1e-9:
            if abs(B) > 1e-12:
                self.lift(a, b, -B)
            self.neg(a)
            self.neg(b)
            return
        # Split factorization M = R(phi) * U with U upper triangular, det 1.
        phi = math.atan2(m[1, 0], m[0, 0])
        rot = np.array([[math.cos(phi), -math.sin(phi)],
                        [math.sin(phi), math.cos(phi)]])
        u = rot.T @ m
        assert abs(u[1, 0]) < 1e-7
        u00 = u[0, 0]
        # shear first
        if abs(u[0, 1] / u00) > 1e-12:
            self.lift(a, b, u[0, 1] / u00)
        # diag(u00, 1/u00) = asw(-u00) o asw(1), asw applied b-first order
        if abs(u00 - 1.0) > 1e-9:
            self._asw(a, b, 1.0)
            self._asw(a, b, -u00)
        # rotation
        if abs(phi) > 1e-12:
            if abs(phi) > math.pi / 2 + 1e-12:
                phi2 = phi - math.copysign(math.pi, phi)
                self._rot(a, b, phi2)
                self.neg(a)
                self.neg(b)
            else:
                self._rot(a, b, phi)

    def _rot(self, a, b, psi):
        c, s = math.cos(psi), math.sin(psi)
        if abs(s) < 1e-12:
            return
        p = (c - 1.0) / s
        self.lift(a, b, p)
        self.lift(b, a, s)
        self.lift(a, b, p)

    def _asw(self, a, b, sigma):
        # [[0, -sigma], [1/sigma, 0]]
        self.lift(a, b, -sigma)
        self.lift(b, a, 1.0 / sigma)
        self.lift(a, b, -sigma)


# ---------------------------------------------------------------------------
# DCT construction
# ---------------------------------------------------------------------------

# Per-size even-chain level specs, derived so every output lane lands at the
# same half-exponent E (0 for 4 and 16, 1 for 8 and 32) while the DC lane is
# reached through exact add/shift ops only.
LEVEL_SPECS = {
    4:  [("mix", [HBD, HBS]), ("abm",)],
    8:  [("eb",), ("mix", [HBD, HBS]), ("abm",)],
    16: [("mix", [HBD] * 4 + [HBS] * 4), ("abm",), ("mix", [HBD, HBS]), ("abm",)],
    32: [("eb",), ("mix", [HBD] * 4 + [HBS] * 4), ("abm",), ("mix", [HBD, HBS]),
         ("abm",)],
}
E_TARGET = {4: 0, 8: 1, 16: 0, 32: 1}


def dct2_exact(plan, lanes, specs, e_out):
    n = len(lanes)
    if n == 1:
        assert plan.e[lanes[0]] == e_out
        return lanes
    spec = specs[0]
    half = n // 2
    sums, diffs, signs = [], [], []
    for i in range(half):
        a, b = lanes[i], lanes[n - 1 - i]
        if spec[0] == "mix":
            kind = spec[1][i]
            s, d, sg = plan.hbd(a, b) if kind == HBD else plan.hbs(a, b)
        elif spec[0] == "eb":
            s, d, sg = plan.eb(a, b)
        else:  # abm
            lo, hi = (a, b) if plan.e[a] < plan.e[b] else (b, a)
            s, d, sg = plan.abm(lo, hi)
        sums.append(s)
        diffs.append(d)
        signs.append(sg)
    evens = dct2_exact(plan, sums, specs[1:], e_out)
    odds = dct4(plan, diffs, signs, e_out)
    out = [None] * n
    out[0::2] = evens
    out[1::2] = odds
    return out


def dct4(plan, lanes, signs, e_out):
    m = len(lanes)
    if m == 1:
        # 1-point DCT-IV is the identity; lane must already sit at e_out.
        assert plan.e[lanes[0]] == e_out and signs[0] == +1
        return lanes
    assert m % 2 == 0
    h = m // 2
    t = math.sqrt(2.0) ** e_out
    for nidx in range(h):
        a, b = lanes[nidx], lanes[m - 1 - nidx]
        alpha = math.pi * (2 * nidx + 1) / (4 * m)
        rot = np.array([[math.cos(alpha), math.sin(alpha)],
                        [-math.sin(alpha), math.cos(alpha)]])  # R(-alpha)
        sa = math.sqrt(2.0) ** plan.e[a] * signs[nidx]
        sb = math.sqrt(2.0) ** plan.e[b] * signs[m - 1 - nidx]
        mm = np.diag([t, t]) @ rot @ np.diag([1.0 / sa, 1.0 / sb])
        plan.lift3(a, b, mm)
        plan.e[a] = e_out
        plan.e[b] = e_out
    p_lanes = lanes[:h]
    q_lanes = [lanes[m - 1 - i] for i in range(h)]
    for i in range(1, h, 2):
        plan.neg(q_lanes[i])
    t_hat = dct2_free(plan, p_lanes, e_out)
    s_hat = dct2_free(plan, q_lanes, e_out)
    out = [None] * m
    out[0] = t_hat[0]
    plan.neg(s_hat[0])
    out[m - 1] = s_hat[0]
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    b45 = np.array([[inv_sqrt2, inv_sqrt2], [inv_sqrt2, -inv_sqrt2]])
    for j in range(1, h):
        a, b = t_hat[j], s_hat[h - j]
        plan.lift3(a, b, b45)
        out[2 * j] = a
        out[2 * j - 1] = b
    return out


def dct2_free(plan, lanes, e_out):
    n = len(lanes)
    if n == 1:
        return lanes
    half = n // 2
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    b45 = np.array([[inv_sqrt2, inv_sqrt2], [inv_sqrt2, -inv_sqrt2]])
    sums, diffs = [], []
    for i in range(half):
        a, b = lanes[i], lanes[n - 1 - i]
        plan.lift3(a, b, b45)
        sums.append(a)
        diffs.append(b)
    evens = dct2_free(plan, sums, e_out)
    odds = dct4(plan, diffs, [+1] * half, e_out)
    out = [None] * n
    out[0::2] = evens
    out[1::2] = odds
    return out


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def run_real(ops, x, quantized):
    x = x.astype(float).copy()
    for kind, a, b, c in ops:
        if kind == HBD:
            x[a] -= x[b]; x[b] += x[a] / 2
        elif kind == HBS:
            x[a] += x[b]; x[b] -= x[a] / 2
        elif kind == EB:
            x[a] += x[b]; x[b] = x[a] - 2 * x[b]
        elif kind == ABM:
            x[a] += x[b] / 2; x[b] = x[a] - x[b]
        elif kind == LIFT:
            cc = round(c * (1 << QBITS)) / (1 << QBITS) if quantized else c
            x[a] += x[b] * cc
        elif kind == NEG:
            x[a] = -x[a]
    return x


def run_int_fwd(ops, x):
    x = [int(v) for v in x]
    half = 1 << (QBITS - 1)
    for kind, a, b, c in ops:
        if kind == HBD:
            x[a] -= x[b]; x[b] += x[a] >> 1
        elif kind == HBS:
            x[a] += x[b]; x[b] -= x[a] >> 1
        elif kind == EB:
            x[a] += x[b]; x[b] = x[a] - (x[b] << 1)
        elif kind == ABM:
            x[a] += x[b] >> 1; x[b] = x[a] - x[b]
        elif kind == LIFT:
            ci = round(c * (1 << QBITS))
            x[a] += (x[b] * ci + half) >> QBITS
        elif kind == NEG:
            x[a] = -x[a]
    return x


def run_int_inv(ops, x):
    x = [int(v) for v in x]
    half = 1 << (QBITS - 1)
    for kind, a, b, c in reversed(ops):
        if kind == HBD:
            x[b] -= x[a] >> 1; x[a] += x[b]
        elif kind == HBS:
            x[b] += x[a] >> 1; x[a] -= x[b]
        elif kind == EB:
            x[b] = (x[a] - x[b]) >> 1; x[a] -= x[b]
        elif kind == ABM:
            x[b] = x[a] - x[b]; x[a] -= x[b] >> 1
        elif kind == LIFT:
            ci = round(c * (1 << QBITS))
            x[a] -= (x[b] * ci + half) >> QBITS
        elif kind == NEG:
            x[a] = -x[a]
    return x


def dct2_ortho(n):
    m = np.zeros((n, n))
    for k in range(n):
        ck = math.sqrt(0.5) if k == 0 else 1.0
        for i in range(n):
            m[k, i] = ck * math.sqrt(2.0 / n) * math.cos(
                math.pi * (2 * i + 1) * k / (2 * n))
    return m


def build(n):
    plan = Plan(n)
    out = dct2_exact(plan, list(range(n)), LEVEL_SPECS[n], E_TARGET[n])
    scale = math.sqrt(2.0) ** E_TARGET[n]
    ref = dct2_ortho(n) * scale

    tmat = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n); e[i] = 1.0
        y = run_real(plan.ops, e, quantized=False)
        for k in range(n):
            tmat[k, i] = y[out[k]]
    err = np.abs(tmat - ref).max()
    assert err < 1e-9, (n, err)

    tq = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n); e[i] = 1.0
        y = run_real(plan.ops, e, quantized=True)
        for k in range(n):
            tq[k, i] = y[out[k]]
    qerr = np.abs(tq - ref).max()
    assert qerr < 5e-3, (n, qerr)

    rng = np.random.default_rng(7)
    for _ in range(512):
        v = rng.integers(-(1 << 20), 1 << 20, size=n)
        fwd = run_int_fwd(plan.ops, v)
        back = run_int_inv(plan.ops, fwd)
        assert list(back) == [int(t) for t in v], n

    # constant input must yield exactly zero off-DC lanes
    for c in (-301, -1, 0, 1, 7, 255):
        fwd = run_int_fwd(plan.ops, [c] * n)
        for k in range(1, n):
            assert fwd[out[k]] == 0, (n, c, k)

    # empirical forward noise vs the scaled float DCT, for test tolerances
    worst = 0.0
    for _ in range(2000):
        v = rng.integers(-255, 256, size=n)
        fwd = np.array([run_int_fwd(plan.ops, v)[out[k]] for k in range(n)],
                       dtype=float)
        worst = max(worst, np.abs(fwd - ref @ v).max())
    return plan, out, worst


def emit(sizes):
    lines = []
    lines.append("// Generated by scripts/gen_lifting_plan.py. Do not edit.")
    lines.append("// Lifting schedules for the reversible block DCTs.")
    lines.append("")
    for n in sizes:
        plan, out, worst = BUILT[n]
        lines.append(f"// n={n}: {len(plan.ops)} ops, "
                     f"max forward deviation {worst:.2f} vs scaled float DCT")
        lines.append(f"inline constexpr LiftOp kDctOps{n}[] = {{")
        row = []
        for kind, a, b, c in plan.ops:
            ci = 0 if c is None else round(c * (1 << QBITS))
            assert abs(ci) < 32768
            bb = 0 if b is None else b
            row.append(f"{{LiftKind::k{kind.title()}, {a}, {bb}, {ci}}}")
        for i in range(0, len(row), 4):
            lines.append("    " + ", ".join(row[i:i + 4]) + ",")
        lines.append("};")
        lines.append(f"inline constexpr uint8_t kDctPerm{n}[] = {{"
                     + ", ".join(str(v) for v in out) + "};")
        lines.append("")
    lines.append("// Per-size half-exponent of the uniform output scale: each")
    lines.append("// 1-D pass multiplies by sqrt(2)^e, so 2-D blocks scale by 2^e.")
    lines.append("inline constexpr int kDctScaleLog2[] = {"
                 + ", ".join(str(E_TARGET[n]) for n in sizes) + "};  // 4, 8, 16, 32")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Lapping filter constant search (coding gain, AR(1) rho = 0.95)
# ---------------------------------------------------------------------------

def lap_matrices(consts, k):
    """Real prefilter matrix over 2k pixels: mirror butterflies, lifts on the
    difference half, inverse butterflies. consts: list of (i, j, c) lifts."""
    m = 2 * k
    pre = np.eye(m)

    def apply(mat):
        nonlocal pre
        pre = mat @ pre

    # butterflies: pair (j, m-1-j) -> HBD: d = a - b; s = b + d/2
    for j in range(k):
        a, b = j, m - 1 - j
        f = np.eye(m)
        f[a, a], f[a, b] = 1.0, -1.0
        apply(f)
        f = np.eye(m)
        f[b, a] = 0.5
        apply(f)
    # lifts on diff lanes (diff for pair j lives in lane j)
    for (i, j, c) in consts:
        f = np.eye(m)
        f[i, j] = c
        apply(f)
    # inverse butterflies
    for j in range(k):
        a, b = j, m - 1 - j
        f = np.eye(m)
        f[b, a] = -0.5
        apply(f)
        f = np.eye(m)
        f[a, a], f[a, b] = 1.0, 1.0
        apply(f)
    return pre


def coding_gain(consts, k, n):
    """Coding gain of prefilter+DCT over a circular signal."""
    big = 8 * n
    pre = lap_matrices(consts, k)
    p_big = np.eye(big)
    for edge in range(0, big, n):
        idx = [(edge - k + t) % big for t in range(2 * k)]
        f = np.eye(big)
        f[np.ix_(idx, idx)] = pre
        p_big = f @ p_big
    d = dct2_ortho(n)
    t_big = np.zeros((big, big))
    for bstart in range(0, big, n):
        t_big[bstart:bstart + n, bstart:bstart + n] = d
    g = t_big @ p_big
    s = np.linalg.inv(g)
    rho = 0.95
    r = rho ** np.abs(np.subtract.outer(np.arange(big), np.arange(big)))
    rows = g[big // 2: big // 2 + n, :]
    cols = s[:, big // 2: big // 2 + n]
    prod = 1.0
    for q in range(n):
        var = rows[q] @ r @ rows[q]
        prod *= var * (cols[:, q] @ cols[:, q])
    return -10.0 / n * math.log10(prod)


def search_lap4():
    best = (None, -1e9)
    # lifts on (d0, d1): d1 += a*d0; d0 += b*d1; d1 += c*d0
    for a in np.arange(-0.9, 0.91, 0.1):
        for b in np.arange(-0.9, 0.91, 0.1):
            for c in np.arange(-0.9, 0.91, 0.1):
                consts = [(1, 0, a), (0, 1, b), (1, 0, c)]
                cg = coding_gain(consts, 2, 4)
                if cg > best[1]:
                    best = ((a, b, c), cg)
    a, b, c = best[0]
    for _ in range(3):
        for idx in range(3):
            cur = [a, b, c]
            for delta in np.arange(-0.08, 0.081, 0.01):
                trial = cur.copy()
                trial[idx] += delta
                consts = [(1, 0, trial[0]), (0, 1, trial[1]), (1, 0, trial[2])]
                cg = coding_gain(consts, 2, 4)
                if cg > best[1]:
                    best = (tuple(trial), cg)
            a, b, c = best[0]
    return best


def search_lap8():
    seq = [(1, 0), (0, 1), (3, 2), (2, 3), (2, 0), (3, 1), (0, 2), (1, 3)]
    vals = [0.0] * len(seq)

    def cg_of(v):
        return coding_gain([(i, j, c) for (i, j), c in zip(seq, v)], 4, 8)

    best = cg_of(vals)
    for _ in range(6):
        for idx in range(len(seq)):
            for delta in np.arange(-0.6, 0.61, 0.05):
                trial = vals.copy()
                trial[idx] += delta
                cg = cg_of(trial)
                if cg > best:
                    best = cg
                    vals = trial
    return vals, best


BUILT = {}

if __name__ == "__main__":
    sizes = [4, 8, 16, 32]
    for n in sizes:
        BUILT[n] = build(n)
        plan, out, worst = BUILT[n]
        print(f"n={n}: ops={len(plan.ops)} max_int_noise={worst:.2f}")
    text = emit(sizes)
    with open("src/transform_plan.inc", "w") as f:
        f.write(text)
    print("wrote src/transform_plan.inc")

    (a, b, c), cg = search_lap4()
    print(f"lap4 lifts d1+={a:.3f}*d0 d0+={b:.3f}*d1 d1+={c:.3f}*d0  cg={cg:.4f} dB")
    plain = coding_gain([], 2, 4)
    print(f"lap4 no-V cg={plain:.4f} dB, plain DCT cg={coding_gain([], 0, 4):.4f} dB")
    q = [round(v * (1 << QBITS)) for v in (a, b, c)]
    print(f"lap4 q14 constants: {q}")

    vals, cg8 = search_lap8()
    print(f"lap8 cg={cg8:.4f} dB vs no-V {coding_gain([], 4, 8):.4f} dB")
    print("lap8 q14 constants:", [round(v * (1 << QBITS)) for v in vals])
