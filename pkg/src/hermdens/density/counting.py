"""Counting of Gram-matrix congruence solutions on pi-adic boxes.

count_reps(M, L, d) counts tuples x_1..x_n over (O/pi^{2d})^m whose pairing
matrix matches L: diagonal entries mod pi^{2d}, off-diagonal mod pi^{2d-1}.
Two interchangeable paths are kept: a plain backtracking enumeration (the
reference, budget-capped) and a structured engine that solves the linear
prefix constraints, splits the induced quadratic form on the solution box
into Jordan blocks, and multiplies per-block value distributions.  Middle
columns of the structured path are compressed into content classes; every
class carries an exact weight and the per-column class weights are asserted
against an independently counted total.
"""

from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from hermdens.lattice import GramMatrix, invariants, jordan_form
from hermdens.linalg import Matrix, kmat, snf
from hermdens.ring import INF, Extended, RingConfig
from hermdens.density import dists

DEFAULT_BUDGET = 4_000_000
PLAIN_AUTO_LIMIT = 250_000


def resolve_budget(budget: Optional[int]) -> int:
    """Explicit budget, else HERMDENS_ENUM_LIMIT, else the module default."""
    if budget is not None:
        return budget
    env = os.environ.get("HERMDENS_ENUM_LIMIT")
    return int(env) if env else DEFAULT_BUDGET


class CountBudgetExceeded(RuntimeError):
    """Raised when the plain enumeration would exceed its iteration budget."""


@dataclass(frozen=True)
class RepCount:
    """Raw congruence-solution count at level d with its q-power rescaling."""

    d: int
    raw: int
    normalized: Fraction

    @staticmethod
    def make(q: int, d: int, m: int, n: int, raw: int) -> "RepCount":
        return RepCount(d, raw, Fraction(raw) * Fraction(q) ** (-d * n * (2 * m - n)))


def stable_level(lat: GramMatrix) -> int:
    """Smallest level at which normalized counts against lat have stabilized."""
    fund = invariants(lat).fund
    top = max(fund) if fund else 0
    return max(1, top + 2)


# --------------------------------------------------------------------------
# Integer micro-kernel.
#
# Elements of O/pi^{2d} are pairs (a, b) = a + b pi with a, b in Z/p^d.
# Products are taken in Z[pi]/(pi^2 - pi0) with components kept mod p^{d+1}
# so that pi-scaled diagonal checks stay exact.


class _IntKernel:
    def __init__(self, ring: RingConfig, d: int, mg: Matrix):
        self.ring = ring
        self.d = d
        self.p = ring.p
        self.md = ring.p**d
        self.big = ring.p ** (d + 1)
        self.pi0 = ring.twist * ring.p
        self.m = len(mg)
        # pi * M entries are integral even when M has val -1 entries.
        pi = ring.pi
        self.pim = [
            [self.enc(pi * mg[k][j]) for j in range(self.m)] for k in range(self.m)
        ]

    def enc(self, x: Extended) -> tuple[int, int]:
        big = self.big
        return (_int_res(x.a, self.p, big), _int_res(x.b, self.p, big))

    def mul(self, x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
        a, b = x
        c, e = y
        big = self.big
        return ((a * c + self.pi0 * b * e) % big, (a * e + b * c) % big)

    def pair_scaled(self, x: Sequence[tuple[int, int]], y: Sequence[tuple[int, int]]) -> tuple[int, int]:
        """Components of pi*h(x, y) mod p^{d+1}."""
        big = self.big
        acc_a = acc_b = 0
        pim = self.pim
        for k, (xa, xb) in enumerate(x):
            if not (xa or xb):
                continue
            row = pim[k]
            cx = (xa, -xb)
            for j, (ya, yb) in enumerate(y):
                if not (ya or yb):
                    continue
                t = self.mul(self.mul(cx, row[j]), (ya, yb))
                acc_a += t[0]
                acc_b += t[1]
        return (acc_a % big, acc_b % big)

    def diag_matches(self, x: Sequence[tuple[int, int]], t: tuple[int, int]) -> bool:
        """pi*h(x,x) = pi*t mod pi^{2d+1}, i.e. h(x,x) = t mod pi^{2d}."""
        a, b = self.pair_scaled(x, x)
        return (a - t[0]) % self.big == 0 and (b - t[1]) % self.md == 0

    def off_matches(self, x, y, t: tuple[int, int]) -> bool:
        """pi*h(x,y) = pi*t mod pi^{2d}, i.e. h(x,y) = t mod pi^{2d-1}."""
        a, b = self.pair_scaled(x, y)
        return (a - t[0]) % self.md == 0 and (b - t[1]) % self.md == 0


def _int_res(x: Fraction, p: int, md: int) -> int:
    num, den = x.numerator, x.denominator
    return num * pow(den, -1, md) % md


def _residue_pairs(p: int, d: int) -> list[tuple[int, int]]:
    md = p**d
    return [(a, b) for a in range(md) for b in range(md)]


def _vp_capped(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


def _fq_rank(p: int, vectors: Sequence[Sequence[int]]) -> int:
    rows = [list(v) for v in vectors if any(c % p for c in v)]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [inv * a % p for a in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


# --------------------------------------------------------------------------
# Lean Gram diagonalization for the hot counting path.


def _gram_split(ring: RingConfig, g: Matrix) -> tuple[list[Matrix], Matrix]:
    """Unimodular congruence to a block diagonal of 1x1 and odd 2x2 blocks.

    Returns (blocks, C) with C* g C block diagonal, 2x2 blocks normalized to
    the standard hyperbolic shape.  Same splitting rules as
    lattice.jordan_form but O(m^3) via in-place Gram updates.
    """
    m = len(g)
    work = [[g[i][j] for j in range(m)] for i in range(m)]
    cmat = [[ring.one if i == j else ring.zero for j in range(m)] for i in range(m)]
    remaining = list(range(m))
    blocks: list[Matrix] = []
    order: list[int] = []

    def col_op(dst: int, src: int, f: Extended) -> None:
        # column dst += f * column src; the conjugate row op follows
        for r in range(m):
            cmat[r][dst] = cmat[r][dst] + f * cmat[r][src]
        for r in range(m):
            work[r][dst] = work[r][dst] + work[r][src] * f
        fc = f.conj
        for c in range(m):
            work[dst][c] = work[dst][c] + fc * work[src][c]

    while remaining:
        piv_val = INF
        diag_i = None
        for i in remaining:
            v = work[i][i].val
            if v < piv_val:
                piv_val, diag_i = v, i
        off_pair = None
        for ii, i in enumerate(remaining):
            for j in remaining[ii + 1 :]:
                v = work[i][j].val
                if v < piv_val:
                    piv_val, diag_i, off_pair = v, None, (i, j)
        assert piv_val is not INF, "degenerate Gram matrix in block split"
        if off_pair is not None and piv_val % 2 == 0:
            # move the even pivot onto the diagonal; diag vals were all larger
            i, j = off_pair
            col_op(j, i, ring.one)
            assert work[j][j].val == piv_val
            diag_i, off_pair = j, None
        if diag_i is not None:
            i = diag_i
            for k in remaining:
                if k != i and work[i][k]:
                    col_op(k, i, -(work[i][k] / work[i][i]))
            blocks.append(kmat([[work[i][i]]]))
            order.append(i)
            remaining.remove(i)
            continue
        i, j = off_pair
        s = ((work[i][i], work[i][j]), (work[j][i], work[j][j]))
        det = s[0][0] * s[1][1] - s[0][1] * s[1][0]
        for k in remaining:
            if k in (i, j):
                continue
            bi, bj = work[i][k], work[j][k]
            if not bi and not bj:
                continue
            x = (s[1][1] * bi - s[0][1] * bj) / det
            y = (-s[1][0] * bi + s[0][0] * bj) / det
            if x:
                col_op(k, i, -x)
            if y:
                col_op(k, j, -y)
        # normalize the extracted pair to the standard hyperbolic shape
        pair = kmat([[work[i][i], work[i][j]], [work[j][i], work[j][j]]])
        sub_blocks, sub_base = jordan_form(GramMatrix(ring, pair))
        assert len(sub_blocks) == 1 and sub_blocks[0].kind == "hyperbolic"
        for r in range(m):
            ci, cj = cmat[r][i], cmat[r][j]
            cmat[r][i] = ci * sub_base[0][0] + cj * sub_base[1][0]
            cmat[r][j] = ci * sub_base[0][1] + cj * sub_base[1][1]
        blocks.append(sub_blocks[0].gram)
        order.extend((i, j))
        remaining.remove(i)
        remaining.remove(j)

    cperm = kmat([[cmat[r][c] for c in order] for r in range(m)])
    return blocks, cperm


# --------------------------------------------------------------------------
# Affine-plus-quadratic kernel.

Row = tuple[tuple[Extended, ...], Extended, int]  # (coefficients, target, modulus exp)


def _affine_quadratic(
    ring: RingConfig,
    d: int,
    mg: Matrix,
    rows: Sequence[Row],
    t: Fraction,
    col_scale: Optional[Sequence[int]] = None,
) -> int:
    """Count v in (O/pi^{2d})^m with r.v = tau mod pi^e per row, h(v,v) = t mod pi^{2d}.

    col_scale restricts coordinate i to pi^{col_scale[i]} O by substitution;
    the returned count still refers to the restricted v-set (the box
    overcount divides out exactly).
    """
    p = ring.p
    m = len(mg)
    two_d = 2 * d
    pi = ring.pi

    scale_pow = None
    divisor_exp = 0
    if col_scale is not None and any(col_scale):
        scale_pow = [pi**e for e in col_scale]
        conj_pow = [x.conj for x in scale_pow]
        mg = kmat(
            [
                [conj_pow[k] * mg[k][j] * scale_pow[j] for j in range(m)]
                for k in range(m)
            ]
        )
        divisor_exp = sum(col_scale)

    scaled_rows: list[list[Extended]] = []
    scaled_taus: list[Extended] = []
    for coeffs, tau, e in rows:
        factor = pi ** (two_d - e)
        st = tau * factor
        if not st.is_integral:
            return 0
        if scale_pow is None:
            scaled_rows.append([c * factor for c in coeffs])
        else:
            scaled_rows.append([c * factor * scale_pow[j] for j, c in enumerate(coeffs)])
        scaled_taus.append(st)

    kappas = [0] * m
    if scaled_rows:
        u_mat, d_mat, v_mat = snf(ring, kmat(scaled_rows))
        k = len(scaled_rows)
        w0 = [ring.zero] * m
        for i in range(k):
            rhs = _dot(u_mat[i], scaled_taus)
            if i >= m or d_mat[i][i].val >= two_d:
                if rhs and rhs.val < two_d:
                    return 0
                continue
            e_i = int(d_mat[i][i].val)
            if rhs and rhs.val < e_i:
                return 0
            w0[i] = rhs / d_mat[i][i]
            kappas[i] = two_d - e_i
        v0 = [_dot_row(v_mat, i, w0) for i in range(m)]
        bcols = [[v_mat[r][i] * pi ** kappas[i] for r in range(m)] for i in range(m)]
    else:
        v0 = [ring.zero] * m
        bcols = [[ring.one if r == i else ring.zero for r in range(m)] for i in range(m)]

    raw = _box_quadratic_count(ring, d, mg, v0, bcols, t)
    over = p ** (sum(kappas) + divisor_exp)
    assert raw % over == 0, "box overcount does not divide the raw count"
    return raw // over


def _box_quadratic_count(
    ring: RingConfig,
    d: int,
    mg: Matrix,
    v0: Sequence[Extended],
    bcols: Sequence[Sequence[Extended]],
    t: Fraction,
) -> int:
    m = len(mg)
    mv0 = [_dot(mg[r], v0) for r in range(m)]
    t0 = _dot([c.conj for c in v0], mv0).f0
    mb = [[_dot(mg[r], bcols[i]) for i in range(m)] for r in range(m)]
    n_mat = kmat(
        [
            [
                _dot([c.conj for c in bcols[i]], [mb[r][j] for r in range(m)])
                for j in range(m)
            ]
            for i in range(m)
        ]
    )
    g_row = [_dot([c.conj for c in v0], [mb[r][i] for r in range(m)]) for i in range(m)]

    blocks, c_mat = _gram_split(ring, n_mat)
    g_c = [_dot_col(c_mat, i, g_row) for i in range(m)]

    dist: Optional[dists.Dist] = None
    offset = 0
    for blk in blocks:
        r = len(blk)
        bd = dists.block_dist(ring, d, blk, g_c[offset : offset + r])
        dist = bd if dist is None else dists.convolve(dist, bd)
        offset += r

    target = dists.resmod(t - t0, ring.p, d)
    return dist[target] if dist is not None else (1 if target == 0 else 0)


def _dot(row: Sequence[Extended], vec: Sequence[Extended]) -> Extended:
    acc = None
    for a, b in zip(row, vec):
        if not a or not b:
            continue
        term = a * b
        acc = term if acc is None else acc + term
    return acc if acc is not None else row[0].ring.zero


def _dot_row(mat: Matrix, i: int, vec: Sequence[Extended]) -> Extended:
    return _dot(mat[i], vec)


def _dot_col(mat: Matrix, i: int, vec: Sequence[Extended]) -> Extended:
    return _dot([mat[r][i] for r in range(len(vec))], vec)


# --------------------------------------------------------------------------
# Structured multi-column engine.


class _SplitEngine:
    def __init__(
        self,
        ring: RingConfig,
        d: int,
        m_lat: GramMatrix,
        l_lat: GramMatrix,
        prim_cols: int,
        check_level: int,
    ):
        self.ring = ring
        self.d = d
        self.two_d = 2 * d
        blocks, base = jordan_form(m_lat)
        self.mg = m_lat.rebased(base).entries
        self.m = m_lat.n
        self.lg = l_lat.entries
        self.n = l_lat.n
        self.prim_cols = prim_cols
        self.check_level = check_level
        self.rng = random.Random(0x5EED)
        self.kernel = _IntKernel(ring, d, self.mg)
        part_u: list[int] = []
        part_h: list[int] = []
        off = 0
        self.supported = True
        for blk in blocks:
            if blk.kind == "unary" and blk.scale == 0:
                part_u.append(off)
            elif blk.kind == "hyperbolic" and blk.scale == -1:
                part_h.extend((off, off + 1))
            else:
                self.supported = False
            off += blk.rank
        self.part_u = tuple(part_u)
        self.part_h = tuple(part_h)

    def count(self) -> int:
        if self.n == 0:
            return 1
        if self.n > 1 and not self.supported:
            raise RuntimeError(
                "structured multi-column path needs a base made of unit "
                "and scale -1 hyperbolic blocks"
            )
        return self._from_column([], 0)

    # -- column recursion ---------------------------------------------------

    def _from_column(self, xs: list, j: int) -> int:
        if j == self.n:
            return 1
        if j < self.prim_cols:
            total = self._column(xs, j, None)
            for w in self._span_vectors(xs):
                total -= self._column(xs, j, w)
            return total
        return self._column(xs, j, None)

    def _span_vectors(self, xs: list) -> Iterable[tuple[int, ...]]:
        p = self.ring.p
        basis = [[c[0] % p for c in self.kernel_vec(x)] for x in xs]
        seen = set()
        for coeffs in itertools.product(range(p), repeat=len(basis)):
            w = tuple(
                sum(c * b[i] for c, b in zip(coeffs, basis)) % p for i in range(self.m)
            )
            if w not in seen:
                seen.add(w)
                yield w

    def kernel_vec(self, x: Sequence[Extended]) -> list[tuple[int, int]]:
        return [self.kernel.enc(c) for c in x]

    def _column(self, xs: list, j: int, fixed_res: Optional[tuple[int, ...]]) -> int:
        rows = self._pairing_rows(xs, j)
        if fixed_res is not None:
            rows = rows + self._residue_rows(fixed_res)
        t = self.lg[j][j].f0
        if j == self.n - 1:
            return _affine_quadratic(self.ring, self.d, self.mg, rows, t)

        total_expected = _affine_quadratic(self.ring, self.d, self.mg, rows, t)
        if total_expected == 0:
            return 0

        cache: dict[tuple[int, int], int] = {}

        def at_least(eu: int, eh: int) -> int:
            if eu > self.two_d or eh > self.two_d:
                return 0
            key = (eu, eh)
            if key not in cache:
                cache[key] = _affine_quadratic(
                    self.ring,
                    self.d,
                    self.mg,
                    rows,
                    t,
                    col_scale=self._scale_vector(eu, eh),
                )
            return cache[key]

        eu_range = range(self.two_d + 1) if self.part_u else (self.two_d,)
        eh_range = range(self.two_d + 1) if self.part_h else (self.two_d,)
        total = 0
        weight_sum = 0
        for eu in eu_range:
            for eh in eh_range:
                w = at_least(eu, eh)
                if w == 0:
                    continue
                if self.part_u and eu < self.two_d:
                    w -= at_least(eu + 1, eh)
                if self.part_h and eh < self.two_d:
                    w -= at_least(eu, eh + 1)
                    if self.part_u and eu < self.two_d:
                        w += at_least(eu + 1, eh + 1)
                if w == 0:
                    continue
                assert w > 0, "inclusion-exclusion produced a negative class weight"
                weight_sum += w
                rep = self._find_member(rows, t, eu, eh)
                cont = self._from_column(xs + [rep], j + 1)
                if self.check_level > 0:
                    alt = self._find_member(rows, t, eu, eh, avoid=rep)
                    if alt is not None and self._from_column(xs + [alt], j + 1) != cont:
                        raise AssertionError(
                            f"content class ({eu},{eh}) at column {j} is not fine enough"
                        )
                total += w * cont
        assert weight_sum == total_expected, "class weights do not sum to the total"
        return total

    # -- rows ---------------------------------------------------------------

    def _pairing_rows(self, xs: list, j: int) -> tuple[Row, ...]:
        out = []
        for i, x in enumerate(xs):
            coeffs = tuple(
                _dot([c.conj for c in x], [self.mg[r][col] for r in range(self.m)])
                for col in range(self.m)
            )
            out.append((coeffs, self.lg[i][j], self.two_d - 1))
        return tuple(out)

    def _residue_rows(self, res: tuple[int, ...]) -> tuple[Row, ...]:
        ring = self.ring
        rows = []
        for i, wi in enumerate(res):
            coeffs = tuple(ring.one if k == i else ring.zero for k in range(self.m))
            rows.append((coeffs, ring.ext(wi), 1))
        return tuple(rows)

    def _scale_vector(self, eu: int, eh: int) -> tuple[int, ...]:
        out = [0] * self.m
        for i in self.part_u:
            out[i] = eu
        for i in self.part_h:
            out[i] = eh
        return tuple(out)

    # -- class representatives ----------------------------------------------

    def _part_content(self, enc: Sequence[tuple[int, int]], part: Sequence[int]) -> int:
        cap = self.two_d
        best = cap
        for i in part:
            a, b = enc[i]
            av = _vp_capped(a % self.kernel.md, self.ring.p, self.d)
            bv = _vp_capped(b % self.kernel.md, self.ring.p, self.d)
            best = min(best, 2 * av, 1 + 2 * bv)
        return best if part else cap

    def _class_of(self, enc: Sequence[tuple[int, int]]) -> tuple[int, int]:
        return (
            self._part_content(enc, self.part_u),
            self._part_content(enc, self.part_h),
        )

    def _satisfies(
        self,
        enc: Sequence[tuple[int, int]],
        enc_rows: Sequence[tuple[list[tuple[int, int]], tuple[int, int], int]],
        t_enc: tuple[int, int],
    ) -> bool:
        kern = self.kernel
        for coeffs, tau, exp in enc_rows:
            acc_a = acc_b = 0
            for (ca, cb), (va, vb) in zip(coeffs, enc):
                acc_a += ca * va + kern.pi0 * cb * vb
                acc_b += ca * vb + cb * va
            mod = self.ring.p**exp
            if (acc_a - tau[0]) % mod or (acc_b - tau[1]) % mod:
                return False
        return kern.diag_matches(enc, t_enc)

    def _enc_rows(self, rows: Sequence[Row]):
        """Uniformized integer form of the rows: checks mod p^ceil(e/2) parts.

        Rows are rescaled so each becomes r.v = tau mod pi^{2d}; on components
        that is a pair of mod p^d checks.
        """
        kern = self.kernel
        pi = self.ring.pi
        out = []
        for coeffs, tau, e in rows:
            factor = pi ** (self.two_d - e)
            st = tau * factor
            if not st.is_integral:
                return None
            out.append(
                (
                    [kern.enc(c * factor) for c in coeffs],
                    kern.enc(st),
                    self.d,
                )
            )
        return out

    def _find_member(
        self,
        rows: Sequence[Row],
        t: Fraction,
        eu: int,
        eh: int,
        avoid: Optional[Sequence[Extended]] = None,
    ) -> Optional[list[Extended]]:
        ring = self.ring
        kern = self.kernel
        md = kern.md
        scale = self._scale_vector(eu, eh)
        pi = ring.pi
        scaled_rows = tuple(
            (tuple(c * pi ** scale[jj] for jj, c in enumerate(coeffs)), tau, e)
            for coeffs, tau, e in rows
        )
        sol = _affine_solve_box(ring, self.d, self.m, scaled_rows)
        # a positive class weight guarantees this row system is solvable
        assert sol is not None, "nonempty class with an unsolvable row system"
        y0, ycols = sol
        # Map back to v-space: v = diag(pi^scale) y.
        v0 = [pi ** scale[r] * y0[r] for r in range(self.m)]
        cols = [[pi ** scale[r] * ycols[i][r] for r in range(self.m)] for i in range(self.m)]
        enc_v0 = [kern.enc(c) for c in v0]
        enc_cols = [[kern.enc(c) for c in col] for col in cols]
        enc_rows = self._enc_rows(rows)
        if enc_rows is None:
            return None
        t_enc = kern.enc(ring.pi * ring.ext(t))
        avoid_enc = (
            [tuple(x % md for x in kern.enc(c)) for c in avoid] if avoid is not None else None
        )
        tries = 6000 if avoid is None else 1200
        big = kern.big
        for _ in range(tries):
            cvec = [(self.rng.randrange(md), self.rng.randrange(md)) for _ in range(self.m)]
            enc = []
            for r in range(self.m):
                aa, bb = enc_v0[r]
                for i in range(self.m):
                    ca, cb = enc_cols[i][r]
                    if not (ca or cb):
                        continue
                    xa, xb = cvec[i]
                    aa += ca * xa + kern.pi0 * cb * xb
                    bb += ca * xb + cb * xa
                enc.append((aa % big, bb % big))
            if self._class_of(enc) != (eu, eh):
                continue
            if avoid_enc is not None and all(
                (a - x) % md == 0 and (b - y) % md == 0
                for (a, b), (x, y) in zip(enc, avoid_enc)
            ):
                continue
            if not self._satisfies(enc, enc_rows, t_enc):
                continue
            return [
                ring.ext(Fraction(a % md), Fraction(b % md)) for a, b in enc
            ]
        if avoid is not None:
            return None
        return self._descend_member(rows, t, eu, eh)

    def _descend_member(
        self, rows: Sequence[Row], t: Fraction, eu: int, eh: int
    ) -> list[Extended]:
        """Digit-by-digit construction, keeping the exact class count positive."""
        ring = self.ring
        p = ring.p

        def exact_count(extra: tuple[Row, ...]) -> int:
            local: dict[tuple[int, int], int] = {}

            def n_at(u: int, h: int) -> int:
                if u > self.two_d or h > self.two_d:
                    return 0
                if (u, h) not in local:
                    local[(u, h)] = _affine_quadratic(
                        ring,
                        self.d,
                        self.mg,
                        rows + extra,
                        t,
                        col_scale=self._scale_vector(u, h),
                    )
                return local[(u, h)]

            w = n_at(eu, eh)
            if self.part_u and eu < self.two_d:
                w -= n_at(eu + 1, eh)
            if self.part_h and eh < self.two_d:
                w -= n_at(eu, eh + 1)
                if self.part_u and eu < self.two_d:
                    w += n_at(eu + 1, eh + 1)
            return w

        partial = [ring.zero] * self.m

        def fixed_rows(level: int) -> tuple[Row, ...]:
            out = []
            for i in range(self.m):
                coeffs = tuple(ring.one if k == i else ring.zero for k in range(self.m))
                out.append((coeffs, partial[i], level))
            return tuple(out)

        for level in range(self.two_d):
            step = ring.pi**level
            for i in range(self.m):
                found = False
                for digit in range(p):
                    cand = partial[i] + step * ring.ext(digit)
                    saved = partial[i]
                    partial[i] = cand
                    if exact_count(fixed_rows(level + 1)) > 0:
                        found = True
                        break
                    partial[i] = saved
                if not found:
                    raise AssertionError("digit descent lost all solutions")
        enc = self.kernel_vec(partial)
        assert self._class_of(enc) == (eu, eh)
        return partial


def _affine_solve_box(
    ring: RingConfig, d: int, m: int, rows: Sequence[Row]
) -> Optional[tuple[list[Extended], list[list[Extended]]]]:
    """Solution coset (v0, box columns) of the row system, ignoring quadratics."""
    two_d = 2 * d
    pi = ring.pi
    scaled_rows, scaled_taus = [], []
    for coeffs, tau, e in rows:
        factor = pi ** (two_d - e)
        st = tau * factor
        if not st.is_integral:
            return None
        scaled_rows.append([c * factor for c in coeffs])
        scaled_taus.append(st)
    if not scaled_rows:
        ident = [[ring.one if r == i else ring.zero for r in range(m)] for i in range(m)]
        return [ring.zero] * m, ident
    u_mat, d_mat, v_mat = snf(ring, kmat(scaled_rows))
    k = len(scaled_rows)
    w0 = [ring.zero] * m
    kappas = [0] * m
    for i in range(k):
        rhs = _dot(u_mat[i], scaled_taus)
        if i >= m or d_mat[i][i].val >= two_d:
            if rhs and rhs.val < two_d:
                return None
            continue
        e_i = int(d_mat[i][i].val)
        if rhs and rhs.val < e_i:
            return None
        w0[i] = rhs / d_mat[i][i]
        kappas[i] = two_d - e_i
    v0 = [_dot_row(v_mat, i, w0) for i in range(m)]
    bcols = [[v_mat[r][i] * pi ** kappas[i] for r in range(m)] for i in range(m)]
    return v0, bcols


# --------------------------------------------------------------------------
# Plain reference enumeration.


def _plain(
    ring: RingConfig,
    d: int,
    mg: Matrix,
    lg: Matrix,
    budget: int,
    prim_cols: int,
    strata: Optional[dict],
    part_h: Optional[tuple[int, ...]],
) -> int:
    m = len(mg)
    n = len(lg)
    kern = _IntKernel(ring, d, mg)
    reps = _residue_pairs(ring.p, d)
    pi = ring.pi
    diag_t = [kern.enc(pi * lg[j][j]) for j in range(n)]
    off_t = [[kern.enc(pi * lg[i][j]) for j in range(n)] for i in range(n)]
    counter = [0]
    total = [0]
    p = ring.p

    def recurse(xs: list):
        j = len(xs)
        if j == n:
            if strata is not None:
                key = _fq_rank(p, [[x[i][0] for i in part_h] for x in xs])
                strata[key] = strata.get(key, 0) + 1
            total[0] += 1
            return
        for v in itertools.product(reps, repeat=m):
            counter[0] += 1
            if counter[0] > budget:
                raise CountBudgetExceeded(f"plain enumeration exceeded budget {budget}")
            if not kern.diag_matches(v, diag_t[j]):
                continue
            ok = True
            for i, x in enumerate(xs):
                if not kern.off_matches(x, v, off_t[i][j]):
                    ok = False
                    break
            if not ok:
                continue
            if j < prim_cols:
                vecs = [[c[0] for c in x] for x in xs] + [[c[0] for c in v]]
                if _fq_rank(p, vecs) != j + 1:
                    continue
            recurse(xs + [v])

    recurse([])
    return total[0]


# --------------------------------------------------------------------------
# Public API.


def _pick_method(ring: RingConfig, d: int, m: int, n: int, budget: int, method: str) -> str:
    if method != "auto":
        return method
    work = (ring.p ** (2 * d * m)) ** n
    return "plain" if work <= min(budget, PLAIN_AUTO_LIMIT) else "split"


def count_reps(
    m_lat: GramMatrix,
    l_lat: GramMatrix,
    d: int,
    *,
    method: str = "auto",
    budget: Optional[int] = None,
    check_level: int = 0,
) -> RepCount:
    """Count representations of l_lat by m_lat over the level-d box."""
    budget = resolve_budget(budget)
    ring = m_lat.ring
    if l_lat.ring != ring:
        raise ValueError("Gram matrices live over different rings")
    if d < 1:
        raise ValueError("level d must be at least 1")
    q = ring.q
    m, n = m_lat.n, l_lat.n
    if n == 0:
        return RepCount.make(q, d, m, n, 1)
    if l_lat.min_val <= -2:
        return RepCount.make(q, d, m, n, 0)
    chosen = _pick_method(ring, d, m, n, budget, method)
    if chosen == "plain":
        raw = _plain(ring, d, m_lat.entries, l_lat.entries, budget, 0, None, None)
    else:
        raw = _SplitEngine(ring, d, m_lat, l_lat, 0, check_level).count()
    return RepCount.make(q, d, m, n, raw)


def count_reps_primitive(
    m_lat: GramMatrix,
    l_lat: GramMatrix,
    d: int,
    prim_cols: int,
    *,
    stratify: bool = False,
    method: str = "auto",
    budget: Optional[int] = None,
    check_level: int = 0,
) -> Union[RepCount, dict[int, RepCount]]:
    """Count representations whose first prim_cols images are independent mod pi.

    With stratify=True the plain path buckets all solutions by the F_q-rank
    of their projection to the hyperbolic-block coordinates of the base.
    """
    budget = resolve_budget(budget)
    ring = m_lat.ring
    if l_lat.ring != ring:
        raise ValueError("Gram matrices live over different rings")
    if d < 1:
        raise ValueError("level d must be at least 1")
    if not 0 <= prim_cols <= l_lat.n:
        raise ValueError("prim_cols out of range")
    q = ring.q
    m, n = m_lat.n, l_lat.n
    if n == 0:
        return RepCount.make(q, d, m, n, 1)
    if l_lat.min_val <= -2:
        return RepCount.make(q, d, m, n, 0)
    if stratify:
        blocks, base = jordan_form(m_lat)
        mg = m_lat.rebased(base).entries
        part_h: list[int] = []
        off = 0
        for blk in blocks:
            if blk.kind == "hyperbolic":
                part_h.extend(range(off, off + 2))
            off += blk.rank
        strata: dict[int, int] = {}
        _plain(ring, d, mg, l_lat.entries, budget, prim_cols, strata, tuple(part_h))
        return {k: RepCount.make(q, d, m, n, v) for k, v in sorted(strata.items())}
    chosen = _pick_method(ring, d, m, n, budget, method)
    if chosen == "plain":
        raw = _plain(ring, d, m_lat.entries, l_lat.entries, budget, prim_cols, None, None)
    else:
        raw = _SplitEngine(ring, d, m_lat, l_lat, prim_cols, check_level).count()
    return RepCount.make(q, d, m, n, raw)
