"""Exact linear algebra over F = F0(pi) and its valuation ring O_F.

Matrices are row-major tuples of tuples of Extended scalars.  The routines
here are the shared workhorses: field-level elimination (det, inverse,
solve), canonical pi-adic Hermite forms for O_F-lattices given by
generators, Smith normal form over O_F, and canonical residue reduction
mod pi^e.  Everything is exact; no precision management.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

from hermdens.ring import INF, Extended, RingConfig

Matrix = tuple[tuple[Extended, ...], ...]


def kmat(rows: Iterable[Iterable[Extended]]) -> Matrix:
    return tuple(tuple(row) for row in rows)


def mat_dims(m: Matrix) -> tuple[int, int]:
    return len(m), len(m[0]) if m else 0


def identity(ring: RingConfig, n: int) -> Matrix:
    return kmat(
        [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
    )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = mat_dims(a)
    rb, cb = mat_dims(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {ra}x{ca} * {rb}x{cb}")
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            acc = a[i][0] * b[0][j]
            for k in range(1, ca):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return kmat(out)


def mat_conj_t(a: Matrix) -> Matrix:
    r, c = mat_dims(a)
    return kmat([[a[i][j].conj for i in range(r)] for j in range(c)])


def mat_scale(a: Matrix, c: Union[Extended, int, Fraction]) -> Matrix:
    return kmat([[x * c for x in row] for row in a])


def mat_vec(a: Matrix, v: Sequence[Extended]) -> tuple[Extended, ...]:
    r, c = mat_dims(a)
    if c != len(v):
        raise ValueError("shape mismatch in mat_vec")
    return tuple(
        sum((a[i][k] * v[k] for k in range(1, c)), a[i][0] * v[0]) for i in range(r)
    )


def mat_det(a: Matrix) -> Extended:
    """Determinant by fraction-exact Gaussian elimination over the field F."""
    n, m = mat_dims(a)
    if n != m:
        raise ValueError("det of non-square matrix")
    if n == 0:
        raise ValueError("det of empty matrix")
    work = [list(row) for row in a]
    ring = a[0][0].ring
    det = ring.one
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            return ring.zero
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            det = -det
        det = det * work[col][col]
        inv = work[col][col].inverse()
        for r in range(col + 1, n):
            if work[r][col]:
                f = work[r][col] * inv
                for c in range(col, n):
                    work[r][c] = work[r][c] - f * work[col][c]
    return det


def mat_inv(a: Matrix) -> Matrix:
    """Inverse over the field F by Gauss-Jordan elimination."""
    n, m = mat_dims(a)
    if n != m:
        raise ValueError("inverse of non-square matrix")
    ring = a[0][0].ring
    work = [list(row) + list(identity(ring, n)[i]) for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        inv = work[col][col].inverse()
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return kmat([row[n:] for row in work])


def solve_upper(b: Matrix, x: Sequence[Extended]) -> tuple[Extended, ...]:
    """Solve B c = x for upper-triangular B with nonzero diagonal."""
    n, m = mat_dims(b)
    if n != m or n != len(x):
        raise ValueError("shape mismatch in solve_upper")
    c: list[Extended] = [b[0][0].ring.zero] * n
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc = acc - b[i][j] * c[j]
        c[i] = acc / b[i][i]
    return tuple(c)


def reduce_mod_pi(x: Extended, e: int) -> Extended:
    """Canonical representative of x mod pi^e (digits at pi-positions < e survive)."""
    p = x.ring.p
    ja = (e + 1) // 2
    jb = e // 2
    return Extended(x.ring, _ratmod_general(x.a, p, ja), _ratmod_general(x.b, p, jb))


def _ratmod_general(x: Fraction, p: int, j: int) -> Fraction:
    """Canonical representative of x mod p^j Z_p for rational x with any denominator."""
    if x == 0:
        return x
    den = x.denominator
    k = 0
    d = den
    while d % p == 0:
        d //= p
        k += 1
    e2 = j + k
    if e2 <= 0:
        return Fraction(0)
    mod = p**e2
    # invert the p-free denominator part mod p^e2
    dinv = pow(d, -1, mod)
    a = (x.numerator * dinv) % mod
    return Fraction(a, p**k)


def hnf(ring: RingConfig, cols: Sequence[Sequence[Extended]]) -> Matrix:
    """Canonical upper-triangular O_F-basis of the lattice generated by cols.

    cols is a list of length-m column vectors spanning a full-rank lattice in
    F^m.  The result B is m x m upper triangular, pivot B[i][i] = pi^(e_i)
    exactly, and entries above each pivot are reduced mod the pivot of their
    row; two generating sets of the same lattice give identical output.
    """
    if not cols:
        raise ValueError("empty generating set")
    m = len(cols[0])
    work = [list(c) for c in cols]
    if any(len(c) != m for c in work):
        raise ValueError("ragged columns")
    basis: list[list[Extended]] = [[] for _ in range(m)]
    for row in range(m - 1, -1, -1):
        piv_idx = None
        piv_val = INF
        for idx, c in enumerate(work):
            v = c[row].val
            if v < piv_val:
                piv_val = v
                piv_idx = idx
        if piv_idx is None or piv_val is INF:
            raise ValueError(f"generators are not full rank (row {row})")
        piv_col = work.pop(piv_idx)
        e = piv_col[row].val
        unit = piv_col[row] / ring.pi ** int(e)
        piv_col = [x / unit for x in piv_col]
        for c in work:
            if c[row]:
                f = c[row] / piv_col[row]
                for i in range(row + 1):
                    c[i] = c[i] - f * piv_col[i]
        basis[row] = piv_col
    b = [[basis[j][i] for j in range(m)] for i in range(m)]
    # reduce entries above each pivot, bottom row first
    for i in range(m - 1, -1, -1):
        e_i = int(b[i][i].val)
        for j in range(i + 1, m):
            r = reduce_mod_pi(b[i][j], e_i)
            f = (b[i][j] - r) / b[i][i]
            if f:
                for k in range(i + 1):
                    b[k][j] = b[k][j] - f * b[k][i]
    return kmat(b)


def hnf_pivots(b: Matrix) -> tuple[int, ...]:
    return tuple(int(b[i][i].val) for i in range(len(b)))


def lattice_key(b: Matrix) -> tuple:
    """Hashable canonical key of an HNF basis."""
    return tuple((x.a, x.b) for row in b for x in row)


def in_lattice(b: Matrix, x: Sequence[Extended]) -> bool:
    """Membership of x in the lattice with upper-triangular basis b."""
    c = solve_upper(b, x)
    return all(ci.is_integral for ci in c)


def lattice_contains(b_outer: Matrix, b_inner: Matrix) -> bool:
    n = len(b_inner)
    return all(in_lattice(b_outer, tuple(b_inner[i][j] for i in range(n))) for j in range(n))


def snf(ring: RingConfig, a: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form over O_F: returns (U, D, V) with D = U a V.

    U, V are invertible over O_F (products of unit row/column operations),
    D is diagonal with entries pi^(e_1) | pi^(e_2) | ... or zero.  To solve
    a u = t, put w = V^(-1) u: D w = U t, so solutions are u = V w.
    """
    rows, cols = mat_dims(a)
    work = [list(r) for r in a]
    u = [list(r) for r in identity(ring, rows)]
    v = [list(r) for r in identity(ring, cols)]
    for k in range(min(rows, cols)):
        piv_r = piv_c = None
        piv_val = INF
        for i in range(k, rows):
            for j in range(k, cols):
                val = work[i][j].val
                if val < piv_val:
                    piv_val, piv_r, piv_c = val, i, j
        if piv_val is INF:
            break
        if piv_r != k:
            work[k], work[piv_r] = work[piv_r], work[k]
            u[k], u[piv_r] = u[piv_r], u[k]
        if piv_c != k:
            for r in work:
                r[k], r[piv_c] = r[piv_c], r[k]
            for r in v:
                r[k], r[piv_c] = r[piv_c], r[k]
        e = int(work[k][k].val)
        unit = work[k][k] / ring.pi**e
        inv_unit = unit.inverse()
        work[k] = [x * inv_unit for x in work[k]]
        u[k] = [x * inv_unit for x in u[k]]
        for i in range(k + 1, rows):
            if work[i][k]:
                f = work[i][k] / work[k][k]
                work[i] = [x - f * y for x, y in zip(work[i], work[k])]
                u[i] = [x - f * y for x, y in zip(u[i], u[k])]
        for j in range(k + 1, cols):
            if work[k][j]:
                f = work[k][j] / work[k][k]
                for r in work:
                    r[j] = r[j] - f * r[k]
                for r in v:
                    r[j] = r[j] - f * r[k]
    return kmat(u), kmat(work), kmat(v)
