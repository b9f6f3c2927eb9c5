"""Hermitian lattices over O_F: Gram matrices, Jordan forms, invariants.

A lattice is always presented by the Gram matrix of a basis,
G[i][j] = h(x_i, x_j) with h conjugate-linear in the first slot.  Jordan
decomposition at an odd ramified prime splits any nondegenerate form into
unary blocks <u*(-pi0)^c> (even scale 2c) and odd hyperbolic planes of
scale 2b+1; scales, per-scale ranks and per-scale determinant classes
classify the lattice up to isometry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from hermdens.linalg import (
    Matrix,
    hnf,
    identity,
    kmat,
    lattice_key,
    mat_conj_t,
    mat_det,
    mat_inv,
    mat_mul,
)
from hermdens.ring import Extended, Rational, RingConfig

UnitClass = Union[int, str]


@dataclass(frozen=True)
class GramMatrix:
    """Nondegenerate Hermitian Gram matrix; diagonal automatically lies in F0."""

    ring: RingConfig
    entries: Matrix

    def __post_init__(self) -> None:
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if self.entries[j][i] != self.entries[i][j].conj:
                    raise ValueError("Gram matrix must be conjugate-symmetric")
        if n:
            d = mat_det(self.entries)
            if not d:
                raise ValueError("degenerate Gram matrix")
            object.__setattr__(self, "_det", d.f0)
        else:
            object.__setattr__(self, "_det", Fraction(1))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def det(self) -> Fraction:
        return self._det  # type: ignore[attr-defined]

    @property
    def sign(self) -> int:
        """chi((-1)^(n(n-1)/2) det)."""
        n = self.n
        t = Fraction(-1) ** (n * (n - 1) // 2) * self.det
        return self.ring.chi(t)

    def entry(self, i: int, j: int) -> Extended:
        return self.entries[i][j]

    def perp(self, other: "GramMatrix") -> "GramMatrix":
        if other.ring != self.ring:
            raise ValueError("mixed rings in orthogonal sum")
        zero = self.ring.zero
        n1, n2 = self.n, other.n
        rows = []
        for i in range(n1):
            rows.append(tuple(self.entries[i]) + (zero,) * n2)
        for i in range(n2):
            rows.append((zero,) * n1 + tuple(other.entries[i]))
        return GramMatrix(self.ring, kmat(rows))

    def scale_form(self, c: Rational) -> "GramMatrix":
        """Multiply the form by a scalar from F0."""
        return GramMatrix(self.ring, kmat([[x * c for x in row] for row in self.entries]))

    def pi_scaled(self, k: int) -> "GramMatrix":
        """Gram of pi^k L: the form scales by (-pi0)^k."""
        return self.scale_form((-self.ring.pi0) ** k)

    def rebased(self, c: Matrix) -> "GramMatrix":
        """Gram C* G C of the basis with coordinate columns C."""
        return GramMatrix(self.ring, mat_mul(mat_conj_t(c), mat_mul(self.entries, c)))

    @property
    def min_val(self) -> Union[int, float]:
        return min(x.val for row in self.entries for x in row)

    @property
    def is_integral(self) -> bool:
        return all(x.is_integral for row in self.entries for x in row)

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(repr(x) for x in row) for row in self.entries)
        return f"Gram[{rows}]"


@dataclass(frozen=True)
class JordanBlock:
    """One Jordan constituent: unary <u*(-pi0)^(scale/2)> or hyperbolic plane."""

    kind: str  # "unary" | "hyperbolic"
    scale: int  # pi-valuation of the block (even for unary, odd for hyperbolic)
    unit_chi: int  # chi of the unit part (unary); +1 for hyperbolic planes
    gram: Matrix

    @property
    def rank(self) -> int:
        return 1 if self.kind == "unary" else 2


@dataclass(frozen=True)
class LatticeInvariants:
    fund: tuple[int, ...]
    vL: int
    tL: int
    sign: int
    t_o: int


def std_lattice(
    ring: RingConfig,
    kind: str,
    *,
    n: Optional[int] = None,
    eps: Optional[int] = None,
    i: Optional[int] = None,
    entries: Optional[Sequence] = None,
) -> GramMatrix:
    """Standard lattices: I(n, eps), H_i, H^(n,i)_eps, diagonal lists.

    kinds: "I" (n, eps); "H" (i, default -1); "Hni" (n, i, eps);
    "diag" (entries: literal rationals or (unit, exponent) pairs meaning
    u*(-pi0)^exponent with unit 1 or 's').
    """
    if kind == "I":
        if n is None or eps not in (1, -1):
            raise ValueError("I requires n and eps=±1")
        if n == 0:
            if eps == -1:
                raise ValueError("I(0,-1) does not exist")
            return GramMatrix(ring, ())
        nu = 1 if ring.chi(Fraction(-1) ** (n * (n - 1) // 2)) == eps else ring.s
        diag = [Fraction(1)] * (n - 1) + [Fraction(nu)]
        g = std_lattice(ring, "diag", entries=diag)
        assert g.sign == eps
        return g
    if kind == "H":
        e = -1 if i is None else i
        h = ring.pi**e
        zero = ring.zero
        return GramMatrix(ring, kmat([[zero, h], [h.conj, zero]]))
    if kind == "Hni":
        if n is None or i is None or eps not in (1, -1):
            raise ValueError("Hni requires n, i, eps=±1")
        if n - 2 * i < 0:
            raise ValueError(f"H^({n},{i}) needs n - 2i >= 0")
        g = std_lattice(ring, "I", n=n - 2 * i, eps=eps)
        for _ in range(i):
            g = std_lattice(ring, "H").perp(g)
        return g
    if kind == "diag":
        if entries is None:
            raise ValueError("diag requires entries")
        vals: list[Fraction] = []
        for it in entries:
            if isinstance(it, tuple):
                u, c = it
                u = ring.s if u == "s" else u
                vals.append(Fraction(u) * (-ring.pi0) ** c)
            else:
                vals.append(Fraction(it))
        if any(v == 0 for v in vals):
            raise ValueError("degenerate diagonal entry")
        zero = ring.zero
        rows = [
            [ring.ext(v) if ii == jj else zero for jj in range(len(vals))]
            for ii, v in enumerate(vals)
        ]
        return GramMatrix(ring, kmat(rows))
    raise ValueError(f"unknown standard lattice kind {kind!r}")


def _min_entry(g: list[list[Extended]], k: int) -> tuple[int, int]:
    n = len(g)
    best = None
    best_val = None
    for i in range(k, n):
        for j in range(k, n):
            v = g[i][j].val
            if best_val is None or v < best_val:
                best_val, best = v, (i, j)
    return best  # type: ignore[return-value]


def jordan_form(lat: GramMatrix) -> tuple[tuple[JordanBlock, ...], Matrix]:
    """Jordan decomposition: blocks sorted by scale and B with B*GB block-diagonal."""
    ring = lat.ring
    n = lat.n
    if n == 0:
        return (), ()
    b = [list(col) for col in zip(*identity(ring, n))]  # columns
    gram = [list(row) for row in lat.entries]

    def regram() -> None:
        bm = kmat([[b[j][i] for j in range(n)] for i in range(n)])
        gm = mat_mul(mat_conj_t(bm), mat_mul(lat.entries, bm))
        for i in range(n):
            for j in range(n):
                gram[i][j] = gm[i][j]

    def swap_cols(i: int, j: int) -> None:
        b[i], b[j] = b[j], b[i]
        regram()

    def add_col(dst: int, src: int, f: Extended) -> None:
        # x_dst += f * x_src
        b[dst] = [x + f * y for x, y in zip(b[dst], b[src])]
        regram()

    spans: list[tuple[str, int]] = []  # (kind, start index) in processing order
    k = 0
    while k < n:
        i, j = _min_entry(gram, k)
        m = gram[i][j].val
        if i == j or (i != j and gram[i][i].val == m):
            pass
        elif gram[j][j].val == m:
            i = j
        elif m % 2 == 0:
            add_col(j, i, ring.one)
            i = j
        else:
            # odd scale: split the hyperbolic pair (i, j)
            if i > j:
                i, j = j, i
            if i != k:
                swap_cols(i, k)
            jj = j if j != k else i
            if jj != k + 1:
                swap_cols(jj, k + 1)
            s = kmat([[gram[k][k], gram[k][k + 1]], [gram[k + 1][k], gram[k + 1][k + 1]]])
            sinv = mat_inv(s)
            for c in range(k + 2, n):
                rhs = (gram[k][c], gram[k + 1][c])
                f0 = sinv[0][0] * rhs[0] + sinv[0][1] * rhs[1]
                f1 = sinv[1][0] * rhs[0] + sinv[1][1] * rhs[1]
                if f0:
                    add_col(c, k, -f0)
                if f1:
                    add_col(c, k + 1, -f1)
            spans.append(("hyperbolic", k))
            k += 2
            continue
        # unary pivot at position i with minimal valuation
        if i != k:
            swap_cols(i, k)
        piv = gram[k][k]
        for c in range(k + 1, n):
            if gram[k][c]:
                add_col(c, k, -(gram[k][c] / piv))
        spans.append(("unary", k))
        k += 1

    blocks: list[JordanBlock] = []
    for kind, start in spans:
        if kind == "unary":
            entry = gram[start][start]
            t0, v = ring.unit_part(entry.f0)
            blocks.append(
                JordanBlock("unary", 2 * v, ring.chi(t0), kmat([[entry]]))
            )
        else:
            sub = kmat(
                [
                    [gram[start][start], gram[start][start + 1]],
                    [gram[start + 1][start], gram[start + 1][start + 1]],
                ]
            )
            blocks.append(JordanBlock("hyperbolic", int(sub[0][1].val), 1, sub))
    order = sorted(range(len(blocks)), key=lambda t: (blocks[t].scale, blocks[t].kind))
    col_of_block = []
    for t in order:
        start = spans[t][1]
        col_of_block.extend(range(start, start + blocks[t].rank))
    bmat = kmat([[b[c][r] for c in col_of_block] for r in range(n)])
    return tuple(blocks[t] for t in order), bmat


def invariants(lat: GramMatrix) -> LatticeInvariants:
    blocks, _ = jordan_form(lat)
    fund: list[int] = []
    for blk in blocks:
        fund.extend([blk.scale] * blk.rank)
    fund.sort()
    v_l = fund[0] if fund else 0
    return LatticeInvariants(
        fund=tuple(fund),
        vL=v_l,
        tL=sum(1 for a in fund if a >= 1),
        sign=lat.sign,
        t_o=sum(1 for a in fund if a != -1),
    )


def isometry_key(lat: GramMatrix) -> tuple:
    """Complete isometry invariant: per-scale ranks and determinant classes."""
    blocks, _ = jordan_form(lat)
    agg: dict[int, list[int]] = {}
    for blk in blocks:
        rank, chi = agg.setdefault(blk.scale, [0, 1])
        agg[blk.scale][0] = rank + blk.rank
        if blk.kind == "unary":
            agg[blk.scale][1] = chi * blk.unit_chi
    return tuple((sc, r, c) for sc, (r, c) in sorted(agg.items()))


def std_from_key(ring: RingConfig, key: tuple) -> GramMatrix:
    """Standard block-diagonal representative of an isometry class.

    Inverse of isometry_key up to isometry: odd scales become hyperbolic
    planes, each even scale 2c becomes diag((-pi0)^c, ..., u*(-pi0)^c) with
    chi(u) carrying the determinant class.
    """
    grams: list[GramMatrix] = []
    for scale, rank, chiv in key:
        if scale % 2:
            if rank % 2 or chiv != 1:
                raise ValueError(f"invalid key entry {(scale, rank, chiv)}")
            for _ in range(rank // 2):
                grams.append(std_lattice(ring, "H", i=scale))
        else:
            c = scale // 2
            entries: list = [(1, c)] * (rank - 1)
            entries.append((1 if chiv == 1 else "s", c))
            grams.append(std_lattice(ring, "diag", entries=entries))
    out = grams[0]
    for g in grams[1:]:
        out = out.perp(g)
    assert isometry_key(out) == key
    return out


def dual_gram(lat: GramMatrix) -> GramMatrix:
    """Gram of the dual lattice in the dual basis: G^(-1)."""
    return GramMatrix(lat.ring, mat_inv(lat.entries))


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for s in range(k):
        num *= q ** (n - s) - 1
        den *= q ** (s + 1) - 1
    assert num % den == 0
    return num // den


def subspace_alt_sum(m: int, q: int) -> int:
    """1 + sum_i (-1)^i q^(i(i-1)/2) [m choose i]_q; collapses to [m == 0]."""
    if m < 0:
        raise ValueError("m must be >= 0")
    total = 1
    for i in range(1, m + 1):
        total += (-1) ** i * q ** (i * (i - 1) // 2) * gaussian_binomial(m, i, q)
    return total


def _rref_subspaces(n: int, i: int, q: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    """All i-dimensional subspaces of F_q^n as reduced-echelon row bases."""
    for pivots in itertools.combinations(range(n), i):
        free = [
            (r, c)
            for r in range(i)
            for c in range(n)
            if c > pivots[r] and c not in pivots
        ]
        for fill in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * n for _ in range(i)]
            for r, pc in enumerate(pivots):
                rows[r][pc] = 1
            for (r, c), v in zip(free, fill):
                rows[r][c] = v
            yield tuple(tuple(r) for r in rows)


def superlattice_bases(lat: GramMatrix, i: int) -> list[Matrix]:
    """Canonical bases (in original coordinates) of all L' with dim(L'/L) = i."""
    ring = lat.ring
    n = lat.n
    if not 0 <= i <= n:
        raise ValueError("need 0 <= i <= n")
    pinv = ring.pi.inverse()
    out = []
    for rows in _rref_subspaces(n, i, ring.q):
        gens = [tuple(col) for col in zip(*identity(ring, n))]
        for w in rows:
            gens.append(tuple(pinv * wi for wi in w))
        out.append(hnf(ring, gens))
    return out


def superlattices(lat: GramMatrix, i: int) -> list[GramMatrix]:
    """Grams of all L' with L ⊆ L' ⊆ pi^(-1) L and dim_(F_q)(L'/L) = i."""
    return [lat.rebased(c) for c in superlattice_bases(lat, i)]


def integral_superlattices(lat: GramMatrix, budget: int = 200_000) -> list[GramMatrix]:
    """All integral L' ⊇ L, reached by index-q steps, deduplicated canonically."""
    if not lat.is_integral:
        raise ValueError("integral_superlattices requires an integral lattice")
    ring = lat.ring
    n = lat.n
    start = identity(ring, n)
    seen = {lattice_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for base in frontier:
            cur = lat.rebased(base)
            for step in superlattice_bases(cur, 1):
                cand = hnf(ring, [tuple(mat_mul(base, step)[r][c] for r in range(n)) for c in range(n)])
                key = lattice_key(cand)
                if key in seen:
                    continue
                if lat.rebased(cand).is_integral:
                    seen[key] = cand
                    nxt.append(cand)
                if len(seen) > budget:
                    raise RuntimeError("integral superlattice budget exceeded")
        frontier = nxt
    return [lat.rebased(b) for _, b in sorted(seen.items())]


def _parse_diag_arg(ring: RingConfig, tok: str) -> Fraction:
    tok = tok.strip()
    parts = tok.split("*")
    val = Fraction(1)
    for part in parts:
        part = part.strip()
        if part == "s":
            val *= ring.s
        elif part.startswith("pi0"):
            rest = part[3:]
            exp = 1
            if rest.startswith("^"):
                exp = int(rest[1:])
            elif rest:
                raise ValueError(f"bad diag token {tok!r}")
            val *= ring.pi0**exp
        else:
            val *= Fraction(part)
    return val


def parse_gram(ring: RingConfig, text: str) -> GramMatrix:
    """Gram DSL: `diag(u1*pi0^a, ...)`, `Hodd(e)`, `H`, joined with `+`.

    Units are written 1 or s; pi0 denotes the uniformizer of F0.
    """
    total: Optional[GramMatrix] = None
    depth = 0
    terms, cur = [], []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            terms.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    terms.append("".join(cur))
    for term in terms:
        term = term.strip()
        if not term:
            raise ValueError("empty term in Gram expression")
        if term == "H":
            g = std_lattice(ring, "H")
        elif term.startswith("Hodd(") and term.endswith(")"):
            e = int(term[5:-1])
            if e < 1 or e % 2 == 0:
                raise ValueError(f"Hodd wants a positive odd scale, got {e}")
            g = std_lattice(ring, "H", i=e)
        elif term.startswith("diag(") and term.endswith(")"):
            args = term[5:-1].split(",")
            g = std_lattice(
                ring, "diag", entries=[_parse_diag_arg(ring, a) for a in args]
            )
        else:
            raise ValueError(f"cannot parse Gram term {term!r}")
        total = g if total is None else total.perp(g)
    assert total is not None
    return total
