"""Derived local densities on the analytic side of the comparison.

The derived density of an integral target combines the derivative of its
density against the self-dual-up-to-sign base with correction densities
against the plane-padded bases, weighted by coefficients solved from an
upper-triangular linear system.  Everything is exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from hermdens.lattice import GramMatrix, std_lattice, superlattices
from hermdens.ring import RingConfig
from hermdens.density.closed import isotropic_count, ortho_order
from hermdens.density.engine import alpha


def family_size(n: int, eps: int) -> int:
    """Number of plane-padded bases H^(n,i) on the eps side."""
    if n % 2:
        return (n - 1) // 2
    return (n + eps) // 2


def self_density(ring: RingConfig, n: int, eps: int) -> int:
    """alpha(I(n,-eps), I(n,-eps)): the order of the residue orthogonal group."""
    if n % 2:
        return ortho_order(ring.q, n)
    return ortho_order(ring.q, n, -eps)


@dataclass(frozen=True)
class CoefficientTable:
    """Solved correction coefficients for one (n, eps) family."""

    n: int
    eps: int
    a: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]


_TABLES: dict[tuple, CoefficientTable] = {}


def _a_entry(ring: RingConfig, n: int, eps: int, i: int, j: int) -> Fraction:
    """alpha(H^(n,j), H^(n,i)) evaluated at X = 1, in closed form."""
    q = ring.q
    if j < i:
        return Fraction(0)
    diag = Fraction(1)
    for s in range(1, j + 1):
        diag *= 1 - Fraction(q) ** (-2 * s)
    diag *= ortho_order(q, n - 2 * j, eps)
    if i == j:
        return diag
    d = (n - 2 * i - 1) // 2 if n % 2 else (n - 2 * i - 1 + eps) // 2
    return diag * isotropic_count(q, n - 2 * i, d, j - i)


def coefficient_table(ring: RingConfig, n: int, eps: int) -> CoefficientTable:
    """Correction coefficients c^(n,i) solved from the triangular system."""
    if eps not in (1, -1):
        raise ValueError("eps must be +-1")
    if n < 1:
        raise ValueError("n must be >= 1")
    key = (ring.p, str(ring.twist), n, eps)
    hit = _TABLES.get(key)
    if hit is not None:
        return hit
    r = family_size(n, eps)
    a = tuple(
        tuple(_a_entry(ring, n, eps, i, j) for j in range(1, r + 1))
        for i in range(1, r + 1)
    )
    base = std_lattice(ring, "I", n=n, eps=-eps)
    b = tuple(
        alpha(base, std_lattice(ring, "Hni", n=n, i=i, eps=eps)).alpha_prime
        for i in range(1, r + 1)
    )
    c: list[Fraction] = [Fraction(0)] * r
    for i in range(r - 1, -1, -1):
        acc = -2 * b[i] - sum(a[i][j] * c[j] for j in range(i + 1, r))
        c[i] = acc / a[i][i]
    table = CoefficientTable(n=n, eps=eps, a=a, b=b, c=tuple(c))
    _TABLES[key] = table
    return table


def pden(l_lat: GramMatrix) -> Fraction:
    """Derived density of a nondegenerate target of any rank.

    Vanishes whenever the target valuation is negative.
    """
    ring = l_lat.ring
    n = l_lat.n
    if n == 0:
        return Fraction(0)
    if l_lat.min_val <= -2:
        return Fraction(0)
    eps = l_lat.sign
    table = coefficient_table(ring, n, eps)
    base = std_lattice(ring, "I", n=n, eps=-eps)
    out = 2 * alpha(base, l_lat).alpha_prime
    for i, ci in enumerate(table.c, start=1):
        padded = std_lattice(ring, "Hni", n=n, i=i, eps=eps)
        out += ci * alpha(padded, l_lat).value_at(Fraction(1))
    return out / self_density(ring, n, eps)


def pden_prim(l_lat: GramMatrix, n1: int) -> Fraction:
    """Derived density primitive in the first n1 coordinates.

    The target must split off those coordinates orthogonally; the
    alternating sum runs over enlargements of the leading block inside its
    pi^(-1)-dual.
    """
    ring = l_lat.ring
    q = ring.q
    n = l_lat.n
    if not 1 <= n1 <= n:
        raise ValueError("n1 out of range")
    for i in range(n1):
        for j in range(n1, n):
            if l_lat.entries[i][j]:
                raise ValueError("target must split off its first n1 coordinates")
    l1 = _subgram(l_lat, range(n1))
    rest = _subgram(l_lat, range(n1, n))
    out = pden(l_lat)
    for i in range(1, n1 + 1):
        weight = Fraction(-1) ** (i - 1) * Fraction(q) ** (i * (i - 1) // 2)
        for lift in superlattices(l1, i):
            if lift.min_val <= -2:
                continue
            out -= weight * pden(lift.perp(rest))
    return out


def _subgram(l_lat: GramMatrix, idx) -> GramMatrix:
    idx = tuple(idx)
    return GramMatrix(
        l_lat.ring,
        tuple(tuple(l_lat.entries[i][j] for j in idx) for i in idx),
    )
