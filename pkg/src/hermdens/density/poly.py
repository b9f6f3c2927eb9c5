"""Density polynomials from counted values.

alpha_poly recovers the polynomial X -> normalized count against the base
enlarged by hyperbolic planes: the value at q^{-2k} is the normalized count
for M perp H^k, and Newton interpolation with a stabilization stop returns
the exact rational polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from hermdens.lattice import GramMatrix, invariants, std_lattice, superlattices
from hermdens.density.counting import count_reps, stable_level

Rat = Union[int, Fraction]


@dataclass(frozen=True)
class DensityPoly:
    """Polynomial with exact rational coefficients, ascending order."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        c = tuple(Fraction(x) for x in self.coeffs)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def value_at(self, x: Rat) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    __call__ = value_at

    @property
    def alpha_prime(self) -> Fraction:
        """-dP/dX at X = 1."""
        return -sum(
            (i * c for i, c in enumerate(self.coeffs)), start=Fraction(0)
        )

    def __add__(self, other: "DensityPoly") -> "DensityPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        merged = list(a)
        for i, c in enumerate(b):
            merged[i] += c
        return DensityPoly(tuple(merged))

    def __sub__(self, other: "DensityPoly") -> "DensityPoly":
        return self + other.scaled(-1)

    def __mul__(self, other: "DensityPoly") -> "DensityPoly":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return DensityPoly(tuple(out))

    def scaled(self, c: Rat) -> "DensityPoly":
        return DensityPoly(tuple(Fraction(c) * x for x in self.coeffs))

    def x_shifted(self, k: int) -> "DensityPoly":
        """Multiply by X^k."""
        return DensityPoly((Fraction(0),) * k + self.coeffs)

    def x_scaled(self, c: Rat) -> "DensityPoly":
        """Substitute X -> c X."""
        return DensityPoly(
            tuple(x * Fraction(c) ** i for i, x in enumerate(self.coeffs))
        )

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DensityPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly[0]"
        terms = " + ".join(
            f"{c}" if i == 0 else (f"{c}*X" if i == 1 else f"{c}*X^{i}")
            for i, c in enumerate(self.coeffs)
            if c
        )
        return f"Poly[{terms}]"


ZERO = DensityPoly(())
ONE = DensityPoly((Fraction(1),))


def from_roots(scale: Rat, roots: Sequence[Rat]) -> DensityPoly:
    out = DensityPoly((Fraction(scale),))
    for r in roots:
        out = out * DensityPoly((-Fraction(r), Fraction(1)))
    return out


def newton_fit(points: Sequence[tuple[Fraction, Fraction]]) -> DensityPoly:
    """Exact interpolation polynomial through distinct-x points."""
    xs = [Fraction(x) for x, _ in points]
    dd = [Fraction(y) for _, y in points]
    n = len(points)
    for lvl in range(1, n):
        for i in range(n - 1, lvl - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - lvl])
    poly = ZERO
    basis = ONE
    for i in range(n):
        poly = poly + basis.scaled(dd[i])
        basis = basis * DensityPoly((-xs[i], Fraction(1)))
    return poly


def alpha_poly(
    m_lat: GramMatrix,
    l_lat: GramMatrix,
    *,
    method: str = "auto",
    budget: Optional[int] = None,
    check_level: int = 0,
    cap: Optional[int] = None,
    d: Optional[int] = None,
) -> DensityPoly:
    """Interpolated density polynomial of (m_lat, l_lat).

    Counts against m_lat perp H^k at the stabilized level supply the values
    at X = q^{-2k}; interpolation stops at the first D whose fit agrees with
    the fit on one more point.
    """
    ring = m_lat.ring
    q = ring.q
    if l_lat.n and l_lat.min_val <= -2:
        # Values of the form on integral vectors never drop below -1, so
        # every congruence count vanishes identically.
        return ZERO
    level = d if d is not None else stable_level(l_lat)
    fund = invariants(l_lat).fund
    top = max(fund) if fund else 0
    if cap is None:
        cap = max(2, l_lat.n * (top + 2))
    plane = std_lattice(ring, "H")

    points: list[tuple[Fraction, Fraction]] = []
    base = m_lat
    fits: list[DensityPoly] = []
    seen_nonzero = False
    for k in range(cap + 2):
        val = count_reps(
            base, l_lat, level, method=method, budget=budget, check_level=check_level
        ).normalized
        seen_nonzero = seen_nonzero or bool(val)
        points.append((Fraction(q) ** (-2 * k), val))
        fits.append(newton_fit(points))
        if seen_nonzero and len(fits) >= 2 and fits[-1] == fits[-2]:
            return fits[-1]
        base = base.perp(plane)
    raise RuntimeError(
        f"interpolation did not stabilize within degree cap {cap}"
    )


def alpha_prime(m_lat: GramMatrix, l_lat: GramMatrix, **kw) -> Fraction:
    return alpha_poly(m_lat, l_lat, **kw).alpha_prime


def beta_prim_poly(
    m_lat: GramMatrix,
    l_lat: GramMatrix,
    n1: int,
    *,
    method: str = "auto",
    budget: Optional[int] = None,
    check_level: int = 0,
) -> DensityPoly:
    """Primitive density polynomial in the first n1 target coordinates.

    Expressed through alpha polynomials of the targets obtained by enlarging
    the leading block inside its pi^{-1}-dual: the alternating sum peels off
    the non-primitive part.
    """
    ring = m_lat.ring
    q = ring.q
    n, m = l_lat.n, m_lat.n
    if not 0 <= n1 <= n:
        raise ValueError("n1 out of range")
    for i in range(n1):
        for j in range(n1, n):
            if l_lat.entries[i][j]:
                raise ValueError("target must split off its first n1 coordinates")
    kw = dict(method=method, budget=budget, check_level=check_level)
    total = alpha_poly(m_lat, l_lat, **kw)
    if n1 == 0:
        return total
    sub = _subgram(l_lat, range(n1))
    rest = _subgram(l_lat, range(n1, n))
    acc = total
    for i in range(1, n1 + 1):
        weight = Fraction(-1) ** (i - 1) * Fraction(q) ** (
            i * (i - 1) // 2 + i * (n - m)
        )
        inner = ZERO
        for lifted in superlattices(sub, i):
            if lifted.min_val <= -2:
                continue
            inner = inner + alpha_poly(m_lat, lifted.perp(rest), **kw)
        acc = acc - inner.x_shifted(i).scaled(weight)
    return acc


def _subgram(lat: GramMatrix, idx) -> GramMatrix:
    idx = list(idx)
    rows = [tuple(lat.entries[i][j] for j in idx) for i in idx]
    from hermdens.linalg import kmat

    return GramMatrix(lat.ring, kmat(rows))
