"""Closed-form density evaluators and residue-field counts.

The counting oracle defines alpha(M, L, X) by interpolation; this module is
the independent side of every comparison: explicit polynomials for low-rank
targets, the beta factors entering primitive-density reductions, and the
finite-field counts those factors reduce to.  Each evaluator validates the
hypothesis domain of its formula and raises ValueError instead of
extrapolating; closed_alpha dispatches on a formula id.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from hermdens.lattice import (
    GramMatrix,
    _rref_subspaces,
    dual_gram,
    invariants,
    jordan_form,
    std_lattice,
)
from hermdens.ring import RingConfig, legendre, vp
from hermdens.density.poly import ONE, ZERO, DensityPoly

Rat = Union[int, Fraction]

X = DensityPoly((Fraction(0), Fraction(1)))
ONE_MINUS_X = DensityPoly((Fraction(1), Fraction(-1)))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(f"hypothesis violated: {msg}")


def _unit(ring: RingConfig, u: Rat, name: str) -> Fraction:
    u = Fraction(u)
    _require(u != 0 and vp(u, ring.p) == 0, f"{name} must be a unit")
    return u


def _mono(c: Rat, k: int = 0) -> DensityPoly:
    return DensityPoly((Fraction(0),) * k + (Fraction(c),))


def _sign_of_diag(ring: RingConfig, m: int, det_unit: Fraction) -> int:
    """chi((-1)^(m(m-1)/2) det) for a unimodular lattice of rank m."""
    if m == 0:
        return 1
    return ring.chi(Fraction(-1) ** (m * (m - 1) // 2) * det_unit)


def unimodular_det_unit(ring: RingConfig, m: int, eps: int) -> Fraction:
    """Diagonal unit nu with Diag(1,...,1,nu) of rank m and sign eps."""
    _require(eps in (1, -1), "eps must be +-1")
    _require(m >= 0, "rank must be >= 0")
    if m == 0:
        _require(eps == 1, "the empty lattice has sign +1")
        return Fraction(1)
    nu = Fraction(1 if ring.chi(Fraction(-1) ** (m * (m - 1) // 2)) == eps else ring.s)
    assert _sign_of_diag(ring, m, nu) == eps
    return nu


def unimodular_with_det(ring: RingConfig, m: int, det_class: Rat) -> GramMatrix:
    """Unimodular Diag(1,...,1,w) of rank m with det in the class of det_class."""
    det_class = _unit(ring, det_class, "det_class")
    if m == 0:
        _require(ring.chi(det_class) == 1, "rank 0 forces a norm determinant class")
        return GramMatrix(ring, ())
    w = 1 if ring.chi(det_class) == 1 else ring.s
    return std_lattice(ring, "diag", entries=(1,) * (m - 1) + (w,))


# --------------------------------------------------------------------------
# Rank-1 targets.


def rank1_alpha(m_lat: GramMatrix, t: Rat) -> DensityPoly:
    """alpha(M, <t>, X) for an arbitrary base M.

    Only the Jordan data of M enters: unit scales c_l with unit classes, and
    hyperbolic scales i_j (including -1).  The coefficient of X^s collects
    the level-s Gauss sums; an odd number of contributing unit directions
    kills every term below s = v(t)+1.
    """
    ring = m_lat.ring
    q = ring.q
    t0, v = ring.unit_part(t)
    if v < 0:
        return ZERO
    blocks, _ = jordan_form(m_lat)
    unary = [(blk.scale // 2, blk.unit_chi) for blk in blocks if blk.kind == "unary"]
    planes = [blk.scale for blk in blocks if blk.kind == "hyperbolic"]
    chi_m1 = ring.chi(-1)
    chi_t0 = ring.chi(t0)
    coeffs: dict[int, Fraction] = {0: Fraction(1)}
    for s in range(1, v + 2):
        below = [(c, u) for c, u in unary if c < s]
        k = len(below)
        b_exp = (
            s
            + sum(c - s for c, _ in below)
            + sum(min(0, i + 1 - 2 * s) for i in planes)
        )
        chi_prod = 1
        for _, u in below:
            chi_prod *= u
        if k % 2 == 0:
            tail = 1 - Fraction(1, q) if s <= v else Fraction(-1, q)
            coeffs[s] = chi_m1 ** (k // 2) * chi_prod * Fraction(q) ** (b_exp + k // 2) * tail
        elif s == v + 1:
            coeffs[s] = (
                chi_m1 ** ((k + 3) // 2)
                * chi_prod
                * chi_t0
                * Fraction(q) ** (b_exp + (k + 1) // 2 - 1)
            )
    deg = max(coeffs)
    return DensityPoly(tuple(coeffs.get(i, Fraction(0)) for i in range(deg + 1)))


def alpha_two_scale_unary(
    ring: RingConfig,
    m: int,
    nu: Rat,
    a: int,
    b: int,
    nu1: Rat,
    nu2: Rat,
    t: Rat,
) -> DensityPoly:
    """alpha(Diag(S, nu1 (-pi0)^a, nu2 (-pi0)^b), <t>, X), S = Diag(1,..,1,nu).

    Hypothesis: 0 <= a <= b <= v(t).
    """
    _require(m >= 0, "S must have rank >= 0")
    nu = _unit(ring, nu, "nu")
    nu1 = _unit(ring, nu1, "nu1")
    nu2 = _unit(ring, nu2, "nu2")
    if m == 0:
        _require(nu == 1, "rank-0 S carries no unit")
    q = ring.q
    t0, v = ring.unit_part(t)
    _require(0 <= a <= b <= v, "need 0 <= a <= b <= v(t)")
    chi_s = _sign_of_diag(ring, m, nu)
    chi_sab = _sign_of_diag(ring, m + 2, nu * nu1 * nu2)
    chi_t0 = ring.chi(t0)
    out = ONE
    if m % 2:
        lead = chi_s * ring.chi(-nu1) * (q - 1)
        for s in range(a + 1, b + 1):
            out = out + _mono(lead * Fraction(q) ** (-m * s + a + (m - 1) // 2), s)
        out = out + _mono(
            chi_sab * chi_t0 * Fraction(q) ** (-(m + 1) * v + a + b - (m + 1) // 2),
            v + 1,
        )
    else:
        for s in range(1, a + 1):
            out = out + _mono(
                chi_s * (q - 1) * Fraction(q) ** (-(m - 1) * s + m // 2 - 1), s
            )
        tail = ZERO
        for s in range(b + 1, v + 1):
            tail = tail + _mono((q - 1) * Fraction(q) ** (-(m + 1) * s + m // 2), s)
        tail = tail - _mono(Fraction(q) ** (-(m + 1) * v - 1 - m // 2), v + 1)
        out = out + tail.scaled(chi_sab * Fraction(q) ** (a + b))
    return out


def alpha_unary_plane(
    ring: RingConfig, m: int, nu: Rat, i: int, t: Rat
) -> DensityPoly:
    """alpha(S perp H_i, <t>, X) for S unimodular of odd rank m."""
    _require(m >= 1 and m % 2 == 1, "S must have odd rank")
    _require(i % 2 == 1 or i % 2 == -1, "hyperbolic scale must be odd")
    nu = _unit(ring, nu, "nu")
    q = ring.q
    t0, v = ring.unit_part(t)
    _require(v >= 0, "t must be integral")
    chi = _sign_of_diag(ring, m, nu) * ring.chi(t0)
    if i <= 2 * v:
        coef = chi * Fraction(q) ** (-(v + 1) * (m + 1) + (m + 1) // 2 + i)
    else:
        coef = chi * Fraction(q) ** (-(v + 1) * (m - 1) + (m - 1) // 2)
    return ONE + _mono(coef, v + 1)


# --------------------------------------------------------------------------
# Rank-2 targets Diag(u1 (-pi0)^a, u2 (-pi0)^b) against a unimodular base.


def _pair_checks(
    ring: RingConfig, a: int, b: int, u1: Rat, u2: Rat
) -> tuple[Fraction, Fraction]:
    _require(0 <= a <= b, "need 0 <= a <= b")
    return _unit(ring, u1, "u1"), _unit(ring, u2, "u2")


def _geom(ratio: Fraction, lo: int, hi: int) -> DensityPoly:
    """sum_{i=lo}^{hi} ratio^i X^i."""
    out = ZERO
    for i in range(lo, hi + 1):
        out = out + _mono(ratio**i, i)
    return out


def alpha_even_base_pair(
    ring: RingConfig, m: int, nu: Rat, a: int, b: int, u1: Rat, u2: Rat
) -> DensityPoly:
    """alpha(S, T, X) for S unimodular isotropic of even rank m >= 2.

    T = Diag(u1 (-pi0)^a, u2 (-pi0)^b) with 0 <= a <= b.  Isotropy excludes
    exactly the anisotropic plane (m = 2 with sign -1).
    """
    _require(m >= 2 and m % 2 == 0, "S must have even rank >= 2")
    nu = _unit(ring, nu, "nu")
    u1, u2 = _pair_checks(ring, a, b, u1, u2)
    q = ring.q
    chi_s = _sign_of_diag(ring, m, nu)
    _require(not (m == 2 and chi_s == -1), "S must be isotropic")
    chi_t = ring.chi(-u1 * u2)
    r = Fraction(q) ** (2 - m)
    gamma = ZERO
    for d in range(1, a + 1):
        gamma = gamma + _mono((Fraction(q) ** d - 1) * r**d, d)
    gamma = gamma + _geom(Fraction(q) ** (1 - m), 0, a).x_shifted(b + 1).scaled(
        chi_t * Fraction(q) ** a * r ** (b + 1)
    )
    gamma = gamma.scaled(chi_s * Fraction(q) ** (m // 2))
    term1 = ONE_MINUS_X * (_geom(r, 0, a) + gamma)
    term2 = (
        _mono(q * r**a, a + 1)
        * (ONE + _mono(chi_s * chi_t * Fraction(q) ** ((m - 2) // 2) * r ** (b + 1), b + 1))
    ).scaled(1 - chi_s * Fraction(q) ** (-(m // 2)))
    inner = (
        _geom(r, 0, a - 1).scaled(q)
        + gamma
        - _mono(chi_s * chi_t * Fraction(q) ** (m // 2) * r ** (a + b + 1), a + b + 1)
    )
    lead = 1 - Fraction(q) ** (-(m - 1)) + (q - 1) * chi_s * Fraction(q) ** (-(m // 2))
    term3 = inner.x_shifted(1).scaled(lead)
    return term1 + term2 + term3


def alpha_rank2_base_pair(
    ring: RingConfig, nu: Rat, a: int, b: int, u1: Rat, u2: Rat
) -> DensityPoly:
    """alpha(Diag(1, nu), T, X) for T = Diag(u1 (-pi0)^a, u2 (-pi0)^b)."""
    nu = _unit(ring, nu, "nu")
    u1, u2 = _pair_checks(ring, a, b, u1, u2)
    q = ring.q
    chi_s = ring.chi(-nu)
    chi_t = ring.chi(-u1 * u2)
    out = ONE_MINUS_X * _geom(Fraction(q), 0, a).scaled(1 + chi_s + q * chi_s)
    out = out - (ONE_MINUS_X * _geom(Fraction(1, q), 0, a)).x_shifted(b + 1).scaled(
        chi_t * Fraction(q) ** (a + 1)
    )
    out = out - (_mono(1, a + b + 2) + _mono(chi_s * chi_t)).scaled(chi_t * (1 + q))
    out = out + (ONE + _mono(chi_t, b - a)).x_shifted(a + 1).scaled(
        (1 + chi_s) * Fraction(q) ** (a + 1)
    )
    return out


def alpha_odd_base_pair(
    ring: RingConfig, m: int, nu: Rat, a: int, b: int, u1: Rat, u2: Rat
) -> DensityPoly:
    """alpha(S, T, X) for S unimodular of odd rank m >= 3.

    T = Diag(u1 (-pi0)^a, u2 (-pi0)^b) with 0 <= a <= b.
    """
    _require(m >= 3 and m % 2 == 1, "S must have odd rank >= 3")
    nu = _unit(ring, nu, "nu")
    u1, u2 = _pair_checks(ring, a, b, u1, u2)
    q = ring.q
    chi_su1 = _sign_of_diag(ring, m, nu) * ring.chi(u1)
    r = Fraction(q) ** (2 - m)
    half = Fraction(q) ** ((m - 1) // 2)

    def gamma(unit_drop: int, top_shift: int) -> DensityPoly:
        out = ZERO
        for d in range(a + 1, a + b + 1):
            out = out + _mono((Fraction(q) ** (a + b + 1 - d) - unit_drop) * r**d, d)
        for i in range(b + 1, a + b + 1 + top_shift):
            out = out - _mono(r**i, i)
        return out.scaled(chi_su1 * half)

    term1 = ONE_MINUS_X * (_geom(r, 0, a) + gamma(1, 1))
    term2 = (_geom(r, 0, a - 1).scaled(q) + gamma(q, 0)).x_shifted(1).scaled(
        1 - Fraction(q) ** (-(m - 1))
    )
    term3 = (
        _mono(q * r**a, a + 1)
        * (ONE - _mono(chi_su1 * Fraction(q) ** ((2 - m) * b) / half, b + 1))
    ).scaled(1 + chi_su1 / half)
    return term1 + term2 + term3


# --------------------------------------------------------------------------
# Derived-density closed values for rank 3.


def vertical_count(ring: RingConfig, chi_t: int, a: int) -> int:
    """|V^0(L)| for L = <unit> perp L2 with L2 exponents (a, b), 0 <= a <= b."""
    _require(chi_t in (1, -1), "chi_t must be +-1")
    _require(a >= 0, "a must be >= 0")
    if chi_t == -1:
        return 1
    q = ring.q
    return 1 + 2 * sum(q**i for i in range(1, a + 1))


def pden_prim_triple(
    ring: RingConfig, a: int, b: int, c: int, u2: Rat, u3: Rat
) -> Fraction:
    """Primitive derived density of Diag(u1 (-pi0)^a, u2 (-pi0)^b, u3 (-pi0)^c).

    Hypothesis: 0 < a <= b <= c.  The value does not depend on u1.
    """
    _require(0 < a <= b <= c, "need 0 < a <= b <= c")
    u2 = _unit(ring, u2, "u2")
    u3 = _unit(ring, u3, "u3")
    q = ring.q
    return 1 + ring.chi(-u2 * u3) * Fraction(q) ** a * (q**a - q**b) - Fraction(q) ** (a + b)


def pden_prim_plane(ring: RingConfig, a: int, c: int) -> Fraction:
    """Primitive derived density of Diag(H_a, u3 (-pi0)^c), a odd and positive."""
    _require(a > 0 and a % 2 == 1, "a must be a positive odd integer")
    _require(c >= 0, "c must be >= 0")
    q = ring.q
    return Fraction(1 - q**a) if a <= 2 * c else Fraction(1 - q ** (2 * c + 1))


# --------------------------------------------------------------------------
# beta factors.


def beta_h_value(k: int, l_lat: GramMatrix) -> Fraction:
    """beta(H^k, L): primitive density of L in k planes of scale -1."""
    _require(k >= 0, "k must be >= 0")
    inv = invariants(l_lat)
    if inv.fund and inv.fund[0] <= -2:
        return Fraction(0)
    q = l_lat.ring.q
    lo = k - (l_lat.n + inv.t_o) // 2
    out = Fraction(1)
    for i in range(lo + 1, k + 1):
        out *= 1 - Fraction(q) ** (-2 * i)
    return out


def beta0_rank1(ring: RingConfig, m: int, chi_m: int, t: Rat) -> DensityPoly:
    """beta_0(M, <t>, X) for unimodular M of rank m and sign chi_m."""
    _require(m >= 1, "M must have rank >= 1")
    _require(chi_m in (1, -1), "chi_m must be +-1")
    q = ring.q
    t0, v = ring.unit_part(t)
    _require(v >= 0, "t must be integral")
    if v == 0:
        if m % 2:
            c = 1 + chi_m * ring.chi(t0) * Fraction(q) ** (-(m - 1) // 2)
        else:
            c = 1 - chi_m * Fraction(q) ** (-(m // 2))
    else:
        if m % 2:
            c = 1 - Fraction(q) ** (1 - m)
        else:
            c = 1 - Fraction(q) ** (1 - m) + chi_m * (q - 1) * Fraction(q) ** (-(m // 2))
    return _mono(c, 1)


def _rank2_target_data(l1: GramMatrix) -> tuple[int, Optional[int], int]:
    """(t(L), chi of the unit entry when t(L) = 1, sign) for rank-2 L."""
    _require(l1.n == 2, "L must have rank 2")
    inv = invariants(l1)
    _require(inv.vL >= 0, "L must be integral")
    t = inv.tL
    chi_u1 = None
    if t == 1:
        blocks, _ = jordan_form(l1)
        chi_u1 = next(b.unit_chi for b in blocks if b.scale == 0)
    return t, chi_u1, inv.sign


def beta2_rank2(ring: RingConfig, l1: GramMatrix) -> DensityPoly:
    """beta_2(M, L, X) for rank-2 L; only the shape of L enters."""
    _require(l1.n == 2, "L must have rank 2")
    inv = invariants(l1)
    if inv.fund == (-1, -1):
        return ONE_MINUS_X
    _require(inv.vL >= 0, "L must be integral or the scale -1 plane")
    q = ring.q
    return ONE_MINUS_X * DensityPoly((Fraction(1), Fraction(-q * q)))


def beta1_rank2(ring: RingConfig, m: int, chi_m: int, l1: GramMatrix) -> DensityPoly:
    """beta_1(M, L, X) for unimodular M of rank m, sign chi_m, integral rank-2 L."""
    _require(m >= 0, "M must have rank >= 0")
    _require(chi_m in (1, -1), "chi_m must be +-1")
    q = ring.q
    t, chi_u1, chi_l = _rank2_target_data(l1)
    delta_e = 1 if m % 2 == 0 else 0
    if t == 2:
        c = (q + 1) * (
            1 - Fraction(q) ** (1 - m)
            + delta_e * chi_m * (q - 1) * Fraction(q) ** (-(m // 2))
        )
    elif t == 1:
        if m % 2:
            c = 1 + q - Fraction(q) ** (1 - m) + chi_m * chi_u1 * Fraction(q) ** ((3 - m) // 2)
        else:
            c = 1 + q - Fraction(q) ** (1 - m) - chi_m * Fraction(q) ** (-(m // 2))
    elif chi_l == 1:
        c = (
            q
            + 1
            - 2 * Fraction(q) ** (1 - m)
            + delta_e * chi_m * (q - 1) * Fraction(q) ** (-(m // 2))
        )
    else:
        c = (q + 1) * (1 - delta_e * chi_m * Fraction(q) ** (-(m // 2)))
    return (X * ONE_MINUS_X).scaled(q * c)


def beta0_rank2(ring: RingConfig, m: int, chi_m: int, l1: GramMatrix) -> DensityPoly:
    """beta_0(M, L, X) for unimodular M of rank m, sign chi_m, integral rank-2 L."""
    _require(m >= 0, "M must have rank >= 0")
    _require(chi_m in (1, -1), "chi_m must be +-1")
    q = ring.q
    t, chi_u1, chi_l = _rank2_target_data(l1)
    if m % 2:
        if t == 0:
            c = 1 - Fraction(q) ** (1 - m)
        elif t == 1:
            c = (1 + chi_m * chi_u1 * Fraction(q) ** ((3 - m) // 2)) * (
                1 - Fraction(q) ** (1 - m)
            )
        else:
            c = (1 - Fraction(q) ** (1 - m)) * (1 - Fraction(q) ** (3 - m))
    else:
        if t == 0:
            c = (
                1
                - chi_l * Fraction(q) ** (1 - m)
                + chi_l * chi_m * (q - chi_l) * Fraction(q) ** (-(m // 2))
            )
        elif t == 1:
            c = (1 - chi_m * Fraction(q) ** (-(m // 2))) * (1 - Fraction(q) ** (2 - m))
        else:
            c = (
                1
                - Fraction(q) ** (2 - m)
                + chi_m * (q * q - 1) * Fraction(q) ** (-(m // 2))
            ) * (1 - Fraction(q) ** (2 - m))
    return _mono(q * c, 2)


def cancellation_threshold(l_lat: GramMatrix) -> int:
    """Least l such that pi^l T^(-1) is integral, T the Gram of the target.

    Appending a base block of valuation above this threshold cannot change
    the density polynomial.
    """
    _require(l_lat.n >= 1, "target must have rank >= 1")
    return -int(dual_gram(l_lat).min_val)


# --------------------------------------------------------------------------
# Residue-field counts.

_RESIDUE_DIM_CAP = 6


def residue_gram(lat: GramMatrix) -> tuple[tuple[int, ...], ...]:
    """Reduction mod pi of an integral Gram matrix, a symmetric F_q matrix."""
    _require(lat.is_integral, "lattice must be integral")
    p = lat.ring.p
    out = []
    for row in lat.entries:
        vals = []
        for x in row:
            a = x.a
            vals.append(a.numerator * pow(a.denominator, -1, p) % p)
        out.append(tuple(vals))
    return tuple(out)


def _sym_checks(p: int, gram: Sequence[Sequence[int]], name: str) -> None:
    n = len(gram)
    _require(n <= _RESIDUE_DIM_CAP, f"oversize: {name} exceeds dimension {_RESIDUE_DIM_CAP}")
    for i in range(n):
        _require(len(gram[i]) == n, f"{name} must be square")
        for j in range(n):
            _require(gram[i][j] % p == gram[j][i] % p, f"{name} must be symmetric")


def rep_count_brute(p: int, gram_m: Sequence[Sequence[int]], gram_l: Sequence[Sequence[int]]) -> int:
    """Number of tuples over F_p^m whose pairing matrix under gram_m is gram_l."""
    _sym_checks(p, gram_m, "gram_m")
    _sym_checks(p, gram_l, "gram_l")
    m, n = len(gram_m), len(gram_l)
    if n == 0:
        return 1
    if m == 0:
        return 1 if all(x % p == 0 for row in gram_l for x in row) else 0
    _require(p**m <= 20000, "oversize: residue space too large")
    vectors = [tuple(v) for v in itertools.product(range(p), repeat=m)]

    def pair(x: Sequence[int], y: Sequence[int]) -> int:
        return sum(x[i] * gram_m[i][j] * y[j] for i in range(m) for j in range(m)) % p

    count = 0
    stack: list[tuple[int, ...]] = []

    def extend(level: int) -> None:
        nonlocal count
        if level == n:
            count += 1
            return
        for v in vectors:
            if pair(v, v) != gram_l[level][level] % p:
                continue
            if any(pair(v, stack[j]) != gram_l[level][j] % p for j in range(level)):
                continue
            stack.append(v)
            extend(level + 1)
            stack.pop()

    extend(0)
    return count


def ortho_order(q: int, m: int, eps: Optional[int] = None) -> int:
    """|O(V)(F_q)| for a nondegenerate quadratic space of dimension m.

    eps is the Witt sign, required (and only meaningful) for even m >= 2.
    """
    _require(m >= 0, "dimension must be >= 0")
    if m == 0:
        return 1
    if m % 2:
        k = (m - 1) // 2
        out = 2 * q ** (k * k)
        for i in range(1, k + 1):
            out *= q ** (2 * i) - 1
        return out
    _require(eps in (1, -1), "even dimension needs eps = +-1")
    k = m // 2
    out = 2 * q ** (k * (k - 1)) * (q**k - eps)
    for i in range(1, k):
        out *= q ** (2 * i) - 1
    return out


def residue_eps(p: int, gram: Sequence[Sequence[int]]) -> int:
    """Witt sign of a nondegenerate even-dimensional symmetric form over F_p."""
    m = len(gram)
    _require(m >= 2 and m % 2 == 0, "Witt sign needs even dimension >= 2")
    det = _fp_det(p, gram)
    _require(det % p != 0, "form must be nondegenerate")
    return legendre((-1) ** (m // 2) * det, p)


def _fp_det(p: int, gram: Sequence[Sequence[int]]) -> int:
    n = len(gram)
    a = [[x % p for x in row] for row in gram]
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c] % p
        inv = pow(a[c][c], -1, p)
        for r in range(c + 1, n):
            f = a[r][c] * inv % p
            a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return det % p


def witt_index(q: int, m: int, eps: Optional[int] = None) -> int:
    """Dimension of a maximal totally isotropic subspace."""
    if m % 2:
        return (m - 1) // 2
    _require(eps in (1, -1), "even dimension needs eps = +-1")
    return m // 2 if eps == 1 else m // 2 - 1


def isotropic_count(q: int, n: int, d: int, k: int) -> int:
    """Number of k-dimensional totally isotropic subspaces; d is the Witt index."""
    _require(0 <= k, "k must be >= 0")
    _require(0 <= d <= n // 2, "d must be a Witt index for dimension n")
    num = den = 1
    for s in range(1, k + 1):
        num *= (q ** (d - s + 1) - 1) * (q ** (n - d - s) + 1)
        den *= q**s - 1
    assert num % den == 0
    return num // den


def isotropic_count_brute(p: int, gram: Sequence[Sequence[int]], k: int) -> int:
    """Count totally isotropic k-subspaces of a symmetric form by enumeration."""
    _sym_checks(p, gram, "gram")
    n = len(gram)
    _require(0 <= k <= n, "k out of range")

    def pair(x: Sequence[int], y: Sequence[int]) -> int:
        return sum(x[i] * gram[i][j] * y[j] for i in range(n) for j in range(n)) % p

    count = 0
    for rows in _rref_subspaces(n, k, p):
        if all(pair(rows[i], rows[j]) == 0 for i in range(k) for j in range(i, k)):
            count += 1
    return count


def residue_counts(kind: str, **params) -> int:
    """Integer counts over the residue field, by brute force or closed form.

    kinds: "rep-brute" (p, gram_m, gram_l), "ortho" (q, m, eps),
    "ortho-brute" (p, gram), "isotropic" (q, n, d, k),
    "isotropic-brute" (p, gram, k).
    """
    if kind == "rep-brute":
        return rep_count_brute(params["p"], params["gram_m"], params["gram_l"])
    if kind == "ortho":
        return ortho_order(params["q"], params["m"], params.get("eps"))
    if kind == "ortho-brute":
        gram = params["gram"]
        return rep_count_brute(params["p"], gram, gram)
    if kind == "isotropic":
        return isotropic_count(params["q"], params["n"], params["d"], params["k"])
    if kind == "isotropic-brute":
        return isotropic_count_brute(params["p"], params["gram"], params["k"])
    raise ValueError(f"unknown residue count kind {kind!r}")


# --------------------------------------------------------------------------
# Formula dispatch.

_EVALUATORS: dict[str, Callable] = {
    "unary-general": rank1_alpha,
    "unary-two-scale": alpha_two_scale_unary,
    "unary-after-plane": alpha_unary_plane,
    "pair-even-base": alpha_even_base_pair,
    "pair-rank2-base": alpha_rank2_base_pair,
    "pair-odd-base": alpha_odd_base_pair,
    "vertical-count": vertical_count,
    "prim-derived-triple": pden_prim_triple,
    "prim-derived-plane": pden_prim_plane,
    "beta-plane-base": beta_h_value,
    "beta0-rank1": beta0_rank1,
    "beta2-rank2": beta2_rank2,
    "beta1-rank2": beta1_rank2,
    "beta0-rank2": beta0_rank2,
    "cancellation-threshold": cancellation_threshold,
}


def closed_alpha(formula_id: str, **params):
    """Evaluate one closed formula; raises ValueError off its hypothesis domain.

    Formula ids name the shape of the inputs: "unary-*" are rank-1 targets,
    "pair-*" are rank-2 diagonal targets keyed by the base parity,
    "prim-derived-*" are rank-3 primitive derived-density values,
    "beta*" are the primitive-density factors, and the two
    "prim-reduction-*" ids assemble a primitive density from those factors
    and complement densities.
    """
    if formula_id in ("prim-reduction-rank1", "prim-reduction-rank2"):
        from hermdens.density.engine import beta_prim1, beta_prim2

        fn = beta_prim1 if formula_id.endswith("rank1") else beta_prim2
        return fn(**params)
    try:
        fn = _EVALUATORS[formula_id]
    except KeyError:
        raise ValueError(f"unknown formula id {formula_id!r}") from None
    return fn(**params)
