"""Recursive evaluation of local density polynomials.

alpha(M, L) is the polynomial in X whose value at q^(-2k) is the normalized
representation count of L by M perp H^k, H the hyperbolic plane of scale -1.
Rank-1 targets hit the closed unary formula directly; unit entries and
scale -1 planes of the target peel off through the primitive-density
factorization, and targets of positive valuation invert the superlattice
decomposition.  Supported bases are unimodular cores padded by scale -1
planes; that covers every shape the derived-density and intersection layers
produce.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Union

from hermdens.lattice import (
    GramMatrix,
    invariants,
    isometry_key,
    jordan_form,
    std_lattice,
    superlattices,
)
from hermdens.ring import RingConfig
from hermdens.density.closed import (
    ONE_MINUS_X,
    beta0_rank1,
    beta0_rank2,
    beta1_rank2,
    beta2_rank2,
    rank1_alpha,
    unimodular_with_det,
)
from hermdens.density.poly import ONE, ZERO, DensityPoly

Rat = Union[int, Fraction]

_CACHE: dict[tuple, DensityPoly] = {}


def clear_cache() -> None:
    _CACHE.clear()


def _config_key(ring: RingConfig) -> tuple:
    return (ring.p, str(ring.twist))


def canonical_from_key(ring: RingConfig, key: tuple) -> GramMatrix:
    """Standard Gram matrix realizing an isometry key."""
    g = GramMatrix(ring, ())
    for scale, rank, chi in key:
        if scale % 2:
            assert rank % 2 == 0 and chi == 1
            for _ in range(rank // 2):
                g = g.perp(std_lattice(ring, "H", i=scale))
        else:
            w = 1 if chi == 1 else "s"
            ents = [(1, scale // 2)] * (rank - 1) + [(w, scale // 2)]
            g = g.perp(std_lattice(ring, "diag", entries=ents))
    return g


def alpha(m_lat: GramMatrix, l_lat: GramMatrix) -> DensityPoly:
    """Density polynomial of the target l_lat against the base family m_lat."""
    ring = m_lat.ring
    if _config_key(l_lat.ring) != _config_key(ring):
        raise ValueError("base and target live over different ring configurations")
    key = (_config_key(ring), isometry_key(m_lat), isometry_key(l_lat))
    hit = _CACHE.get(key)
    if hit is None:
        hit = _alpha(ring, key[1], key[2])
        _CACHE[key] = hit
    return hit


def alpha_at(m_lat: GramMatrix, l_lat: GramMatrix, k: int) -> Fraction:
    """Value of alpha(M, L) at X = q^(-2k)."""
    q = m_lat.ring.q
    return alpha(m_lat, l_lat).value_at(Fraction(1, q ** (2 * k)))


def _alpha(ring: RingConfig, mkey: tuple, lkey: tuple) -> DensityPoly:
    q = ring.q
    m_lat = canonical_from_key(ring, mkey)
    l_lat = canonical_from_key(ring, lkey)
    n = l_lat.n
    if n == 0:
        return ONE
    if n == 1:
        return rank1_alpha(m_lat, l_lat.entry(0, 0).f0)
    if l_lat.min_val <= -2:
        return ZERO

    # Peel scale -1 planes off the base: each contracts X by q^2.
    planes = sum(r for s, r, _ in mkey if s == -1) // 2
    if planes:
        m0 = canonical_from_key(ring, tuple(e for e in mkey if e[0] != -1))
        return alpha(m0, l_lat).x_scaled(Fraction(1, q ** (2 * planes)))
    if not m_lat.is_integral:
        raise ValueError("base must be integral apart from scale -1 planes")

    # Peel one scale -1 plane off the target.
    if lkey[0][0] == -1:
        rest = canonical_from_key(ring, _key_drop_plane(lkey))
        return ONE_MINUS_X * alpha(m_lat, rest).x_scaled(q * q)

    unimodular_base = all(s == 0 for s, _, _ in mkey)
    m = m_lat.n
    if m == 0:
        if n == 2:
            return _positive_alpha(m_lat, l_lat)
        raise ValueError("empty base supports targets of rank <= 2 only")
    if not unimodular_base:
        raise ValueError("mixed bases support rank-1 targets only")

    # Split a unit entry off the target: unit-norm vectors are primitive.
    if lkey[0][0] == 0:
        t, l2 = _split_unit(ring, lkey)
        return beta_prim1(m_lat, t, l2)

    if n > 3:
        raise ValueError("targets of rank > 3 with positive valuation are not supported")
    return _positive_alpha(m_lat, l_lat)


def _key_drop_plane(lkey: tuple) -> tuple:
    scale, rank, chi = lkey[0]
    if rank == 2:
        return lkey[1:]
    return ((scale, rank - 2, chi),) + lkey[1:]


def _split_unit(ring: RingConfig, lkey: tuple) -> tuple[Fraction, GramMatrix]:
    """(t, L2) with L = <t> perp L2 and t a unit entry."""
    scale, rank, chi = lkey[0]
    assert scale == 0
    t = Fraction(1 if chi == 1 else ring.s)
    rest = ((0, rank - 1, 1),) + lkey[1:] if rank > 1 else lkey[1:]
    return t, canonical_from_key(ring, rest)


def _split_positive(ring: RingConfig, l_lat: GramMatrix) -> tuple[GramMatrix, GramMatrix]:
    """(L1, L2) with L1 a plane or a pair of the smallest diagonal entries."""
    blocks, _ = jordan_form(l_lat)
    hyper = next((b for b in blocks if b.kind == "hyperbolic"), None)
    if hyper is not None:
        l1 = std_lattice(ring, "H", i=hyper.scale)
        rest = []
        for b in blocks:
            if b is hyper:
                if b.rank > 2:
                    rest.append((b.scale, b.rank - 2, 1))
            else:
                rest.append((b.scale, b.rank, 1 if b.kind == "hyperbolic" else b.unit_chi))
        return l1, canonical_from_key(ring, tuple(sorted(rest)))
    ents: list[tuple] = []
    rest = []
    need = 2
    for b in blocks:
        take = min(need, b.rank)
        c = b.scale // 2
        if take == b.rank:
            w = 1 if b.unit_chi == 1 else "s"
            ents.extend([(1, c)] * (take - 1) + [(w, c)])
        else:
            ents.extend([(1, c)] * take)
            if take:
                rest.append((b.scale, b.rank - take, b.unit_chi))
            else:
                rest.append((b.scale, b.rank, b.unit_chi))
        need -= take
    assert need == 0
    return (
        std_lattice(ring, "diag", entries=ents),
        canonical_from_key(ring, tuple(sorted(rest))),
    )


def _positive_alpha(m_lat: GramMatrix, l_lat: GramMatrix) -> DensityPoly:
    """Invert the superlattice decomposition for a target of positive valuation.

    Also covers any integral rank-2 target against the empty base, where all
    non-primitive strata vanish.
    """
    ring = m_lat.ring
    q = ring.q
    n = l_lat.n
    m = m_lat.n
    l1, l2 = _split_positive(ring, l_lat)
    out = beta_prim2(m_lat, l1, l2)
    for i in (1, 2):
        weight = Fraction(-1) ** (i - 1) * Fraction(q) ** (i * (i - 1) // 2 + i * (n - m))
        inner = ZERO
        for lift in superlattices(l1, i):
            if lift.min_val <= -2:
                continue
            inner = inner + alpha(m_lat, lift.perp(l2))
        if inner != ZERO:
            out = out + inner.x_shifted(i).scaled(weight)
    return out


def beta_prim1(m_lat: GramMatrix, t: Rat, l2: GramMatrix) -> DensityPoly:
    """beta(M, <t> perp L2, X)^(1): density of pairs primitive in the <t> slot.

    M must be unimodular of rank >= 1.  For a unit t this equals the full
    density polynomial alpha(M, <t> perp L2, X).
    """
    ring = m_lat.ring
    if not all(s == 0 for s, _, _ in isometry_key(m_lat)) or m_lat.n == 0:
        raise ValueError("hypothesis violated: base must be unimodular of rank >= 1")
    q = ring.q
    m = m_lat.n
    eps = m_lat.sign
    t0, v = ring.unit_part(t)
    if v < 0:
        raise ValueError("hypothesis violated: t must be integral")
    n = 1 + l2.n
    neg_t = std_lattice(ring, "diag", entries=(-Fraction(t),))
    out = ONE_MINUS_X * alpha(neg_t.perp(m_lat), l2).x_scaled(q * q)
    b0 = beta0_rank1(ring, m, eps, t)
    if b0 != ZERO:
        if v == 0:
            comp0 = unimodular_with_det(ring, m - 1, Fraction(t) * m_lat.det)
        else:
            comp0 = std_lattice(ring, "I", n=m - 2, eps=eps).perp(neg_t)
        out = out + (b0 * alpha(comp0, l2)).scaled(Fraction(q) ** (n - 1))
    return out


def beta_prim2(m_lat: GramMatrix, l1: GramMatrix, l2: GramMatrix) -> DensityPoly:
    """beta(M, L1 perp L2, X)^(2): the three-stratum expansion over images of L1.

    M must be unimodular (rank 0 allowed); L1 must be an integral rank-2
    block, of positive valuation unless M is empty.
    """
    ring = m_lat.ring
    if not all(s == 0 for s, _, _ in isometry_key(m_lat)):
        raise ValueError("hypothesis violated: base must be unimodular")
    inv1 = invariants(l1)
    if l1.n != 2 or inv1.vL < 0:
        raise ValueError("hypothesis violated: L1 must be integral of rank 2")
    m = m_lat.n
    if m > 0 and inv1.vL < 1:
        raise ValueError("hypothesis violated: L1 must have positive valuation")
    q = ring.q
    eps = m_lat.sign
    nu = m_lat.det
    n = 2 + l2.n
    out = ZERO
    for i in (2, 1, 0):
        if i == 2:
            bi = beta2_rank2(ring, l1)
        elif i == 1:
            bi = beta1_rank2(ring, m, eps, l1)
        else:
            bi = beta0_rank2(ring, m, eps, l1)
        rank_i = m - 2 * (2 - i)
        det_i = Fraction(-1) ** i * nu
        if rank_i < 0 or (rank_i == 0 and ring.chi(det_i) != 1):
            assert bi == ZERO
            continue
        if bi == ZERO:
            continue
        comp = l1.scale_form(-1).perp(unimodular_with_det(ring, rank_i, det_i))
        term = bi * alpha(comp, l2).x_scaled(q ** (2 * i))
        out = out + term.scaled(Fraction(q) ** ((2 - i) * (n - 2)))
    return out
