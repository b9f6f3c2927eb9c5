"""Exact value distributions of Hermitian expressions on pi-adic boxes.

A level-d count asks how often a quadratic expression on the box
(O/pi^{2d})^m lands on each residue of Z/p^d.  Jordan blocks of the Gram
matrix contribute independently, so every distribution here is a vector of
p^d nonnegative integers and blocks combine by cyclic convolution.  All
arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from hermdens.linalg import reduce_mod_pi
from hermdens.ring import INF, Extended, RingConfig, vp

Dist = tuple[int, ...]

# Direct double-loop enumeration of a 2x2 block is allowed up to this many
# points; beyond it only the structured paths below may run.
ENUM_LIMIT = 1_200_000


def resmod(x: Fraction, p: int, d: int) -> int:
    """Residue of a p-integral rational in [0, p^d)."""
    md = p**d
    num, den = x.numerator, x.denominator
    if den % p == 0:
        raise ValueError("value is not p-integral")
    return num * pow(den, -1, md) % md


def convolve(a: Sequence[int], b: Sequence[int]) -> Dist:
    """Cyclic convolution of two count vectors of equal length.

    Packed into big integers so the schoolbook p^{2d} loop becomes one
    multiplication; bins stay exact because the limb width bounds every
    coefficient of the product.
    """
    n = len(a)
    sa, sb = sum(a), sum(b)
    if sa == 0 or sb == 0:
        return (0,) * n
    width = sa.bit_length() + sb.bit_length() + 1
    nbytes = (width + 7) // 8
    width = 8 * nbytes
    pa = int.from_bytes(b"".join(v.to_bytes(nbytes, "little") for v in a), "little")
    pb = int.from_bytes(b"".join(v.to_bytes(nbytes, "little") for v in b), "little")
    raw = (pa * pb).to_bytes(nbytes * 2 * n, "little")
    out = [0] * n
    for k in range(2 * n - 1):
        out[k % n] += int.from_bytes(raw[nbytes * k : nbytes * (k + 1)], "little")
    return tuple(out)


def shift_dist(dist: Sequence[int], s: int) -> Dist:
    """Distribution of (value + s) for s in Z/len."""
    n = len(dist)
    s %= n
    return tuple(dist[(i - s) % n] for i in range(n))


def point_dist(p: int, d: int, value: int, mass: int = 1) -> Dist:
    out = [0] * p**d
    out[value % p**d] = mass
    return tuple(out)


@lru_cache(maxsize=None)
def square_dist(p: int, d: int, coef: int) -> Dist:
    """Distribution of coef * a^2 over a in Z/p^d."""
    md = p**d
    out = [0] * md
    for a in range(md):
        out[coef * a * a % md] += 1
    return tuple(out)


@lru_cache(maxsize=None)
def norm_dist(p: int, d: int, twist: int, delta: int) -> Dist:
    """Distribution of delta * Nm(c) over c in O/pi^{2d}.

    Nm(a + b pi) = a^2 - pi0 b^2 splits the box into two square factors.
    """
    return convolve(
        square_dist(p, d, delta % p**d),
        square_dist(p, d, -delta * twist * p % p**d),
    )


@lru_cache(maxsize=None)
def uniform_scaled(p: int, d: int, s: int) -> Dist:
    """Image distribution of a trace functional of content s on one box.

    The functional surjects onto p^s Z/p^d with uniform fibers from the
    p^{2d} points of O/pi^{2d}.
    """
    s = min(s, d)
    md = p**d
    step = p**s
    mass = p ** (d + s)
    out = [0] * md
    for y in range(0, md, step):
        out[y] = mass
    return tuple(out)


def _tr_content(ring: RingConfig, g: Extended, d: int) -> int:
    """Content s of the functional c -> Tr(g c) on O/pi^{2d}: image p^s Z."""
    ga, gb = g.a, g.b
    cands = [d]
    if ga:
        cands.append(vp(ga, ring.p))
    if gb:
        cands.append(1 + vp(gb, ring.p))
    return min(min(cands), d)


def _canon_ext(ring: RingConfig, x: Extended, e: int) -> tuple[Fraction, Fraction]:
    r = reduce_mod_pi(x, e)
    return (r.a, r.b)


_UNARY_CACHE: dict[tuple, Dist] = {}


def unary_dist(ring: RingConfig, d: int, delta: Fraction, g: Extended) -> Dist:
    """Distribution of delta*Nm(c) + Tr(g c) over c in O/pi^{2d}.

    Requires the expression to be integral: vp(delta) >= 0 and Tr(g c)
    integral for integral c.
    """
    p, tw = ring.p, ring.twist
    md = p**d
    dres = resmod(delta, p, d)
    key = (p, tw, d, dres, _canon_ext(ring, g, 2 * d))
    hit = _UNARY_CACHE.get(key)
    if hit is not None:
        return hit

    if dres == 0:
        # Quadratic part vanishes at this level; pure functional image.
        out = uniform_scaled(p, d, _tr_content(ring, g, d))
    elif not g or g.val >= 2 * vp(delta, p):
        # Complete the square: c -> c + conj(g)/delta shifts by -Nm(g)/delta.
        base = norm_dist(p, d, tw, dres)
        if not g:
            out = base
        else:
            out = shift_dist(base, -resmod(g.norm / delta, p, d))
    else:
        if p ** (2 * d) > ENUM_LIMIT:
            raise RuntimeError("unary distribution too large to enumerate")
        ga2 = resmod(2 * g.a, p, d)
        gb2 = resmod(2 * tw * p * g.b, p, d)
        dr = dres
        twp = tw * p % md
        acc = [0] * md
        for a in range(md):
            base_a = (dr * a * a + ga2 * a) % md
            for b in range(md):
                acc[(base_a - dr * twp * b * b + gb2 * b) % md] += 1
        out = tuple(acc)
    _UNARY_CACHE[key] = out
    return out


@lru_cache(maxsize=None)
def det_pair_dist(p: int, d: int, hval: int) -> Dist:
    """Distribution of Tr(h conj(c1) c2) over (c1, c2), h of odd valuation hval.

    For c1 of content a the inner functional has content ceil((hval + a)/2),
    so the distribution is a content-weighted mix of uniform images.
    """
    md = p**d
    out = [0] * md
    for a in range(2 * d + 1):
        if a == 2 * d:
            cnt = 1
        else:
            cnt = p ** (2 * d - a) - p ** (2 * d - a - 1)
        s = min(d, -((-(hval + a)) // 2)) if hval + a > 0 else 0
        u = uniform_scaled(p, d, s)
        for y in range(md):
            out[y] += cnt * u[y]
    return tuple(out)


_PAIR_CACHE: dict[tuple, Dist] = {}


def pair_dist(
    ring: RingConfig,
    d: int,
    w: Fraction,
    h: Extended,
    z: Fraction,
    g1: Extended,
    g2: Extended,
) -> Dist:
    """Distribution of w Nm(c1) + z Nm(c2) + Tr(h conj(c1) c2) + Tr(g1 c1) + Tr(g2 c2).

    Covers the odd-scale 2x2 Jordan blocks.  Dispatches to a closed form,
    direct enumeration, or a bucketed sweep over c1 with cached inner
    distributions.
    """
    p, tw = ring.p, ring.twist
    md = p**d
    wres, zres = resmod(w, p, d), resmod(z, p, d)
    key = (
        p,
        tw,
        d,
        wres,
        zres,
        _canon_ext(ring, h, 2 * d),
        _canon_ext(ring, g1, 2 * d),
        _canon_ext(ring, g2, 2 * d),
    )
    hit = _PAIR_CACHE.get(key)
    if hit is not None:
        return hit

    out = _pair_dist_impl(ring, d, wres, zres, w, h, z, g1, g2)
    _PAIR_CACHE[key] = out
    return out


def _pair_dist_impl(ring, d, wres, zres, w, h, z, g1, g2) -> Dist:
    p, tw = ring.p, ring.twist
    md = p**d
    if wres == 0 and zres == 0 and not g1 and not g2:
        return det_pair_dist(p, d, h.val if h else 2 * d)

    if p ** (4 * d) <= ENUM_LIMIT:
        return _pair_enum(ring, d, wres, zres, h, g1, g2)

    orig = (wres, zres, w, h, z, g1, g2)
    for flip in (False, True):
        if flip:
            wres, zres = zres, wres
            w, z = z, w
            h = h.conj
            g1, g2 = g2, g1
        vz = 2 * vp(z, p) if z else INF
        vh = h.val if h else INF
        vg2 = g2.val if g2 else INF
        sq_ok = zres != 0 and vh >= vz and vg2 >= vz
        lin_ok = zres == 0
        if not (sq_ok or lin_ok):
            continue
        if p ** (2 * d) > ENUM_LIMIT:
            raise RuntimeError("pair distribution outer sweep too large")
        buckets: dict[tuple, int] = {}
        for a in range(md):
            for b in range(md):
                c1 = ring.ext(Fraction(a), Fraction(b))
                s = resmod(w * (a * a - tw * p * b * b) + (g1 * c1).trace, p, d)
                gg = c1.conj * h + g2
                if lin_ok:
                    bkey = (s, _tr_content(ring, gg, d))
                else:
                    extra = resmod(gg.norm / z, p, d) if gg else 0
                    bkey = ((s - extra) % md, None)
                buckets[bkey] = buckets.get(bkey, 0) + 1
        out = [0] * md
        if lin_ok:
            for (s, cont), cnt in buckets.items():
                u = uniform_scaled(p, d, cont)
                for y in range(md):
                    out[(y + s) % md] += cnt * u[y]
        else:
            base = norm_dist(p, d, tw, zres)
            for (s, _), cnt in buckets.items():
                for y in range(md):
                    out[(y + s) % md] += cnt * base[y]
        return tuple(out)

    # Generic bucketed sweep: for each value of the swept coordinate the rest
    # is a unary expression in the other one.  Keep the smaller-valuation
    # diagonal inside so the inner distributions complete the square.
    wres, zres, w, h, z, g1, g2 = orig
    if (vp(w, p) if w else INF) < (vp(z, p) if z else INF):
        wres, zres = zres, wres
        w, z = z, w
        h = h.conj
        g1, g2 = g2, g1
    if p ** (2 * d) > ENUM_LIMIT:
        raise RuntimeError("pair block distribution not supported at this size")
    buckets = {}
    for a in range(md):
        for b in range(md):
            c1 = ring.ext(Fraction(a), Fraction(b))
            s = resmod(w * (a * a - tw * p * b * b) + (g1 * c1).trace, p, d)
            gg = c1.conj * h + g2
            bkey = (s, _canon_ext(ring, gg, 2 * d))
            buckets[bkey] = buckets.get(bkey, 0) + 1
    out = [0] * md
    for (s, (gga, ggb)), cnt in buckets.items():
        u = unary_dist(ring, d, z, ring.ext(gga, ggb))
        for y in range(md):
            out[(y + s) % md] += cnt * u[y]
    return tuple(out)


def _pair_enum(ring, d, wres, zres, h, g1, g2) -> Dist:
    p, tw = ring.p, ring.twist
    md = p**d
    twp = tw * p % md
    # Integral combinations: Tr((x + y pi)(a + b pi)) = 2(x a + pi0 y b),
    # Tr(h conj(c1) c2) expanded below through the pi-components of h.
    ha2 = resmod(2 * h.a, p, d)
    hb2 = resmod(2 * tw * p * h.b, p, d)
    g1a, g1b = resmod(2 * g1.a, p, d), resmod(2 * tw * p * g1.b, p, d)
    g2a, g2b = resmod(2 * g2.a, p, d), resmod(2 * tw * p * g2.b, p, d)
    out = [0] * md
    for a1 in range(md):
        for b1 in range(md):
            s1 = (wres * (a1 * a1 - twp * b1 * b1) + g1a * a1 + g1b * b1) % md
            for a2 in range(md):
                base = (
                    s1
                    + zres * (a2 * a2 % md) % md
                    + g2a * a2
                    + ha2 * (a1 * a2 % md)
                ) % md
                for b2 in range(md):
                    # conj(c1) c2 = (a1 a2 - pi0 b1 b2) + (a1 b2 - b1 a2) pi
                    val = (
                        base
                        - zres * twp % md * (b2 * b2 % md)
                        + g2b * b2
                        - ha2 * twp % md * (b1 * b2 % md)
                        + hb2 * ((a1 * b2 - b1 * a2) % md)
                    ) % md
                    out[val] += 1
    return tuple(out)


def block_dist(ring: RingConfig, d: int, block_gram, g_coords: Sequence[Extended]) -> Dist:
    """Distribution of one Jordan block's contribution with linear terms.

    block_gram is a 1x1 or 2x2 Hermitian piece; g_coords are the matching
    coordinates of the linear functional row.
    """
    if len(block_gram) == 1:
        delta = block_gram[0][0]
        return unary_dist(ring, d, delta.f0, g_coords[0])
    (w_, h_), (hc, z_) = block_gram
    return pair_dist(ring, d, w_.f0, h_, z_.f0, g_coords[0], g_coords[1])
