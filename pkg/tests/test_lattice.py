"""Gram matrices, Jordan decomposition, invariants, superlattice enumeration."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermdens.lattice import (
    GramMatrix,
    dual_gram,
    gaussian_binomial,
    integral_superlattices,
    invariants,
    isometry_key,
    jordan_form,
    parse_gram,
    std_lattice,
    subspace_alt_sum,
    superlattice_bases,
    superlattices,
)
from hermdens.linalg import kmat, mat_conj_t, mat_det, mat_mul
from hermdens.ring import RingConfig

R = RingConfig(p=3)
R5 = RingConfig(p=5)


def e(a, b=0):
    return R.ext(a, b)


def test_gram_validation():
    with pytest.raises(ValueError):
        GramMatrix(R, kmat([[e(1), e(2)], [e(3), e(1)]]))  # not Hermitian
    with pytest.raises(ValueError):
        GramMatrix(R, kmat([[e(1), e(1)], [e(1), e(1)]]))  # degenerate
    g = GramMatrix(R, kmat([[e(1), e(0, 1)], [e(0, -1), e(2)]]))
    assert g.n == 2 and g.det == 2 + 3


def test_std_H():
    h = std_lattice(R, "H")
    assert h.entries[0][1] == R.pi.inverse()
    assert h.entries[1][0] == -R.pi.inverse()
    assert h.entries[0][0] == R.zero
    assert h.det == Fraction(1, 3)
    assert h.sign == 1  # chi(-det) = chi(-1/pi0) = chi(-pi0) = +1
    h1 = std_lattice(R, "H", i=1)
    assert h1.entries[0][1] == R.pi and h1.entries[1][0] == -R.pi
    assert invariants(h1).fund == (1, 1)


def test_std_I():
    for n in range(1, 6):
        for eps in (1, -1):
            g = std_lattice(R, "I", n=n, eps=eps)
            assert g.sign == eps
            assert invariants(g).fund == (0,) * n
    assert std_lattice(R, "I", n=0, eps=1).n == 0
    with pytest.raises(ValueError):
        std_lattice(R, "I", n=0, eps=-1)


def test_std_Hni():
    g = std_lattice(R, "Hni", n=3, i=1, eps=-1)
    assert g.n == 3
    assert g.sign == -1  # adjoining H preserves the sign
    assert invariants(g).fund == (-1, -1, 0)
    with pytest.raises(ValueError):
        std_lattice(R, "Hni", n=3, i=2, eps=1)


def test_std_diag():
    g = std_lattice(R, "diag", entries=[(1, 0), ("s", 2)])
    assert g.entries[0][0] == e(1)
    assert g.entries[1][1] == e(2 * 9)
    assert invariants(g).fund == (0, 4)


def test_jordan_H():
    blocks, b = jordan_form(std_lattice(R, "H"))
    assert len(blocks) == 1
    assert blocks[0].kind == "hyperbolic" and blocks[0].scale == -1


def test_jordan_reorders_diag():
    g = std_lattice(R, "diag", entries=[(2, 1), (1, 0)])
    blocks, b = jordan_form(g)
    assert [blk.scale for blk in blocks] == [0, 2]
    rebased = g.rebased(b)
    assert rebased.entries[0][1] == R.zero


def test_jordan_base_change_consistency():
    g = GramMatrix(
        R,
        kmat(
            [
                [e(3), e(1, 2), e(0, 1)],
                [e(1, -2), e(6), e(2)],
                [e(0, -1), e(2), e(9)],
            ]
        ),
    )
    blocks, b = jordan_form(g)
    res = g.rebased(b)
    # block diagonal with the blocks in order
    pos = 0
    for blk in blocks:
        r = blk.rank
        for i in range(g.n):
            for j in range(g.n):
                inside = pos <= i < pos + r and pos <= j < pos + r
                if not inside and (pos <= i < pos + r or pos <= j < pos + r):
                    if pos <= i < pos + r and not pos <= j < pos + r:
                        assert res.entries[i][j] == R.zero
        pos += r
    assert mat_det(b).val == 0  # unimodular base change
    scales = [blk.scale for blk in blocks]
    assert scales == sorted(scales)


def test_jordan_dense_odd_offdiagonal():
    # min valuation sits off-diagonal and is odd: one hyperbolic block
    g = GramMatrix(R, kmat([[e(3), e(0, 1)], [e(0, -1), e(6)]]))
    blocks, _ = jordan_form(g)
    assert len(blocks) == 1 and blocks[0].kind == "hyperbolic"
    assert blocks[0].scale == 1
    assert invariants(g).fund == (1, 1)


def test_invariants_spec_values():
    inv = invariants(std_lattice(R, "I", n=4, eps=1))
    assert inv == type(inv)(fund=(0, 0, 0, 0), vL=0, tL=0, sign=1, t_o=4)
    inv_h = invariants(std_lattice(R, "H"))
    assert inv_h.fund == (-1, -1) and inv_h.t_o == 0 and inv_h.vL == -1
    inv_h3 = invariants(std_lattice(R, "H", i=3))
    assert inv_h3.fund == (3, 3) and inv_h3.tL == 2 and inv_h3.t_o == 2


def test_invariants_scaling():
    g = std_lattice(R, "diag", entries=[(1, 0), ("s", 1)])
    inv = invariants(g)
    for u in (2, 5, 7):
        scaled = g.scale_form(u)
        inv2 = invariants(scaled)
        assert inv2.fund == inv.fund
        assert inv2.sign == inv.sign * R.chi(Fraction(u)) ** g.n


def test_pi_scaling():
    g = std_lattice(R, "I", n=2, eps=1)
    inv = invariants(g.pi_scaled(3))
    assert inv.fund == (6, 6)  # form scaled by (-pi0)^3
    assert invariants(std_lattice(R, "H").pi_scaled(1)).fund == (1, 1)


def test_dual_gram():
    assert dual_gram(std_lattice(R, "diag", entries=[3])).entries[0][0] == e(
        Fraction(1, 3)
    )
    h = std_lattice(R, "H")
    hd = dual_gram(h)
    assert invariants(hd).fund == (1, 1)  # dual of H is pi H
    i3 = std_lattice(R, "I", n=3, eps=-1)
    assert invariants(dual_gram(i3)).fund == (0, 0, 0)
    # involution up to isometry
    g = std_lattice(R, "diag", entries=[(1, 1), ("s", 2)])
    assert isometry_key(dual_gram(dual_gram(g))) == isometry_key(g)


def test_isometry_key_unit_classes():
    # Diag(u1, u2) with chi(u1 u2) equal are isometric
    a = std_lattice(R, "diag", entries=[2, 2])
    b = std_lattice(R, "diag", entries=[1, 1])
    assert isometry_key(a) == isometry_key(b)
    c = std_lattice(R, "diag", entries=[1, 2])
    assert isometry_key(a) != isometry_key(c)


def test_superlattices_counts():
    g1 = std_lattice(R, "diag", entries=[(1, 1)])
    subs = superlattices(g1, 1)
    assert len(subs) == 1
    assert invariants(subs[0]).fund == (0,)  # exponent drops by one

    g2 = std_lattice(R, "I", n=2, eps=1)
    assert len(superlattices(g2, 1)) == R.q + 1
    g3 = std_lattice(R, "I", n=3, eps=-1)
    assert len(superlattices(g3, 2)) == R.q**2 + R.q + 1
    assert len(superlattices(g3, 0)) == 1
    assert len(superlattices(g3, 3)) == 1


def test_superlattice_gram_consistency():
    g = std_lattice(R, "diag", entries=[(1, 1), ("s", 2), (1, 0)])
    for c in superlattice_bases(g, 1):
        lp = g.rebased(c)
        assert lp.n == 3
        # pi L' ⊆ L ⊆ L'
        assert lp.pi_scaled(1).min_val >= g.min_val


def test_integral_superlattices_unimodular():
    g = std_lattice(R, "I", n=2, eps=1)
    out = integral_superlattices(g)
    assert len(out) == 1


def test_integral_superlattices_rank1():
    g = std_lattice(R, "diag", entries=[(1, 1)])
    out = integral_superlattices(g)
    assert len(out) == 2
    assert sorted(invariants(x).fund for x in out) == [(0,), (2,)]


def test_integral_superlattices_H1():
    g = std_lattice(R, "H", i=1)
    out = integral_superlattices(g)
    assert len(out) == 1 + (R.q + 1)
    funds = sorted(invariants(x).fund for x in out)
    assert funds == [(0, 0)] * (R.q + 1) + [(1, 1)]


def test_integral_superlattices_rejects_nonintegral():
    with pytest.raises(ValueError):
        integral_superlattices(std_lattice(R, "H"))


def test_subspace_alt_sum():
    assert subspace_alt_sum(0, 3) == 1
    assert subspace_alt_sum(1, 3) == 0
    assert subspace_alt_sum(2, 3) == 1 - 4 + 3
    for m in range(1, 7):
        for q in (3, 5, 7):
            assert subspace_alt_sum(m, q) == 0


def test_gaussian_binomial():
    assert gaussian_binomial(3, 1, 3) == 13
    assert gaussian_binomial(3, 2, 3) == 13
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(2, 1, 5) == 6


def test_parse_gram():
    g = parse_gram(R, "diag(1, s*pi0^2) + H")
    assert g.n == 4
    assert g.entries[0][0] == e(1)
    assert g.entries[1][1] == e(2 * 9)
    assert g.entries[2][3] == R.pi.inverse()
    g2 = parse_gram(R, "Hodd(3)")
    assert invariants(g2).fund == (3, 3)
    g3 = parse_gram(R, "diag(pi0)")
    assert g3.entries[0][0] == e(3)
    with pytest.raises(ValueError):
        parse_gram(R, "Hodd(2)")
    with pytest.raises(ValueError):
        parse_gram(R, "spam(1)")


@st.composite
def hermitian_grams(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    small = st.integers(min_value=-4, max_value=4)
    diag = [draw(small) for _ in range(n)]
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = R.ext(Fraction(diag[i]))
        for j in range(i + 1, n):
            x = R.ext(draw(small), draw(small))
            rows[i][j] = x
            rows[j][i] = x.conj
    m = kmat(rows)
    if not mat_det(m):
        return None
    return GramMatrix(R, m)


@settings(max_examples=60, deadline=None)
@given(hermitian_grams())
def test_jordan_isometry_invariance(g):
    if g is None:
        return
    blocks, b = jordan_form(g)
    res = g.rebased(b)
    assert mat_det(b).val == 0
    inv1, inv2 = invariants(g), invariants(res)
    assert inv1 == inv2
    assert sum(blk.rank for blk in blocks) == g.n
    # off-block entries vanish
    pos = 0
    for blk in blocks:
        r = blk.rank
        for i in range(pos, pos + r):
            for j in range(g.n):
                if not pos <= j < pos + r:
                    assert res.entries[i][j] == R.zero
        pos += r
