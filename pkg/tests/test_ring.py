"""Arithmetic of F = F0(pi): conjugation, valuation, norms, unit characters."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermdens.ring import INF, Extended, RingConfig, chi, galois, legendre, val_pi, vp

R3 = RingConfig(p=3)
R3S = RingConfig(p=3, twist="s")
R5 = RingConfig(p=5)


def test_ring_config_validation():
    with pytest.raises(ValueError):
        RingConfig(p=2)
    with pytest.raises(ValueError):
        RingConfig(p=9)
    with pytest.raises(ValueError):
        RingConfig(p=3, precision_d=0)
    with pytest.raises(ValueError):
        RingConfig(p=3, twist=4)
    assert RingConfig(p=3, twist=2).twist == 2  # 2 = s at p=3


def test_twist_pi0():
    assert R3.pi0 == 3
    assert R3S.s == 2
    assert R3S.pi0 == 6
    assert RingConfig(p=5, twist="s").pi0 == 10


def test_galois_basics():
    x = R3.pi
    c, t, n = galois(x)
    assert c == -R3.pi
    assert t == 0
    assert n == -3

    y = R3.ext(1, 1)  # 1 + pi
    c, t, n = galois(y)
    assert c == R3.ext(1, -1)
    assert t == 2
    assert n == 1 - 3


def test_val_pi():
    assert val_pi(R3.pi) == 1
    assert val_pi(R3.ext(Fraction(1, 3))) == -2
    assert val_pi(R3.ext(1, 1)) == 0
    assert val_pi(R3.zero) is INF
    assert val_pi(R3.ext(0, Fraction(1, 3))) == -1
    assert val_pi(R3.ext(9, 3)) == 3
    assert val_pi(R3.ext(9, 9)) == 4


def test_chi_spec_values():
    assert chi(R3, 1) == 1
    assert chi(R3, 2) == -1
    assert chi(R3, R3.pi0) == -1
    assert chi(R3, -R3.pi0) == 1
    assert chi(R5, 2) == -1
    assert chi(R5, 4) == 1


def test_chi_norm_trivial():
    # chi is trivial exactly on norms: Nm(a + b pi) = a^2 - pi0 b^2
    for ring in (R3, R3S, R5):
        for a in range(1, 5):
            for b in range(0, 4):
                n = a * a - ring.pi0 * b * b
                if n != 0:
                    assert chi(ring, Fraction(n)) == 1
        assert chi(ring, -ring.pi0) == 1  # Nm(pi)


def test_chi_multiplicative():
    units = [1, 2, 4, 5, 7, 8, Fraction(1, 2), Fraction(2, 5)]
    for ring in (R3, R5):
        vals = [u * (-ring.pi0) ** k for u in units for k in range(-2, 3)]
        for x in vals[:12]:
            for y in vals[:12]:
                assert chi(ring, x * y) == chi(ring, x) * chi(ring, y)


def test_chi_rejects_zero():
    with pytest.raises(ValueError):
        chi(R3, 0)


def test_legendre():
    assert legendre(1, 3) == 1
    assert legendre(2, 3) == -1
    assert [legendre(a, 7) for a in (1, 2, 3, 4, 5, 6)] == [1, 1, -1, 1, -1, -1]
    with pytest.raises(ValueError):
        legendre(6, 3)


def test_vp():
    assert vp(12, 2) == 2
    assert vp(Fraction(1, 9), 3) == -2
    assert vp(0, 3) is INF


def test_unit_part():
    t0, v = R3.unit_part(Fraction(-18))
    assert v == 2 and t0 == -2 and t0 * (-R3.pi0) ** v == -18
    t0, v = R3.unit_part(Fraction(5))
    assert v == 0 and t0 == 5
    t0, v = R3.unit_part(Fraction(1, 3))
    assert v == -1 and t0 == Fraction(-1)


def test_extended_field_ops():
    x = R3.ext(2, 5)
    y = R3.ext(-1, Fraction(1, 3))
    assert (x * y) * x.inverse() == y * (x * x.inverse())
    assert x * x.inverse() == R3.one
    assert (x / y) * y == x
    assert x - x == R3.zero
    assert -x + x == R3.zero
    with pytest.raises(ZeroDivisionError):
        R3.zero.inverse()


def test_extended_mixed_scalars():
    x = R3.ext(2, 1)
    assert x + 1 == R3.ext(3, 1)
    assert 2 * x == R3.ext(4, 2)
    assert x - Fraction(1, 2) == R3.ext(Fraction(3, 2), 1)
    assert x / 2 == R3.ext(1, Fraction(1, 2))


def test_extended_cross_ring_rejected():
    with pytest.raises(ValueError):
        R3.pi + R5.pi


def test_integrality():
    assert R3.ext(1, 1).is_integral
    assert not R3.ext(Fraction(1, 3)).is_integral
    assert R3.ext(0, Fraction(2, 5)).is_integral
    assert not R3.ext(0, Fraction(1, 3)).is_integral


rationals = st.fractions(
    min_value=-50, max_value=50, max_denominator=20
)


@given(a=rationals, b=rationals, c=rationals, d=rationals)
def test_norm_multiplicative(a, b, c, d):
    x = R3.ext(a, b)
    y = R3.ext(c, d)
    assert (x * y).norm == x.norm * y.norm


@given(a=rationals, b=rationals, c=rationals, d=rationals)
def test_val_pi_additive(a, b, c, d):
    x = R5.ext(a, b)
    y = R5.ext(c, d)
    if x and y:
        assert val_pi(x * y) == val_pi(x) + val_pi(y)
        assert val_pi(x) == vp(x.norm, 5)


@given(a=rationals, b=rationals)
def test_conj_is_involution(a, b):
    x = R3S.ext(a, b)
    assert x.conj.conj == x
    assert x * x.conj == R3S.ext(x.norm)
    assert x + x.conj == R3S.ext(x.trace)
