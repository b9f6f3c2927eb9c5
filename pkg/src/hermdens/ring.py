"""Exact arithmetic in F0 = Q_p (p odd) and the ramified extension F = F0(pi), pi^2 = pi0.

Scalars are pairs a + b*pi with a, b rational (p-power denominators in
practice, but nothing enforces that); conjugation sends pi to -pi.  The
quadratic character chi of F0^x attached to F/F0 is evaluated through the
canonical unit decomposition t = t0 * (-pi0)^v, since -pi0 = Nm(pi) is a
norm and the norm units are exactly the residues mod p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

INF = math.inf

Rational = Union[int, Fraction]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=None)
def smallest_nonresidue(p: int) -> int:
    for a in range(2, p):
        if legendre(a, p) == -1:
            return a
    raise ValueError(f"no quadratic non-residue mod {p}")


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for odd prime p; a must be prime to p."""
    a %= p
    if a == 0:
        raise ValueError("Legendre symbol of a multiple of p")
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def vp(x: Rational, p: int) -> Union[int, float]:
    """p-adic valuation of a rational; +inf for 0."""
    x = Fraction(x)
    if x == 0:
        return INF
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class RingConfig:
    """F0 = Q_p with the ramified quadratic extension F = F0(pi), pi0 = pi^2 = twist*p.

    twist is a unit class in {1, s}, s the smallest non-residue mod p; the two
    choices give the two ramified quadratic extensions of Q_p (p odd).
    precision_d is the default level for modular computations (level d works
    mod pi^(2d)).
    """

    p: int
    precision_d: int = 2
    twist: Union[int, str] = 1

    def __post_init__(self) -> None:
        if self.p % 2 == 0 or not _is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.precision_d < 1:
            raise ValueError("precision_d must be >= 1")
        if self.twist == "s":
            object.__setattr__(self, "twist", smallest_nonresidue(self.p))
        if self.twist not in (1, smallest_nonresidue(self.p)):
            raise ValueError(
                f"twist must be 1 or {smallest_nonresidue(self.p)} (or 's') at p={self.p}"
            )

    @property
    def q(self) -> int:
        """Residue field size (= p for F0 = Q_p)."""
        return self.p

    @property
    def s(self) -> int:
        return smallest_nonresidue(self.p)

    @property
    def pi0(self) -> Fraction:
        return Fraction(self.twist * self.p)

    def ext(self, a: Rational, b: Rational = 0) -> "Extended":
        return Extended(self, Fraction(a), Fraction(b))

    @property
    def zero(self) -> "Extended":
        return self.ext(0)

    @property
    def one(self) -> "Extended":
        return self.ext(1)

    @property
    def pi(self) -> "Extended":
        return self.ext(0, 1)

    def unit_part(self, t: Rational) -> tuple[Fraction, int]:
        """Decompose t = t0 * (-pi0)^v with t0 a p-adic unit; returns (t0, v)."""
        t = Fraction(t)
        if t == 0:
            raise ValueError("unit_part of 0")
        v = vp(t, self.p)
        return t / (-self.pi0) ** v, v

    def chi(self, t: Rational) -> int:
        """Quadratic character of F0^x attached to F/F0: 1 on norms, -1 otherwise."""
        t0, _ = self.unit_part(t)
        return legendre(t0.numerator * t0.denominator, self.p)


@dataclass(frozen=True)
class Extended:
    """Element a + b*pi of F = F0(pi)."""

    ring: RingConfig
    a: Fraction
    b: Fraction

    def _co(self, other: Union["Extended", Rational]) -> "Extended":
        if isinstance(other, Extended):
            if other.ring != self.ring:
                raise ValueError("mixed ring configurations")
            return other
        return self.ring.ext(other)

    def __add__(self, other: Union["Extended", Rational]) -> "Extended":
        o = self._co(other)
        return Extended(self.ring, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "Extended":
        return Extended(self.ring, -self.a, -self.b)

    def __sub__(self, other: Union["Extended", Rational]) -> "Extended":
        return self + (-self._co(other))

    def __rsub__(self, other: Union["Extended", Rational]) -> "Extended":
        return self._co(other) - self

    def __mul__(self, other: Union["Extended", Rational]) -> "Extended":
        o = self._co(other)
        pi0 = self.ring.pi0
        return Extended(
            self.ring,
            self.a * o.a + pi0 * self.b * o.b,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Extended":
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out = self.ring.one
        for _ in range(abs(n)):
            out = out * base
        return out

    def inverse(self) -> "Extended":
        n = self.norm
        if n == 0:
            raise ZeroDivisionError("inverse of 0 in F")
        return Extended(self.ring, self.a / n, -self.b / n)

    def __truediv__(self, other: Union["Extended", Rational]) -> "Extended":
        return self * self._co(other).inverse()

    def __rtruediv__(self, other: Union["Extended", Rational]) -> "Extended":
        return self._co(other) * self.inverse()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.a == other and self.b == 0
        if isinstance(other, Extended):
            return self.ring == other.ring and self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.ring.p, self.ring.twist))

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    @property
    def conj(self) -> "Extended":
        return Extended(self.ring, self.a, -self.b)

    @property
    def trace(self) -> Fraction:
        return 2 * self.a

    @property
    def norm(self) -> Fraction:
        return self.a * self.a - self.ring.pi0 * self.b * self.b

    @property
    def val(self) -> Union[int, float]:
        """pi-adic valuation: min(2 vp(a), 1 + 2 vp(b)); INF at zero."""
        if not self:
            return INF
        cands = []
        if self.a:
            cands.append(2 * vp(self.a, self.ring.p))
        if self.b:
            cands.append(1 + 2 * vp(self.b, self.ring.p))
        return min(cands)

    @property
    def is_integral(self) -> bool:
        return self.val >= 0

    @property
    def f0(self) -> Fraction:
        """The rational value, for elements known to lie in F0."""
        if self.b != 0:
            raise ValueError(f"{self} is not in F0")
        return self.a

    def __repr__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*pi"
        return f"{self.a} + {self.b}*pi"


def galois(x: Extended) -> tuple[Extended, Fraction, Fraction]:
    """Conjugate, trace and norm of x (trace and norm land in F0)."""
    return x.conj, x.trace, x.norm


def val_pi(x: Extended) -> Union[int, float]:
    return x.val


def chi(ring: RingConfig, t: Union[Rational, Extended]) -> int:
    """chi(t) for nonzero t in F0; Extended input must have zero pi-part."""
    if isinstance(t, Extended):
        t = t.f0
    return ring.chi(t)
