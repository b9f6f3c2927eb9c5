"""Vertex lattices in the rank-3 Hermitian tree and intersection numbers.

The ambient space V has Gram matrix Phi = [[0, pi^-1], [-pi^-1, 0]] ⊥ <1>,
which is the unique rank-3 Hermitian space of norm-class +1 containing
self-dual lattices.  Vertex lattices are the O_F-lattices Lambda in V with
pi*Lambda ⊆ Lambda^♯ ⊆ Lambda; exactly two colours occur, type 0
(self-dual) and type 2 (dim Lambda/Lambda^♯ = 2), and inclusion makes them
the vertices of a (q+1)-biregular tree.

The support of an integral rank-2 lattice L♭ is the finite connected
subtree {Lambda : L♭ ⊆ Lambda^♯}.  It is enumerated exactly by
breadth-first search from a constructed member, and the local intersection
number of a rank-3 lattice is assembled from supports of its rank-2 chains
plus a rank-2 derived-density bridge.  All arithmetic is exact.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import isqrt
from typing import Optional, Sequence, Union

from . import kr
from .lattice import (
    GramMatrix,
    integral_superlattices,
    invariants,
    isometry_key,
    jordan_form,
    std_from_key,
    std_lattice,
)
from .linalg import (
    Matrix,
    hnf,
    in_lattice,
    kmat,
    lattice_key,
    mat_conj_t,
    mat_det,
    mat_inv,
    mat_mul,
)
from .ring import Extended, Rational, RingConfig, val_pi, vp

Vector = tuple[Extended, ...]

_SEARCH_BOUND = 60
_NORM_CACHE: dict[tuple, Extended] = {}
_PAIR_CACHE: dict[tuple, tuple[Extended, Extended]] = {}
_PRIM2_CACHE: dict[tuple, int] = {}


def _cols_mat(cols: Sequence[Vector]) -> Matrix:
    return kmat([[col[r] for col in cols] for r in range(len(cols[0]))])


def _mat_cols(m: Matrix) -> list[Vector]:
    return [tuple(m[r][c] for r in range(len(m))) for c in range(len(m[0]))]


def _phi(ring: RingConfig) -> Matrix:
    z = ring.zero
    pinv = ring.pi.inverse()
    return kmat([[z, pinv, z], [-pinv, z, z], [z, z, ring.one]])


def _sqrt_fraction(t: Fraction) -> Optional[Fraction]:
    if t < 0:
        return None
    rn, rd = isqrt(t.numerator), isqrt(t.denominator)
    if rn * rn == t.numerator and rd * rd == t.denominator:
        return Fraction(rn, rd)
    return None


def norm_element(ring: RingConfig, w: Rational) -> Extended:
    """An exact z in F with Nm(z) = w, or ValueError if none is found.

    Closed form when the unit part of w is a rational square; otherwise a
    bounded deterministic search for x^2 - pi0*y^2 = t0*d^2.  Targets whose
    unit part is a non-norm (chi = -1 at even valuation) never succeed.
    """
    w = Fraction(w)
    if w == 0:
        raise ValueError("norm_element needs a nonzero target")
    key = (ring.p, str(ring.twist), w)
    if key in _NORM_CACHE:
        return _NORM_CACHE[key]
    t0, v = ring.unit_part(w)
    z: Optional[Extended] = None
    r = _sqrt_fraction(t0)
    if r is not None:
        z = ring.ext(r) * ring.pi**v
    else:
        pi0 = ring.pi0
        for d in range(1, _SEARCH_BOUND + 1):
            tgt = t0 * d * d
            for y in range(_SEARCH_BOUND + 1):
                x2 = tgt + pi0 * y * y
                if x2 <= 0 or x2.denominator != 1:
                    continue
                x = isqrt(x2.numerator)
                if x * x == x2.numerator:
                    z = (ring.ext(Fraction(x, d), Fraction(y, d))) * ring.pi**v
                    break
            if z is not None:
                break
    if z is None:
        raise ValueError(
            f"no element of norm {w} in Q(sqrt({ring.pi0})) within search bounds"
        )
    assert z.norm == w
    _NORM_CACHE[key] = z
    return z


def _solve_two(
    ring: RingConfig, d1: Fraction, d2: Fraction, target: Fraction
) -> tuple[Extended, Extended]:
    """Exact (alpha, beta) with d1*Nm(alpha) + d2*Nm(beta) = target."""
    key = (ring.p, str(ring.twist), d1, d2, target)
    if key in _PAIR_CACHE:
        return _PAIR_CACHE[key]
    out: Optional[tuple[Extended, Extended]] = None
    try:
        out = (ring.zero, norm_element(ring, target / d2))
    except ValueError:
        try:
            out = (norm_element(ring, target / d1), ring.zero)
        except ValueError:
            pass
    if out is None:
        pi0 = ring.pi0
        bound = _SEARCH_BOUND // 2
        for e in range(1, 13):
            te = target * e * e
            for x1 in range(bound + 1):
                for y1 in range(bound + 1):
                    rem = te - d1 * (x1 * x1 - pi0 * y1 * y1)
                    for y2 in range(bound + 1):
                        x22 = rem / d2 + pi0 * y2 * y2
                        if x22 < 0 or x22.denominator != 1:
                            continue
                        x2 = isqrt(x22.numerator)
                        if x2 * x2 == x22.numerator:
                            out = (
                                ring.ext(Fraction(x1, e), Fraction(y1, e)),
                                ring.ext(Fraction(x2, e), Fraction(y2, e)),
                            )
                            break
                    if out:
                        break
                if out:
                    break
            if out:
                break
    if out is None:
        raise ValueError(
            f"no solution of {d1}*Nm(a) + {d2}*Nm(b) = {target} within search bounds"
        )
    assert d1 * out[0].norm + d2 * out[1].norm == target
    _PAIR_CACHE[key] = out
    return out


def _vec_comb(cols: Sequence[Vector], coeffs: Sequence[Extended]) -> Vector:
    n = len(cols[0])
    out = []
    for r in range(n):
        acc = coeffs[0] * cols[0][r]
        for c, col in zip(coeffs[1:], cols[1:]):
            acc = acc + c * col[r]
        out.append(acc)
    return tuple(out)


def _vec_scale(col: Vector, c: Extended) -> Vector:
    return tuple(c * x for x in col)


@dataclass(frozen=True)
class AmbientSpace:
    """A lattice embedded in the standard rank-3 space: basis^* Phi basis = gram."""

    ring: RingConfig
    phi: Matrix
    basis: Matrix
    gram: GramMatrix
    unit_scale: Fraction

    @property
    def rank(self) -> int:
        return len(self.phi)

    def columns(self) -> list[Vector]:
        return _mat_cols(self.basis)

    def pair(self, x: Sequence[Extended], y: Sequence[Extended]) -> Extended:
        acc = self.ring.zero
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                acc = acc + xi.conj * self.phi[i][j] * yj
        return acc

    def norm(self, x: Sequence[Extended]) -> Fraction:
        return self.pair(x, x).f0

    def gram_of(self, cols: Sequence[Vector]) -> GramMatrix:
        return GramMatrix(
            self.ring, kmat([[self.pair(a, b) for b in cols] for a in cols])
        )


def _hvec(ring: RingConfig, t: Fraction) -> Vector:
    # (-t/2 * pi, 1, 0) has norm exactly t in the hyperbolic block
    return (ring.ext(0, Fraction(-t, 2)), ring.one, ring.zero)


def _hvec_perp(ring: RingConfig, t: Fraction) -> Vector:
    # (t/2 * pi, 1, 0) has norm -t and is orthogonal to _hvec(t)
    return (ring.ext(0, Fraction(t, 2)), ring.one, ring.zero)


def _embed_diag(ring: RingConfig, ts: Sequence[Fraction]) -> list[Vector]:
    """Pairwise orthogonal vectors of prescribed norms ts (len 1..3)."""
    last_err: Optional[ValueError] = None
    for perm in permutations(range(len(ts))):
        try:
            ordered = _embed_diag_ordered(ring, [ts[i] for i in perm])
        except ValueError as exc:
            last_err = exc
            continue
        cols: list[Optional[Vector]] = [None] * len(ts)
        for slot, orig in enumerate(perm):
            cols[orig] = ordered[slot]
        return cols  # type: ignore[return-value]
    assert last_err is not None
    raise last_err


def _embed_diag_ordered(ring: RingConfig, ts: Sequence[Fraction]) -> list[Vector]:
    xa = _hvec(ring, ts[0])
    if len(ts) == 1:
        return [xa]
    w1 = _hvec_perp(ring, ts[0])
    w2 = (ring.zero, ring.zero, ring.one)
    d1, d2 = -ts[0], Fraction(1)
    alpha, beta = _solve_two(ring, d1, d2, ts[1])
    xb = _vec_comb([w1, w2], [alpha, beta])
    if len(ts) == 2:
        return [xa, xb]
    # the line orthogonal to xb inside span{w1, w2} has norm d1*d2*ts[1]
    x0 = _vec_comb([w1, w2], [beta.conj * d2, -(alpha.conj * d1)])
    mu = norm_element(ring, ts[2] / (d1 * d2 * ts[1]))
    return [xa, xb, _vec_scale(x0, mu)]


def embed(l_lat: GramMatrix) -> AmbientSpace:
    """Exact isometric embedding of a rank 1..3 lattice into the standard space.

    Rank-3 inputs of norm-class -1 are embedded after the unit form rescale
    recorded in unit_scale; types, duals and memberships are unchanged by
    that rescale.  The defining invariant basis^* Phi basis = gram holds
    entrywise exactly.
    """
    ring = l_lat.ring
    n = l_lat.n
    if not 1 <= n <= 3:
        raise ValueError("embed expects rank 1..3")
    unit_scale = Fraction(1)
    work = l_lat
    if n == 3 and l_lat.sign == -1:
        unit_scale = Fraction(ring.s)
        work = l_lat.scale_form(unit_scale)
    blocks, bmat = jordan_form(work)
    planes = [b for b in blocks if b.kind == "hyperbolic"]
    unaries = [b for b in blocks if b.kind == "unary"]
    cols_of: dict[int, list[Vector]] = {}
    z = ring.zero
    if planes:
        blk = planes[0]
        f = (blk.scale + 1) // 2
        g01 = blk.gram[0][1]
        sgn = ring.one if f % 2 == 0 else -ring.one
        cols_of[id(blk)] = [
            (ring.pi**f, z, z),
            (z, sgn * g01 * ring.pi ** (1 - f), z),
        ]
        for ub in unaries:
            gamma = norm_element(ring, ub.gram[0][0].f0)
            cols_of[id(ub)] = [(z, z, gamma)]
    else:
        diag_cols = _embed_diag(ring, [ub.gram[0][0].f0 for ub in unaries])
        for ub, col in zip(unaries, diag_cols):
            cols_of[id(ub)] = [col]
    block_cols: list[Vector] = []
    for blk in blocks:
        block_cols.extend(cols_of[id(blk)])
    basis = mat_mul(_cols_mat(block_cols), mat_inv(bmat))
    amb = AmbientSpace(
        ring=ring, phi=_phi(ring), basis=basis, gram=work, unit_scale=unit_scale
    )
    assert amb.gram_of(amb.columns()).entries == work.entries
    return amb


@dataclass(frozen=True)
class VertexLattice:
    """A type-0 or type-2 vertex: canonical basis and exact Gram."""

    ring: RingConfig
    basis: Matrix
    key: tuple
    type: int
    gram: Matrix

    def member(self, x: Sequence[Extended]) -> bool:
        return in_lattice(self.basis, tuple(x))


def _vertex_from_cols(
    amb: AmbientSpace, cols: Sequence[Vector]
) -> Optional[VertexLattice]:
    ring = amb.ring
    try:
        basis = hnf(ring, [tuple(c) for c in cols])
    except ValueError:
        return None
    bcols = _mat_cols(basis)
    gram = kmat([[amb.pair(a, b) for b in bcols] for a in bcols])
    # pi*Lambda ⊆ Lambda^♯ means every pairing has valuation >= -1
    if any(val_pi(e) < -1 for row in gram for e in row):
        return None
    dv = val_pi(mat_det(gram))
    if dv not in (0, -2):
        return None
    ginv = mat_inv(gram)
    if any(not e.is_integral for row in ginv for e in row):
        return None
    return VertexLattice(
        ring=ring,
        basis=basis,
        key=lattice_key(basis),
        type=-int(dv),
        gram=gram,
    )


def member(lam: VertexLattice, x: Sequence[Extended]) -> bool:
    return lam.member(x)


def in_dual(amb: AmbientSpace, lam: VertexLattice, x: Sequence[Extended]) -> bool:
    """x ∈ Lambda^♯, tested as integrality of all pairings with the basis."""
    return all(
        amb.pair(x, b).is_integral for b in _mat_cols(lam.basis)
    )


def dual(amb: AmbientSpace, lam: VertexLattice) -> Matrix:
    """Canonical basis of Lambda^♯ (equals the vertex basis iff type 0)."""
    ginv = mat_inv(lam.gram)
    return hnf(amb.ring, _mat_cols(mat_mul(lam.basis, ginv)))


def int_pairing(x: Sequence[Extended], lam: VertexLattice) -> int:
    """Local pairing of a vector against a vertex: type 2 counts +1, type 0 -1."""
    if lam.type == 2:
        return 1 if lam.member(x) else 0
    return -1 if lam.member(x) else 0


def _proj_reps(q: int) -> list[tuple[int, int, int]]:
    reps: list[tuple[int, int, int]] = [(1, a, b) for a in range(q) for b in range(q)]
    reps += [(0, 1, b) for b in range(q)]
    reps.append((0, 0, 1))
    return reps


def neighbors(amb: AmbientSpace, lam: VertexLattice) -> list[VertexLattice]:
    """The q+1 tree neighbours: type-2 superlattices of a type-0 vertex and
    self-dual sublattices of a type-2 vertex."""
    ring = amb.ring
    q = ring.q
    out: dict[tuple, VertexLattice] = {}
    base_cols = _mat_cols(lam.basis)
    if lam.type == 0:
        pinv = ring.pi.inverse()
        # only residue-isotropic directions yield type-2 superlattices
        diag = [lam.gram[i][i].f0 for i in range(3)]
        trace = {
            (i, j): (lam.gram[i][j] + lam.gram[j][i]).f0
            for i in range(3)
            for j in range(i + 1, 3)
        }
        for u in _proj_reps(q):
            qval = sum(u[i] * u[i] * diag[i] for i in range(3)) + sum(
                u[i] * u[j] * t for (i, j), t in trace.items()
            )
            if qval != 0 and vp(qval, ring.p) < 1:
                continue
            vec = _vec_comb(base_cols, [ring.ext(c) for c in u])
            cand = _vertex_from_cols(amb, base_cols + [_vec_scale(vec, pinv)])
            if cand is not None and cand.type == 2:
                out[cand.key] = cand
    else:
        dual_cols = _mat_cols(mat_mul(lam.basis, mat_inv(lam.gram)))
        for u in _proj_reps(q):
            vec = _vec_comb(base_cols, [ring.ext(c) for c in u])
            cand = _vertex_from_cols(amb, dual_cols + [vec])
            if cand is not None and cand.type == 0:
                out[cand.key] = cand
    found = [out[k] for k in sorted(out)]
    assert len(found) == q + 1, f"expected {q + 1} neighbours, got {len(found)}"
    return found


def _ortho_complement(amb: AmbientSpace, a: Vector, b: Vector) -> Vector:
    phi = amb.phi
    n = len(phi)
    ra = [sum((a[i].conj * phi[i][j] for i in range(n)), amb.ring.zero) for j in range(n)]
    rb = [sum((b[i].conj * phi[i][j] for i in range(n)), amb.ring.zero) for j in range(n)]
    w = (
        ra[1] * rb[2] - ra[2] * rb[1],
        -(ra[0] * rb[2] - ra[2] * rb[0]),
        ra[0] * rb[1] - ra[1] * rb[0],
    )
    assert any(w), "degenerate pair has no orthogonal complement"
    assert not amb.pair(a, w) and not amb.pair(b, w)
    return w


def _seed_vertex(amb: AmbientSpace, spine: Sequence[Vector]) -> VertexLattice:
    """A constructed support member: self-dual over a diagonalized spine,
    the central type-2 vertex over a hyperbolic spine."""
    ring = amb.ring
    g2 = amb.gram_of(spine)
    blocks, bmat = jordan_form(g2)
    bcols = _mat_cols(bmat)
    tcols = [_vec_comb(spine, bc) for bc in bcols]
    if blocks[0].kind == "hyperbolic":
        f = (blocks[0].scale + 1) // 2
        sc = ring.pi ** (-f)
        m1, m2 = _vec_scale(tcols[0], sc), _vec_scale(tcols[1], sc)
        w0 = _ortho_complement(amb, m1, m2)
        e = val_pi(amb.pair(w0, w0))
        assert isinstance(e, int) and e % 2 == 0
        w = _vec_scale(w0, ring.pi ** (-e // 2))
        cols = [m1, m2, w]
    else:
        zs = []
        for blk, col in zip(blocks, tcols):
            zs.append(_vec_scale(col, ring.pi ** (-(blk.scale // 2))))
        w0 = _ortho_complement(amb, zs[0], zs[1])
        e = val_pi(amb.pair(w0, w0))
        assert isinstance(e, int) and e % 2 == 0
        w = _vec_scale(w0, ring.pi ** (-e // 2))
        cols = [zs[0], zs[1], w]
    lam = _vertex_from_cols(amb, cols)
    assert lam is not None, "seed construction must produce a vertex"
    return lam


def _support_bfs(
    amb: AmbientSpace, spine: Sequence[Vector], budget: Optional[int] = None
) -> tuple[dict[tuple, VertexLattice], dict[tuple, list[VertexLattice]]]:
    """All vertices Lambda with spine ⊆ Lambda^♯, by flood fill from a seed.

    Returns the members and the neighbour lists computed along the way,
    so callers never recompute adjacency.
    """
    if budget is None:
        env = os.environ.get("HERMDENS_ENUM_LIMIT")
        budget = int(env) if env else 60_000
    g2 = amb.gram_of(spine)
    if not g2.is_integral:
        raise ValueError("support enumeration needs an integral rank-2 lattice")
    maxf = max(invariants(g2).fund)

    def is_member(lam: VertexLattice) -> bool:
        return all(in_dual(amb, lam, c) for c in spine)

    seed = _seed_vertex(amb, spine)
    assert is_member(seed)
    members = {seed.key: seed}
    nbrs: dict[tuple, list[VertexLattice]] = {}
    rejected: set[tuple] = set()
    frontier = [seed]
    layers = 0
    while frontier:
        layers += 1
        assert layers <= maxf + 3, "support exceeded its radius bound"
        nxt = []
        for lam in frontier:
            found = neighbors(amb, lam)
            nbrs[lam.key] = found
            for nb in found:
                if nb.key in members or nb.key in rejected:
                    continue
                if is_member(nb):
                    members[nb.key] = nb
                    nxt.append(nb)
                else:
                    rejected.add(nb.key)
        frontier = nxt
        if len(members) > budget:
            raise RuntimeError("support enumeration budget exceeded")
    return members, nbrs


@dataclass(frozen=True, eq=False)
class SupportSet:
    """The support of an integral rank-2 lattice, with incidence and flags."""

    l_flat: GramMatrix
    ambient: AmbientSpace
    type0: tuple[VertexLattice, ...]
    type2: tuple[VertexLattice, ...]
    incidence: dict
    boundary: frozenset
    skeleton: frozenset

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return (
            len(self.type0),
            len(self.type2),
            len(self.boundary),
            len(self.skeleton),
        )

    def to_json(self) -> str:
        verts = list(self.type0) + list(self.type2)
        index = {lam.key: i for i, lam in enumerate(verts)}
        data = {
            "vertices": [
                {
                    "id": i,
                    "type": lam.type,
                    "basis": [[repr(e) for e in row] for row in lam.basis],
                    "boundary": lam.key in self.boundary,
                    "skeleton": lam.key in self.skeleton,
                }
                for i, lam in enumerate(verts)
            ],
            "edges": sorted(
                [index[k2], index[k0]]
                for k2, kids in self.incidence.items()
                for k0 in kids
            ),
        }
        return json.dumps(data, indent=2)


def enumerate_support(l_flat: GramMatrix) -> SupportSet:
    """BFS enumeration of {Lambda : L♭ ⊆ Lambda^♯} for integral rank-2 L♭."""
    if l_flat.n != 2:
        raise ValueError("enumerate_support expects a rank-2 lattice")
    if not l_flat.is_integral:
        raise ValueError("enumerate_support expects an integral lattice")
    amb = embed(l_flat)
    spine = amb.columns()
    members, nbrs = _support_bfs(amb, spine)
    type0 = tuple(
        lam for _, lam in sorted(members.items()) if lam.type == 0
    )
    type2 = tuple(
        lam for _, lam in sorted(members.items()) if lam.type == 2
    )
    incidence: dict[tuple, tuple] = {}
    for lam in type2:
        kids = nbrs[lam.key]
        assert all(k.key in members for k in kids)
        incidence[lam.key] = tuple(sorted(k.key for k in kids))
    boundary = frozenset(
        lam.key
        for lam in type0
        if any(s.key not in members for s in nbrs[lam.key])
    )
    skeleton: set[tuple] = set()
    inv = invariants(l_flat)
    if inv.fund[0] % 2 == 0:
        a = inv.fund[0] // 2
        sc = l_flat.ring.pi ** (-a)
        scaled = [_vec_scale(c, sc) for c in spine]
        skeleton = {
            lam.key
            for lam in members.values()
            if all(in_dual(amb, lam, c) for c in scaled)
        }
    return SupportSet(
        l_flat=l_flat,
        ambient=amb,
        type0=type0,
        type2=type2,
        incidence=incidence,
        boundary=boundary,
        skeleton=frozenset(skeleton),
    )


def support_counts_closed(l_flat: GramMatrix) -> tuple[int, int, int, int]:
    """Closed-form (|type0|, |type2|, |boundary|, |skeleton|) of a support.

    Hyperbolic L♭ of scale 2c+1 gives the ball of radius c+1/2 around a
    type-2 vertex.  A diagonal L♭ with fundamental invariants (2a, 2a+2r)
    gives the radius-a ball around one type-0 vertex when r = 0 or the
    minimal-scale unit is a non-norm, else the radius-a tube around the
    radius-r skeleton ball, whose type-0 vertices carry 2 skeleton edges
    and q-1 (interior) or q (tips) hanging branches.
    """
    if l_flat.n != 2:
        raise ValueError("support_counts_closed expects a rank-2 lattice")
    if not l_flat.is_integral:
        raise ValueError("support_counts_closed expects an integral lattice")
    ring = l_flat.ring
    q = ring.q
    blocks, _ = jordan_form(l_flat)
    if blocks[0].kind == "hyperbolic":
        c = (blocks[0].scale - 1) // 2
        v2 = 1 + q * (q ** (2 * c) - 1) // (q - 1)
        v0 = (q ** (2 * c + 2) - 1) // (q - 1)
        return (v0, v2, (q + 1) * q ** (2 * c), 0)
    a, b = blocks[0].scale // 2, blocks[1].scale // 2
    r = b - a
    if r == 0 or blocks[0].unit_chi == -1:
        v0 = 1 + q * (q ** (2 * a) - 1) // (q - 1)
        v2 = (q ** (2 * a) - 1) // (q - 1)
        bd = 1 if a == 0 else (q + 1) * q ** (2 * a - 1)
        return (v0, v2, bd, 1)
    s0 = 1 + 2 * q * (q**r - 1) // (q - 1)
    s2 = 2 * (q**r - 1) // (q - 1)
    nb = (q + 1) * (2 * q**r - 1)
    p0 = q * (q ** (2 * a) - 1) // (q * q - 1)
    p2 = (q ** (2 * a) - 1) // (q * q - 1)
    bd = s0 if a == 0 else nb * q ** (2 * a - 1)
    return (s0 + nb * p0, s2 + nb * p2, bd, s0 + s2)


def mu(q: int, a: int, b: int) -> int:
    """Multiplicity weight: 2*sum_(s=0..a) q^s*(a+b+1-2s) - a - b - 2 for a >= 0."""
    if a < 0:
        return 0
    return 2 * sum(q**s * (a + b + 1 - 2 * s) for s in range(a + 1)) - a - b - 2


def _std_parts(ring: RingConfig, key: tuple) -> tuple[GramMatrix, list[dict]]:
    """std_from_key plus the column layout of its blocks."""
    gram = std_from_key(ring, key)
    parts: list[dict] = []
    col = 0
    for scale, rank, chiv in key:
        if scale % 2:
            for _ in range(rank // 2):
                parts.append({"kind": "plane", "scale": scale, "cols": (col, col + 1)})
                col += 2
        else:
            for j in range(rank):
                last = j == rank - 1
                parts.append(
                    {
                        "kind": "unary",
                        "scale": scale,
                        "chi": chiv if last else 1,
                        "cols": (col,),
                    }
                )
                col += 1
    return gram, parts


def _subgram_cols(g: GramMatrix, cols: Sequence[int]) -> GramMatrix:
    rows = [[g.entries[i][j] for j in cols] for i in cols]
    return GramMatrix(g.ring, kmat(rows))


def int_prim2(l_flat: GramMatrix, x_norm: Rational) -> int:
    """Primitive intersection sum over the support of L♭ with v(L♭) >= 1:
    sum over type-2 vertices of 2*1(x) minus the type-0 children's 1(x)."""
    ring = l_flat.ring
    if l_flat.n != 2:
        raise ValueError("int_prim2 expects a rank-2 lattice")
    if not l_flat.is_integral or invariants(l_flat).vL < 1:
        raise ValueError("int_prim2 needs v(L♭) >= 1")
    t = Fraction(x_norm)
    if t == 0:
        raise ValueError("int_prim2 needs a nonzero norm")
    u0, v = ring.unit_part(t)
    if v < 0:
        raise ValueError("int_prim2 needs an integral vector")
    ckey = (ring.p, str(ring.twist), isometry_key(l_flat), ring.chi(u0), v)
    if ckey in _PRIM2_CACHE:
        return _PRIM2_CACHE[ckey]
    # embed a class representative decomposed as (rank-2 class) ⊥ <x class>,
    # rescaled by s when the combined norm-class is -1
    scale = Fraction(1)
    if l_flat.perp(std_lattice(ring, "diag", entries=[t])).sign == -1:
        scale = Fraction(ring.s)
    rep_flat = std_from_key(ring, isometry_key(l_flat.scale_form(scale)))
    x_cls = ring.chi(u0 * scale)
    rep3 = rep_flat.perp(
        std_lattice(ring, "diag", entries=[(1 if x_cls == 1 else "s", v)])
    )
    assert rep3.sign == 1
    amb = embed(rep3)
    cols = amb.columns()
    x = cols[2]
    members, nbrs = _support_bfs(amb, cols[:2])
    total = 0
    for lam in members.values():
        if lam.type != 2:
            continue
        total += 2 * (1 if lam.member(x) else 0)
        for kid in nbrs[lam.key]:
            assert kid.key in members
            total -= 1 if kid.member(x) else 0
    _PRIM2_CACHE[ckey] = total
    return total


def _gram_of_parts(ring: RingConfig, rep: GramMatrix, parts: Sequence[dict]) -> GramMatrix:
    cols: list[int] = []
    for p in parts:
        cols.extend(p["cols"])
    return _subgram_cols(rep, cols)


def int_total(l_lat: GramMatrix) -> int:
    """Local intersection number of a rank-3 lattice.

    Dispatch: non-integral gives 0; v(L) = 0 splits off a unimodular vector
    and adds the rank-2 derived density of its complement to a filtered
    count of self-dual vertices; v(L) >= 1 sums primitive terms over the
    integral superlattices of the rank-2 complement of a maximal-valuation
    diagonal vector, bridging v = 0 chain terms through the derived density.
    """
    ring = l_lat.ring
    if l_lat.n != 3:
        raise ValueError("int_total expects a rank-3 lattice")
    if l_lat.min_val < 0:
        return 0
    rep, parts = _std_parts(ring, isometry_key(l_lat))
    if invariants(rep).vL == 0:
        part0 = parts[0]
        assert part0["kind"] == "unary" and part0["scale"] == 0
        u1 = rep.entries[0][0].f0
        t2 = _gram_of_parts(ring, rep, parts[1:])
        analytic = kr.pden(t2.scale_form(Fraction(1) / u1))
        rep_pos = rep
        if rep.sign == -1:
            rep_pos, pparts = _std_parts(
                ring, isometry_key(rep.scale_form(Fraction(ring.s)))
            )
            assert pparts[0]["scale"] == 0
        amb = embed(rep_pos)
        cols = amb.columns()
        members, _ = _support_bfs(amb, cols[1:])
        count = sum(
            1 for lam in members.values() if lam.type == 0 and lam.member(cols[0])
        )
        total = analytic + count
    else:
        unary_parts = [p for p in parts if p["kind"] == "unary"]
        xpart = unary_parts[-1]
        t_x = rep.entries[xpart["cols"][0]][xpart["cols"][0]].f0
        l_flat = _gram_of_parts(ring, rep, [p for p in parts if p is not xpart])
        total = Fraction(0)
        for gsup in integral_superlattices(l_flat):
            if invariants(gsup).vL == 0:
                total += kr.pden_prim(
                    gsup.perp(std_lattice(ring, "diag", entries=[t_x])), 2
                )
            else:
                total += int_prim2(gsup, t_x)
    total = Fraction(total)
    assert total.denominator == 1
    return int(total)
