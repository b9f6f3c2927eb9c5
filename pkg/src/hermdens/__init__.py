"""Exact local densities of Hermitian lattices at an odd ramified prime.

The base field F0 = Q_p carries a ramified quadratic extension
F = F0(pi) with pi^2 = pi0 a uniformizer of F0.  This package computes
Hermitian representation densities and their derivatives in exact
rational arithmetic, and cross-checks rank-3 derived densities against
an intersection count on the Bruhat-Tits tree of a rank-3 unitary
group, where both types of vertex lattices live.
"""

from hermdens.kr import (
    CoefficientTable,
    coefficient_table,
    family_size,
    pden,
    pden_prim,
    self_density,
)
from hermdens.lattice import (
    GramMatrix,
    JordanBlock,
    LatticeInvariants,
    dual_gram,
    integral_superlattices,
    invariants,
    isometry_key,
    jordan_form,
    parse_gram,
    std_from_key,
    std_lattice,
    subspace_alt_sum,
    superlattices,
)
from hermdens.ring import Extended, RingConfig, chi, galois, val_pi
from hermdens.tree import (
    AmbientSpace,
    SupportSet,
    VertexLattice,
    dual,
    embed,
    enumerate_support,
    in_dual,
    int_pairing,
    int_prim2,
    int_total,
    member,
    mu,
    neighbors,
    norm_element,
    support_counts_closed,
)

__all__ = [
    "AmbientSpace",
    "CoefficientTable",
    "Extended",
    "GramMatrix",
    "JordanBlock",
    "LatticeInvariants",
    "RingConfig",
    "SupportSet",
    "VertexLattice",
    "chi",
    "coefficient_table",
    "dual",
    "dual_gram",
    "embed",
    "enumerate_support",
    "family_size",
    "galois",
    "in_dual",
    "int_pairing",
    "int_prim2",
    "int_total",
    "integral_superlattices",
    "invariants",
    "isometry_key",
    "jordan_form",
    "member",
    "mu",
    "neighbors",
    "norm_element",
    "parse_gram",
    "pden",
    "pden_prim",
    "self_density",
    "std_from_key",
    "std_lattice",
    "subspace_alt_sum",
    "superlattices",
    "support_counts_closed",
    "val_pi",
]
