"""Local representation densities: counting oracle, polynomials, closed forms."""

from hermdens.density.closed import (
    ONE_MINUS_X,
    X,
    alpha_even_base_pair,
    alpha_odd_base_pair,
    alpha_rank2_base_pair,
    alpha_two_scale_unary,
    alpha_unary_plane,
    beta0_rank1,
    beta0_rank2,
    beta1_rank2,
    beta2_rank2,
    beta_h_value,
    cancellation_threshold,
    closed_alpha,
    isotropic_count,
    isotropic_count_brute,
    ortho_order,
    pden_prim_plane,
    pden_prim_triple,
    rank1_alpha,
    rep_count_brute,
    residue_counts,
    residue_eps,
    residue_gram,
    unimodular_det_unit,
    unimodular_with_det,
    vertical_count,
    witt_index,
)
from hermdens.density.counting import (
    CountBudgetExceeded,
    RepCount,
    count_reps,
    count_reps_primitive,
    stable_level,
)
from hermdens.density.engine import (
    alpha,
    alpha_at,
    beta_prim1,
    beta_prim2,
    canonical_from_key,
    clear_cache,
)
from hermdens.density.poly import (
    DensityPoly,
    alpha_poly,
    alpha_prime,
    beta_prim_poly,
    from_roots,
    newton_fit,
)

__all__ = [
    "CountBudgetExceeded",
    "DensityPoly",
    "ONE_MINUS_X",
    "RepCount",
    "X",
    "alpha",
    "alpha_at",
    "alpha_even_base_pair",
    "alpha_odd_base_pair",
    "alpha_poly",
    "alpha_prime",
    "alpha_rank2_base_pair",
    "alpha_two_scale_unary",
    "alpha_unary_plane",
    "beta0_rank1",
    "beta0_rank2",
    "beta1_rank2",
    "beta2_rank2",
    "beta_h_value",
    "beta_prim1",
    "beta_prim2",
    "beta_prim_poly",
    "cancellation_threshold",
    "canonical_from_key",
    "clear_cache",
    "closed_alpha",
    "count_reps",
    "count_reps_primitive",
    "from_roots",
    "isotropic_count",
    "isotropic_count_brute",
    "newton_fit",
    "ortho_order",
    "pden_prim_plane",
    "pden_prim_triple",
    "rank1_alpha",
    "rep_count_brute",
    "residue_counts",
    "residue_eps",
    "residue_gram",
    "stable_level",
    "unimodular_det_unit",
    "unimodular_with_det",
    "vertical_count",
    "witt_index",
]
