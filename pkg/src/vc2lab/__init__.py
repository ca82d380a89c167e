"""VC- and VC2-dimension computations for Green-Sanders sets over F_p^n."""

from .fp import (
    AffineSolution,
    FieldCtx,
    FpMatrix,
    FpVector,
    basis_vector,
    mat_rank,
    orth_complement,
    scalar_inverse,
    solve_affine,
    vector,
    zero_vector,
)
from .highrank import HighRankBasis, IrreduciblePoly, build_irreducible, build_trace_basis, check_high_rank
from .gs import ExplicitSet, GsSet, QgsSet, cross_term, eval_q, fnz, gs_contains, qgs_contains
from .shatter import (
    ContainmentMap,
    NotShattered,
    QuadShatterCertificate,
    ShatterCertificate,
    Vc2Failure,
    VcDimResult,
    pattern_signature,
    shatters,
    vc2_realizes,
    vc2_shatters,
    vc_dim,
    vc_dim_naive,
)
from .factor import (
    AtomLabel,
    CheckResult,
    QuadraticFactor,
    ShatterPairConstruction,
    TargetValues,
    atom_census,
    atom_label,
    check_cross_term_range,
    check_forced_zeros,
    construct_shatter_pair,
    construction_doc,
    construction_from_doc,
    find_in_atom,
    forced_zero_probe,
    planted_qualifying_sets,
    predicted_grid,
    realize_map,
    target_values_for_map,
    zero_forcing_map,
)
from .ramsey import (
    BicliqueWitness,
    BipartiteColouring,
    BrBound,
    br_upper_bound,
    density_biclique_guarantee,
    find_mono_biclique,
    random_colouring,
)

__all__ = [name for name in dir() if not name.startswith("_")]
