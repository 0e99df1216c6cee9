"""Entanglement and squeezing of formation for two-mode Gaussian states.

Covariance matrices use vacuum variance 1 and the interleaved
``(x1, p1, x2, p2)`` ordering. EoF is reported in bits, SoF in nats.
"""

from .errors import *  # noqa: F401,F403
from .gaussian import (
    BlockState,
    ClassKind,
    CovarianceMatrix,
    OpKind,
    Ordering,
    PhysicalityReport,
    PureStateParam,
    StateClass,
    SymplecticOp,
    apply_symplectic,
    balanced_state,
    beam_splitter,
    classify,
    direct_sum_vacuum,
    from_blocks,
    identity_op,
    is_block,
    is_physical,
    partial_trace,
    partial_transpose,
    phase_rotation,
    pure_from_zy,
    reorder,
    single_mode_squeezer,
    symmetric_state,
    symplectic_eigenvalues,
    symplectic_form,
    tmsv,
    to_block,
    vacuum,
    validate_physical,
)
from .measures import (
    EllipseParam,
    MeasureResult,
    Method,
    aux_h,
    balanced_kappa_tau,
    eof,
    eof_balanced,
    eof_block,
    eof_numeric,
    eof_symmetric,
    ellipse_parametrize,
    entropy_of_entanglement,
    sof_balanced,
    sof_block,
    sof_dispatch,
    sof_pure,
    sof_symmetric,
    standard_form,
    williamson_pure_part,
)
from .numerics import MinimizeResult, eig_sym, golden_minimize, nelder_minimize, seeded_rng
from .potential import (
    CircuitSpec,
    PotentialReport,
    potential_closed,
    potential_search,
    potential_upper_bound,
    symmetric_saturating_circuit,
)

__version__ = "0.1.0"
