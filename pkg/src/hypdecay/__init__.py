"""Spectral reductions, asymptotic wave profiles and decay-rate
verification for 1-D partially dissipative hyperbolic systems
u_t + A u_x + B u = 0."""

from .errors import (
    BranchExtractionFailure,
    ClusterAmbiguous,
    ConditionViolation,
    DegenerateFit,
    DomainTooSmall,
    FitFailure,
    HypdecayError,
    MissingPj1,
    NonSquare,
    NumericalFailure,
    ParseError,
    PostconditionFailure,
    ReductionMissing,
    ShapeError,
    ZeroDenominator,
)
from .linalg import EigenDecomp, PolyMatrix, as_matrix, eig, expm, numerical_rank, poly_adjugate
from .profiles import (
    Ghat,
    GridSolution,
    GridSpec,
    InitialData,
    Khat,
    Khat_star,
    ProfileSolver,
    Vhat,
    solve,
)
from .projections import ProjectorPair, proj_oracle, proj_semisimple_zero
from .rates import (
    RateEntry,
    RateReport,
    fit_rate,
    kernel_norm_scan,
    lp_norm,
    theorem_slope,
    verify_theorem,
)
from .reduction import (
    ChapmanEnskogData,
    DiffusionBranch,
    EigencurveSample,
    FastDecayGroup,
    HighFreqData,
    expansion_order_check,
    fast_groups,
    reduce_high,
    reduce_low,
    sample_eigencurves,
)
from .structure import (
    ConditionReport,
    SystemDef,
    check_all,
    check_condition_A,
    check_condition_B,
    check_condition_C,
    check_condition_Cprime,
    check_condition_D,
    check_condition_S,
    symbol,
)

__version__ = "0.1.0"
