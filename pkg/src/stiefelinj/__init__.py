"""Injectivity-radius bounds and geodesic certificates on the Stiefel manifold."""

__version__ = "0.1.0"

from .certificate import (
    CertificateRecord,
    SweepGrid,
    default_grid,
    iterations_profile,
    run_certificate,
    run_sweep,
    sample_unit_tangent,
)
from .conjugate import (
    BoundReport,
    ConjugateWitness,
    Regime,
    beta_thresholds,
    build_witness,
    inj_upper_bound,
    lemma_blocks,
    loop_length_bound,
    solve_t_root,
    verify_witness,
)
from .errors import (
    DegenerateDraw,
    DimensionMismatch,
    InvalidDims,
    NegativeEigenvalueAmbiguity,
    StiefelInjError,
    ZeroTime,
)
from .skewlin import dexpm, expm_skew, haar_rotation, logm_so
from .stiefel import (
    BetaParam,
    TangentAH,
    curve_length,
    exp_derivative,
    exp_stiefel,
    fiber_element,
    horizontal_lift,
    metric_inner,
    project_to_stiefel,
)

__all__ = [
    "__version__",
    "CertificateRecord",
    "SweepGrid",
    "default_grid",
    "iterations_profile",
    "run_certificate",
    "run_sweep",
    "sample_unit_tangent",
    "BoundReport",
    "ConjugateWitness",
    "Regime",
    "beta_thresholds",
    "build_witness",
    "inj_upper_bound",
    "lemma_blocks",
    "loop_length_bound",
    "solve_t_root",
    "verify_witness",
    "DegenerateDraw",
    "DimensionMismatch",
    "InvalidDims",
    "NegativeEigenvalueAmbiguity",
    "StiefelInjError",
    "ZeroTime",
    "dexpm",
    "expm_skew",
    "haar_rotation",
    "logm_so",
    "BetaParam",
    "TangentAH",
    "curve_length",
    "exp_derivative",
    "exp_stiefel",
    "fiber_element",
    "horizontal_lift",
    "metric_inner",
    "project_to_stiefel",
]
