"""Numerical tolerances shared by the kernels, the verifiers and the test-suite."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    skew: float = 1e-13  # |S + S^T| allowed before symmetrizing
    orthogonal: float = 1e-12  # ||Q^T Q - I||_F
    stiefel: float = 1e-10  # ||X^T X - I||_F
    tangent: float = 1e-10
    exp_oracle: float = 1e-12
    log_roundtrip: float = 1e-10
    dexp_quadrature: float = 1e-10
    dexp_linearity: float = 1e-11
    dexp_fd: float = 1e-8
    negative_eigenvalue: float = 1e-9  # distance to -1 that counts as ambiguous
    root: float = 1e-12
    witness: float = 1e-9
    witness_cli: float = 1e-8
    certificate_slack: float = 1e-12
    degenerate_norm: float = 1e-300


TOL = Tolerances()
