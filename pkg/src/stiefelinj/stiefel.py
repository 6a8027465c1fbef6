"""Geometry of St(n, p) under the beta-family of metrics.

Tangent vectors at ``X = Q I_{n x p}`` are written ``xi = Q [A; H]`` with
``A`` skew (p x p) and ``H`` of size (n-p) x p.  The total space is
SO(n) x SO(p) with projection ``(Q, V) -> Q I_{n x p} V^T``, except at
beta = 1/2 (canonical metric) where it is SO(n) with ``Q -> Q I_{n x p}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import TOL
from .errors import DimensionMismatch
from .skewlin import as_rotation, as_skew, dexpm, expm_skew, haar_rotation

__all__ = [
    "BetaParam",
    "TangentAH",
    "HorizontalLift",
    "TotalSpaceElement",
    "check_stiefel",
    "metric_inner",
    "normalize",
    "horizontal_lift",
    "total_space_inner",
    "exp_stiefel",
    "exp_derivative",
    "project_to_stiefel",
    "fiber_element",
    "curve_length",
]


@dataclass(frozen=True)
class BetaParam:
    """Metric parameter ``beta > 0``; ``alpha = 1/(2 beta) - 1``."""

    beta: float

    def __post_init__(self):
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta > 0):
            raise ValueError(f"beta must be a positive finite number, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)

    @property
    def alpha(self):
        return 1.0 / (2.0 * self.beta) - 1.0

    @property
    def canonical(self):
        return self.beta == 0.5

    @property
    def euclidean(self):
        return self.beta == 1.0


def check_stiefel(X, tol=TOL.stiefel):
    """Return ``X`` as an array after checking ``X^T X = I`` to ``tol``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] > X.shape[0]:
        raise DimensionMismatch(f"not an n x p frame with p <= n: shape {X.shape}")
    if np.linalg.norm(X.T @ X - np.eye(X.shape[1])) > tol:
        raise ValueError("columns are not orthonormal")
    return X


@dataclass(frozen=True)
class TangentAH:
    """Tangent vector ``frame @ [A; H]`` at the point ``frame[:, :p]``.

    ``frame=None`` stands for the identity, i.e. the base point ``I_{n x p}``.
    """

    A: np.ndarray
    H: np.ndarray
    frame: np.ndarray | None = None

    def __post_init__(self):
        A = as_skew(self.A)
        p = A.shape[0]
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2 or H.shape[1] != p:
            raise DimensionMismatch(f"H must have {p} columns, got shape {H.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "H", H)
        if self.frame is not None:
            Q = as_rotation(self.frame)
            if Q.shape[0] != self.n:
                raise DimensionMismatch(f"frame is {Q.shape[0]}x{Q.shape[0]}, expected n={self.n}")
            object.__setattr__(self, "frame", Q)

    @property
    def p(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.p + self.H.shape[0]

    @property
    def base_point(self):
        if self.frame is None:
            return np.eye(self.n, self.p)
        return self.frame[:, : self.p].copy()

    def ambient(self):
        """The n x p matrix representing this vector in R^{n x p}."""
        xi = np.vstack([self.A, self.H])
        return xi if self.frame is None else self.frame @ xi

    def scaled(self, c):
        return TangentAH(c * self.A, c * self.H, self.frame)

    @classmethod
    def from_ambient(cls, xi, frame=None, tol=TOL.tangent):
        """Coordinates of an ambient tangent vector ``xi`` at ``frame[:, :p]``."""
        xi = np.asarray(xi, dtype=float)
        coords = xi if frame is None else np.asarray(frame, dtype=float).T @ xi
        p = xi.shape[1]
        A = coords[:p]
        if np.max(np.abs(A + A.T), initial=0.0) > tol:
            raise ValueError("xi is not tangent: X^T xi + xi^T X != 0")
        return cls(0.5 * (A - A.T), coords[p:], frame)


def _same_point(u, v):
    if u.A.shape != v.A.shape or u.H.shape != v.H.shape:
        raise DimensionMismatch("tangent vectors have different (n, p)")
    if (u.frame is None) != (v.frame is None) or (
        u.frame is not None and not np.array_equal(u.frame, v.frame)
    ):
        raise DimensionMismatch("tangent vectors live at different frames")


def metric_inner(mp, u, v):
    """``beta tr(A_u^T A_v) + tr(H_u^T H_v)``."""
    _same_point(u, v)
    return mp.beta * float(np.sum(u.A * v.A)) + float(np.sum(u.H * v.H))


def normalize(mp, u):
    """Rescale ``u`` to unit length in the beta-metric."""
    norm2 = metric_inner(mp, u, u)
    if not norm2 > 0:
        raise ValueError("cannot normalize the zero tangent vector")
    return u.scaled(1.0 / math.sqrt(norm2))


@dataclass(frozen=True)
class HorizontalLift:
    Omega: np.ndarray
    Psi: np.ndarray | None = None  # None in the canonical case


def _omega(top_left, H):
    p = top_left.shape[0]
    n = p + H.shape[0]
    Om = np.zeros((n, n))
    Om[:p, :p] = top_left
    Om[p:, :p] = H
    Om[:p, p:] = -H.T
    return Om


def horizontal_lift(mp, u):
    """Horizontal lift of ``u`` at the total-space point ``(frame, I_p)``.

    Returned in Lie-algebra coordinates: ``Omega = [[2 beta A, -H^T], [H, 0]]``
    and ``Psi = -(1 - 2 beta) A``; canonical: ``[[A, -H^T], [H, 0]]`` only.
    """
    if mp.canonical:
        return HorizontalLift(_omega(u.A, u.H), None)
    return HorizontalLift(_omega(2.0 * mp.beta * u.A, u.H), -(1.0 - 2.0 * mp.beta) * u.A)


def total_space_inner(mp, a, b):
    """Inner product of two lifts in the bi-invariant total-space (pseudo-)metric."""
    val = 0.5 * float(np.sum(a.Omega * b.Omega))
    if not mp.canonical:
        val += float(np.sum(a.Psi * b.Psi)) / (2.0 * mp.alpha)
    return val


def exp_stiefel(mp, u, t=1.0):
    """Riemannian exponential ``Exp_X(t u)``.

    ``Q expm(t [[2 beta A, -H^T], [H, 0]]) I_{n x p} expm(t (1 - 2 beta) A)``.
    """
    p = u.p
    lift = horizontal_lift(mp, u)
    X = expm_skew(t * lift.Omega)[:, :p]
    if not mp.canonical:
        X = X @ expm_skew(-t * lift.Psi)
    if u.frame is not None:
        X = u.frame @ X
    return X


def exp_derivative(mp, u, u_dot, t, canonical=None):
    """Derivative of ``Exp_X`` at ``t u`` along ``u_dot``.

    Evaluates ``d/de Q expm(t Om + e Om') I_{n x p} expm(-t Psi - e Psi')`` at
    ``e = 0`` by the product rule.  ``canonical=False`` forces the two-factor
    formula at beta = 1/2 (where the right factor is constant).
    """
    _same_point(u, u_dot)
    p = u.p
    if canonical is None:
        canonical = mp.canonical
    if canonical:
        if not mp.canonical:
            raise ValueError("canonical formula requested for beta != 1/2")
        Om, Om_dot = _omega(u.A, u.H), _omega(u_dot.A, u_dot.H)
        D = dexpm(t * Om, Om_dot).derivative[:, :p]
    else:
        b = mp.beta
        Om, Om_dot = _omega(2 * b * u.A, u.H), _omega(2 * b * u_dot.A, u_dot.H)
        Psi, Psi_dot = -(1 - 2 * b) * u.A, -(1 - 2 * b) * u_dot.A
        left = dexpm(t * Om, Om_dot)
        right = dexpm(-t * Psi, -Psi_dot)
        D = left.derivative[:, :p] @ right.value + left.value[:, :p] @ right.derivative
    return D if u.frame is None else u.frame @ D


@dataclass(frozen=True)
class TotalSpaceElement:
    """``(Q, V)`` in SO(n) x SO(p); ``V`` is None in the canonical total space SO(n)."""

    Q: np.ndarray
    V: np.ndarray | None = None
    p: int | None = None

    def __post_init__(self):
        if self.V is not None:
            if self.p is not None and self.p != np.shape(self.V)[0]:
                raise DimensionMismatch("p disagrees with the size of V")
            object.__setattr__(self, "p", np.shape(self.V)[0])
        elif self.p is None:
            raise ValueError("p is required when V is absent")


def project_to_stiefel(mp, g):
    """``Q I_{n x p} V^T`` (canonical: ``Q I_{n x p}``)."""
    X = np.asarray(g.Q)[:, : g.p]
    if g.V is not None and not mp.canonical:
        X = X @ np.asarray(g.V).T
    return X


def fiber_element(mp, u, rho, rng=None, *, stabilizer=None):
    """A point of the fiber above ``exp_stiefel(mp, u, rho)``.

    Returns ``(Q expm(rho Om) blkdiag(R1, R2), expm(rho Psi) R1)`` where
    ``Q`` is the frame of ``u``, ``(Om, Psi)`` its horizontal lift and
    ``(R1, R2)`` a stabilizer element: Haar draws from SO(p) x SO(n-p) unless
    given explicitly.  In the canonical case ``R1`` is the identity.
    """
    n, p = u.n, u.p
    if stabilizer is None:
        if rng is None:
            raise ValueError("either rng or stabilizer is required")
        R1 = np.eye(p) if mp.canonical else haar_rotation(p, rng)
        R2 = haar_rotation(n - p, rng) if n > p else np.zeros((0, 0))
    else:
        R1, R2 = stabilizer
        R1 = np.eye(p) if R1 is None else np.asarray(R1, dtype=float)
        R2 = np.asarray(R2, dtype=float)
    lift = horizontal_lift(mp, u)
    Q = expm_skew(rho * lift.Omega) @ sla.block_diag(R1, R2)
    if u.frame is not None:
        Q = u.frame @ Q
    if mp.canonical:
        return TotalSpaceElement(Q, None, p)
    return TotalSpaceElement(Q, expm_skew(rho * lift.Psi) @ R1, p)


def curve_length(mp, omega, psi=None, *, p=None):
    """Length of ``t -> project(Exp_E(t (omega, psi)))`` for ``t`` in [0, 1].

    ``sqrt(beta ||Om11 - Psi||^2 + ||Om21||^2)``; canonical:
    ``sqrt(||Om11||^2 / 2 + ||Om21||^2)``.  ``p`` defaults to the size of ``psi``.
    """
    omega = np.asarray(omega, dtype=float)
    if p is None:
        if psi is None:
            raise ValueError("p is required when psi is absent")
        p = np.shape(psi)[0]
    n = omega.shape[0]
    if omega.shape != (n, n) or not 1 <= p <= n:
        raise DimensionMismatch(f"omega of shape {omega.shape} incompatible with p={p}")
    om11, om21 = omega[:p, :p], omega[p:, :p]
    if mp.canonical:
        return math.sqrt(0.5 * float(np.sum(om11**2)) + float(np.sum(om21**2)))
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (p, p):
        raise DimensionMismatch(f"psi must be {p}x{p}, got {psi.shape}")
    return math.sqrt(mp.beta * float(np.sum((om11 - psi) ** 2)) + float(np.sum(om21**2)))
