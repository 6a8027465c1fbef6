"""Structured linear algebra on skew-symmetric matrices and rotations.

The scalar kernels (:func:`expm_skew`, :func:`logm_so`) work from the real
Schur form, which for a normal matrix is block diagonal: 2x2 rotation (or
angle) blocks plus 1x1 entries.  The ``*_batch`` variants act on stacks of
small matrices and are what the certificate loop uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import TOL
from .errors import DimensionMismatch, NegativeEigenvalueAmbiguity

__all__ = [
    "FrechetResult",
    "as_skew",
    "as_rotation",
    "expm_skew",
    "logm_so",
    "dexpm",
    "haar_rotation",
    "haar_rotations",
    "expm_skew_batch",
    "logm_so_batch",
]


def _square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def as_skew(S, tol=TOL.skew):
    """Validate ``S`` as skew-symmetric and return ``(S - S^T) / 2``."""
    S = _square(S, "skew matrix")
    if S.size and np.max(np.abs(S + S.T)) > tol:
        raise ValueError("matrix is not skew-symmetric")
    return 0.5 * (S - S.T)


def as_rotation(Q, tol=TOL.orthogonal, special=True):
    """Validate ``Q`` as an orthogonal (by default special orthogonal) matrix."""
    Q = _square(Q, "rotation")
    n = Q.shape[0]
    if np.linalg.norm(Q.T @ Q - np.eye(n)) > tol:
        raise ValueError("matrix is not orthogonal")
    if special and n and np.linalg.det(Q) <= 0:
        raise ValueError("matrix is orthogonal but not special orthogonal")
    return Q


# --------------------------------------------------------------------------
# Scalar kernels


def _schur_blocks(T):
    """Yield ``(i, size)`` for the diagonal blocks of a real Schur form."""
    n = T.shape[0]
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            yield i, 2
            i += 2
        else:
            yield i, 1
            i += 1


def expm_skew(S):
    """Matrix exponential of a skew-symmetric matrix.

    Parameters
    ----------
    S : (d, d) array_like
        Skew-symmetric matrix.

    Returns
    -------
    (d, d) ndarray
        ``exp(S)``, special orthogonal up to roundoff.
    """
    S = as_skew(S)
    d = S.shape[0]
    if d == 0 or not S.any():
        return np.eye(d)
    T, Z = sla.schur(S, output="real")
    R = np.eye(d)
    for i, size in _schur_blocks(T):
        if size == 2:
            theta = 0.5 * (T[i + 1, i] - T[i, i + 1])
            c, s = math.cos(theta), math.sin(theta)
            R[i, i], R[i, i + 1] = c, -s
            R[i + 1, i], R[i + 1, i + 1] = s, c
    return Z @ R @ Z.T


def logm_so(Q, strict=False):
    """Principal skew-symmetric logarithm of a special orthogonal matrix.

    Every rotation angle of the result lies in ``(-pi, pi]``.  Eigenvalues
    equal to -1 come as 1x1 Schur entries in pairs; consecutive entries are
    paired in Schur order and each pair receives the angle ``+pi``.

    Parameters
    ----------
    Q : (d, d) array_like
        Special orthogonal matrix.
    strict : bool
        If true, raise :class:`NegativeEigenvalueAmbiguity` when some
        eigenvalue lies within ``TOL.negative_eigenvalue`` of -1, i.e. when
        the minimal-norm logarithm is not unique.
    """
    Q = as_rotation(Q)
    d = Q.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    T, Z = sla.schur(Q, output="real")
    L = np.zeros((d, d))
    negative = []
    for i, size in _schur_blocks(T):
        if size == 2:
            b = T[i:i + 2, i:i + 2]
            theta = math.atan2(b[1, 0] - b[0, 1], b[0, 0] + b[1, 1])
            if theta == -math.pi:
                theta = math.pi
            if strict and 2.0 * abs(math.cos(0.5 * theta)) < TOL.negative_eigenvalue:
                raise NegativeEigenvalueAmbiguity(f"eigenvalue exp(i*{theta!r}) is at -1")
            L[i + 1, i], L[i, i + 1] = theta, -theta
        elif T[i, i] < 0.0:
            negative.append(i)
    if negative and strict:
        raise NegativeEigenvalueAmbiguity(f"{len(negative)} eigenvalue(s) equal to -1")
    if len(negative) % 2:
        raise ValueError("odd multiplicity of eigenvalue -1; matrix is not in SO(d)")
    for a, b in zip(negative[::2], negative[1::2]):
        L[b, a], L[a, b] = math.pi, -math.pi
    S = Z @ L @ Z.T
    return 0.5 * (S - S.T)


@dataclass(frozen=True)
class FrechetResult:
    value: np.ndarray  # exp(S)
    derivative: np.ndarray  # d/de exp(S + e E) at e = 0


def dexpm(S, E):
    """Directional derivative of the matrix exponential at ``S`` along ``E``.

    Uses the block identity ``exp([[S, E], [0, S]]) = [[exp S, L], [0, exp S]]``
    where ``L`` is the derivative.
    """
    S = as_skew(S)
    E = np.asarray(E, dtype=float)
    d = S.shape[0]
    if E.shape != S.shape:
        raise DimensionMismatch(f"direction has shape {E.shape}, expected {S.shape}")
    M = np.zeros((2 * d, 2 * d))
    M[:d, :d] = S
    M[d:, d:] = S
    M[:d, d:] = E
    return FrechetResult(value=expm_skew(S), derivative=sla.expm(M)[:d, d:])


def haar_rotations(dim, size, rng):
    """``size`` independent Haar-distributed samples from SO(dim), shape (size, dim, dim)."""
    if dim < 0:
        raise ValueError("dim must be nonnegative")
    if dim == 0:
        return np.zeros((size, 0, 0))
    G = rng.standard_normal((size, dim, dim))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    Q = Q * signs[:, None, :]
    flip = np.linalg.det(Q) < 0
    Q[flip, :, 0] *= -1.0
    return Q


def haar_rotation(dim, rng):
    """One Haar-distributed sample from SO(dim).

    Orthonormalizes a Gaussian matrix with a sign-corrected QR factorization,
    then negates the first column if the determinant is -1.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    return haar_rotations(dim, 1, rng)[0]


# --------------------------------------------------------------------------
# Batched kernels for stacks of small matrices

_CAYLEY_LIMIT = 20.0  # |tan(theta/2)| above which the batched log defers to logm_so


def _rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def expm_skew_batch(S):
    """``exp`` of a stack of skew-symmetric matrices, shape (..., d, d)."""
    S = np.asarray(S, dtype=float)
    d = S.shape[-1]
    if d == 0:
        return np.zeros(S.shape)
    if d == 1:
        return np.ones(S.shape)
    if d == 2:
        return _rot2(0.5 * (S[..., 1, 0] - S[..., 0, 1]))
    # i*S is Hermitian: i*S = U diag(w) U^H, so exp(S) = U diag(exp(-i w)) U^H.
    w, U = np.linalg.eigh(1j * S)
    R = (U * np.exp(-1j * w)[..., None, :]) @ np.swapaxes(U.conj(), -1, -2)
    return R.real


def logm_so_batch(Q, strict=False):
    """Principal logarithm of a stack of rotations, shape (..., d, d).

    For d > 2 the Cayley transform ``C = (I - Q)(I + Q)^{-1}`` is skew with
    ``i*C`` Hermitian with eigenvalues ``tan(theta/2)``.  Matrices with an
    angle too close to pi for that to be well conditioned are routed through
    :func:`logm_so`, which also owns the pairing policy at exactly -1.
    """
    Q = np.asarray(Q, dtype=float)
    d = Q.shape[-1]
    batch_shape = Q.shape[:-2]
    if d <= 1:
        return np.zeros(Q.shape)
    if d == 2:
        theta = np.arctan2(Q[..., 1, 0] - Q[..., 0, 1], Q[..., 0, 0] + Q[..., 1, 1])
        theta = np.where(theta == -np.pi, np.pi, theta)
        if strict and np.any(2.0 * np.abs(np.cos(0.5 * theta)) < TOL.negative_eigenvalue):
            raise NegativeEigenvalueAmbiguity("eigenvalue at -1 in a 2x2 rotation")
        out = np.zeros(Q.shape)
        out[..., 1, 0] = theta
        out[..., 0, 1] = -theta
        return out

    flat = Q.reshape((-1, d, d))
    out = np.empty_like(flat)
    eye = np.eye(d)
    slow = np.zeros(len(flat), dtype=bool)
    try:
        C = np.linalg.solve(eye + flat, eye - flat)
    except np.linalg.LinAlgError:
        C = np.empty_like(flat)
        for k, q in enumerate(flat):
            try:
                C[k] = np.linalg.solve(eye + q, eye - q)
            except np.linalg.LinAlgError:
                C[k] = 0.0
                slow[k] = True
    C = 0.5 * (C - np.swapaxes(C, -1, -2))
    w, U = np.linalg.eigh(1j * C)
    slow |= ~np.all(np.abs(w) <= _CAYLEY_LIMIT, axis=-1)
    theta = 2.0 * np.arctan(w)
    L = ((U * (1j * theta)[..., None, :]) @ np.swapaxes(U.conj(), -1, -2)).real
    out[:] = 0.5 * (L - np.swapaxes(L, -1, -2))
    for k in np.flatnonzero(slow):
        out[k] = logm_so(flat[k], strict=strict)
    return out.reshape(batch_shape + (d, d))
