"""Conjugate times, geodesic-loop lengths and injectivity-radius upper bounds.

The conjugate time ``t_root(beta)`` is the smallest positive zero of
``sin t / t + (1 - beta)/beta * cos t``; the geodesic used to exhibit the
conjugate point has speed sqrt(2), so its length is ``t_root * sqrt(2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDims, ZeroTime
from .stiefel import BetaParam, TangentAH, exp_derivative

__all__ = [
    "Regime",
    "BoundReport",
    "ConjugateWitness",
    "f_sign",
    "solve_t_root",
    "beta_thresholds",
    "loop_length_bound",
    "inj_upper_bound",
    "lemma_blocks",
    "build_witness",
    "verify_witness",
    "D_GENERATOR",
]

SQRT2 = math.sqrt(2.0)
D_GENERATOR = np.array([[0.0, -1.0], [1.0, 0.0]])

_SCAN_STEP = 1e-3
_SCAN_END = 1.5 * math.pi
_BISECTIONS = 80


def f_sign(beta, t):
    """``F(beta, t) = sin t + (1 - beta)/beta * t cos t`` (same sign as the root equation for t > 0)."""
    return np.sin(t) + (1.0 - beta) / beta * t * np.cos(t)


def _first_sign_change(f, grid):
    vals = f(grid)
    idx = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if not idx.size:
        raise ArithmeticError("no sign change found on the scan grid")
    k = idx[0]
    if vals[k + 1] == 0.0:
        return grid[k + 1], grid[k + 1]
    return grid[k], grid[k + 1]


def _bisect(f, a, b, steps=_BISECTIONS):
    fa = f(a)
    for _ in range(steps):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


@lru_cache(maxsize=4096)
def solve_t_root(beta):
    """Smallest ``t > 0`` with ``sin t / t + (1 - beta)/beta * cos t = 0``.

    Root in (pi/2, pi) for beta < 1, exactly pi for beta = 1 and in
    (pi, 3 pi/2) for beta > 1.
    """
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")
    if beta == 1.0:
        return math.pi
    c = (1.0 - beta) / beta

    def f(t):
        return math.sin(t) + c * t * math.cos(t)

    grid = np.arange(1, int(_SCAN_END / _SCAN_STEP) + 1) * _SCAN_STEP
    grid = np.append(grid, _SCAN_END)
    a, b = _first_sign_change(lambda t: np.sin(t) + c * t * np.cos(t), grid)
    return a if a == b else _bisect(f, float(a), float(b))


@lru_cache(maxsize=1)
def beta_thresholds():
    """Regime thresholds ``(beta1, beta2)`` of the injectivity-radius bound.

    ``beta1`` is where ``sqrt(2 beta) pi = t_root(beta) sqrt(2)``; ``beta2``
    is where ``t_root(beta) sqrt(2) = pi`` and has a closed form.
    """

    def g(beta):
        s = np.sqrt(beta) * math.pi
        return np.sin(s) / s + (1.0 - beta) / beta * np.cos(s)

    grid = np.arange(1, 1001) * _SCAN_STEP
    a, b = _first_sign_change(g, grid)
    beta1 = a if a == b else _bisect(lambda x: float(g(x)), float(a), float(b))
    beta2 = 1.0 / (1.0 - SQRT2 / math.pi * math.tan(math.pi / SQRT2))
    return float(beta1), beta2


def _check_dims(n, p, lo=1, hi_offset=0):
    if not (isinstance(n, (int, np.integer)) and isinstance(p, (int, np.integer))):
        raise InvalidDims("n and p must be integers")
    if n < 2 or not lo <= p <= n - hi_offset:
        raise InvalidDims(f"(n, p) = ({n}, {p}) outside {lo} <= p <= n - {hi_offset}, n >= 2")


def loop_length_bound(beta, n, p):
    """Upper bound on the length of the shortest nontrivial geodesic loop.

    Exact for p = 1 (2 pi), p = n (sqrt(2 beta) 2 pi) and beta = 1/2 (2 pi);
    otherwise ``min(sqrt(2 beta), 1) 2 pi``.
    """
    _check_dims(n, p)
    beta = float(beta)
    if p == 1:
        return 2.0 * math.pi
    if p == n:
        return math.sqrt(2.0 * beta) * 2.0 * math.pi
    if beta == 0.5:
        return 2.0 * math.pi
    return min(math.sqrt(2.0 * beta), 1.0) * 2.0 * math.pi


class Regime(str, enum.Enum):
    LOOP = "LoopLimited"
    CONJUGATE = "ConjugateLimited"
    PI = "PiLimited"


@dataclass(frozen=True)
class BoundReport:
    beta: float
    n: int
    p: int
    t_root: float
    loop_bound: float  # half the loop-length bound
    conj_bound: float  # min(t_root, pi) sqrt(2); inf where no conjugate point is exhibited
    inj_upper: float
    regime: Regime
    exact: bool  # the bound is known to be the injectivity radius

    def as_dict(self):
        return {
            "beta": self.beta,
            "n": self.n,
            "p": self.p,
            "t_root": self.t_root,
            "conj_bound": self.conj_bound,
            "loop_bound": self.loop_bound,
            "inj_upper": self.inj_upper,
            "regime": self.regime.value,
            "exact": self.exact,
        }


def inj_upper_bound(beta, n, p):
    """Upper bound on the injectivity radius of St(n, p) under the beta-metric."""
    _check_dims(n, p)
    beta = float(BetaParam(beta).beta)
    t_root = solve_t_root(beta)
    loop = 0.5 * loop_length_bound(beta, n, p)
    inf = math.inf
    if p == 1:
        return BoundReport(beta, n, p, t_root, loop, inf, math.pi, Regime.PI, True)
    if p == n:
        return BoundReport(beta, n, p, t_root, loop, inf, loop, Regime.LOOP, True)
    if p == n - 1:
        regime = Regime.PI if beta >= 0.5 else Regime.LOOP
        return BoundReport(beta, n, p, t_root, loop, inf, loop, regime, beta == 0.5)
    conj = min(t_root, math.pi) * SQRT2
    beta1, beta2 = beta_thresholds()
    if beta <= beta1:
        regime = Regime.LOOP
    elif beta <= beta2:
        regime = Regime.CONJUGATE
    else:
        regime = Regime.PI
    return BoundReport(beta, n, p, t_root, loop, conj, min(loop, conj), regime, False)


def lemma_blocks(kind, t, w, alpha, D):
    """Closed forms of the first ``m`` columns of the exponential derivatives.

    ``kind`` selects the configuration (``Om = [[0, -I], [I, 0]]`` throughout):

    * ``"L41"``: ``Om' = [[-w D, D], [D, 0]]``, no right factor;
    * ``"L42"``: as L41 plus a right factor with ``Psi = 0``, ``Psi' = alpha w D``;
    * ``"L43"``: ``Om' = [[D, 0], [0, 0]]``, ``Psi' = D / 2`` (alpha = -1/2).

    Returns ``(top, bottom)``, the two m x m blocks.
    """
    if t == 0:
        raise ZeroTime("the closed forms are singular at t = 0")
    D = np.asarray(D, dtype=float)
    s, c = math.sin(t), math.cos(t)
    if kind == "L41":
        return -0.5 * w * (s / t + c) * D, 0.5 * (-w + 2.0 / t) * s * D
    if kind == "L42":
        top = -0.5 * w * (s / t + c + 2.0 * alpha * c) * D
        return top, 0.5 * (-w + 2.0 / t - 2.0 * alpha * w) * s * D
    if kind == "L43":
        return s / (2.0 * t) * D, np.zeros_like(D)
    raise ValueError(f"unknown lemma kind {kind!r}")


@dataclass
class ConjugateWitness:
    """A geodesic direction and a Jacobi seed with ``DExp(t_conj xi; xibreve) = 0``."""

    mp: BetaParam
    n: int
    p: int
    xi: TangentAH
    xibreve: TangentAH
    t_conj: float
    w: float
    branch: str  # "root" or "pi"
    residual: float | None = None

    @property
    def length(self):
        """Length of the geodesic from 0 to ``t_conj`` (``xi`` has norm sqrt(2))."""
        return self.t_conj * SQRT2


def _corner(n_rows, n_cols, block):
    M = np.zeros((n_rows, n_cols))
    M[:2, :2] = block
    return M


def build_witness(mp, n, p, use_pi_branch=False):
    """Conjugate-point witness along ``xi = [0; [[I_2, 0], [0, 0]]]``.

    Noncanonical beta != 1 and canonical: ``A' = -(w / 2 beta) D`` and
    ``H' = D`` in the top-left corners with ``w = 2 / ((1 + 2 alpha) t)``.
    Euclidean (beta = 1): ``A' = D / 2``, ``H' = 0``.  With
    ``use_pi_branch`` the time is pi and ``w = 0``.
    """
    _check_dims(n, p, lo=2, hi_offset=2)
    D = D_GENERATOR
    xi = TangentAH(np.zeros((p, p)), _corner(n - p, p, np.eye(2)))
    if use_pi_branch:
        t, w, branch = math.pi, 0.0, "pi"
    else:
        t, branch = solve_t_root(mp.beta), "root"
        w = 0.0 if mp.euclidean else 2.0 / ((1.0 + 2.0 * mp.alpha) * t)
    if mp.euclidean and not use_pi_branch:
        xibreve = TangentAH(_corner(p, p, 0.5 * D), np.zeros((n - p, p)))
    else:
        xibreve = TangentAH(_corner(p, p, -w / (2.0 * mp.beta) * D), _corner(n - p, p, D))
    return ConjugateWitness(mp, n, p, xi, xibreve, t, w, branch)


def verify_witness(wit, canonical=None):
    """Frobenius norm of ``DExp(t_conj xi; xibreve)``; also stored on ``wit``.

    ``canonical=False`` at beta = 1/2 evaluates through the two-factor
    noncanonical formula instead of the SO(n) one.
    """
    D = exp_derivative(wit.mp, wit.xi, wit.xibreve, wit.t_conj, canonical=canonical)
    wit.residual = float(np.linalg.norm(D))
    return wit.residual
