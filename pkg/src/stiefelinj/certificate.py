"""Randomized certificate that a radius ``rho`` exceeds the injectivity radius.

Each trial draws a unit tangent vector ``xi`` at ``I_{n x p}``, a random point
``G`` of the fiber above ``Exp(rho xi)``, takes the componentwise principal
logarithm ``Xi`` of ``G`` and measures the projected curve ``t -> Exp_E(t Xi)``.
A length below ``rho`` is a shorter path to the geodesic endpoint.

Trials are evaluated in chunks of :data:`CHUNK` with batched kernels.  The
random stream of chunk ``c`` is keyed by ``(seed, c)`` so a run is fully
determined by its seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .conjugate import inj_upper_bound
from .errors import DegenerateDraw, InvalidDims
from .skewlin import expm_skew_batch, haar_rotations, logm_so_batch
from .stiefel import BetaParam, TangentAH

__all__ = [
    "CHUNK",
    "CertificateWitness",
    "CertificateRecord",
    "SweepGrid",
    "cell_seed",
    "sample_unit_tangent",
    "run_certificate",
    "run_sweep",
    "iterations_profile",
    "profile_records",
    "default_grid",
]

CHUNK = 512
DEFAULT_MAX_ITERATIONS = 100_000
_MAX_REDRAWS = 100


def _chunk_rng(seed, chunk):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chunk),)))


def cell_seed(master_seed, *index):
    """64-bit seed of the sweep cell at ``index``, derived from ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in index))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw_tangents(mp, n, p, size, rng):
    """Unit tangent vectors as coordinate stacks ``A`` (size, p, p), ``H`` (size, n-p, p)."""
    iu = np.triu_indices(p, 1)
    A = np.zeros((size, p, p))
    A[:, iu[0], iu[1]] = rng.standard_normal((size, len(iu[0])))
    A -= np.swapaxes(A, -1, -2)
    H = rng.standard_normal((size, n - p, p))
    norm = np.sqrt(mp.beta * np.sum(A**2, axis=(1, 2)) + np.sum(H**2, axis=(1, 2)))
    for _ in range(_MAX_REDRAWS):
        bad = np.flatnonzero(~(norm >= TOL.degenerate_norm))
        if not bad.size:
            break
        a2, h2, _ = _draw_tangents(mp, n, p, bad.size, rng)
        A[bad], H[bad], norm[bad] = a2, h2, 1.0
    else:
        raise DegenerateDraw(f"{_MAX_REDRAWS} consecutive degenerate tangent draws")
    return A / norm[:, None, None], H / norm[:, None, None], None


def sample_unit_tangent(mp, n, p, rng):
    """Tangent vector at ``I_{n x p}`` of unit beta-norm.

    The strict upper triangle of ``A`` and all of ``H`` are i.i.d. standard
    normal before normalization, so the law is continuous with full support
    on the unit tangent sphere.
    """
    if not 1 <= p <= n:
        raise InvalidDims(f"(n, p) = ({n}, {p})")
    A, H, _ = _draw_tangents(mp, n, p, 1, rng)
    return TangentAH(A[0], H[0])


@dataclass(frozen=True)
class CertificateWitness:
    """Draws of the successful trial; enough to recompute everything."""

    trial: int  # 0-based index of the successful trial
    tangent: TangentAH  # unit direction xi
    R1: np.ndarray  # SO(p) stabilizer component (identity in the canonical case)
    R2: np.ndarray  # SO(n-p) stabilizer component
    Omega: np.ndarray  # principal logarithm components of G
    Psi: np.ndarray | None
    U: np.ndarray  # geodesic endpoint Exp(rho xi)


@dataclass(frozen=True)
class CertificateRecord:
    n: int
    p: int
    beta: float
    rho: float
    found: bool
    iterations: int
    witness_length: float | None
    seed: int
    max_iterations: int
    # beta > 1/2: the total space is pseudo-Riemannian and a run that never
    # returns is not evidence that rho <= inj.
    pseudo_riemannian: bool
    witness: CertificateWitness | None = field(default=None, compare=False, repr=False)

    def as_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "beta": self.beta,
            "rho": self.rho,
            "found": self.found,
            "iterations": self.iterations,
            "witness_length": self.witness_length,
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "pseudo_riemannian": self.pseudo_riemannian,
        }


def _omega_batch(top_left, H):
    size, p, _ = top_left.shape
    n = p + H.shape[1]
    Om = np.zeros((size, n, n))
    Om[:, :p, :p] = top_left
    Om[:, p:, :p] = H
    Om[:, :p, p:] = -np.swapaxes(H, -1, -2)
    return Om


def _block_diag_batch(R1, R2):
    size, p, _ = R1.shape
    m = R2.shape[1]
    out = np.zeros((size, p + m, p + m))
    out[:, :p, :p] = R1
    out[:, p:, p:] = R2
    return out


def _evaluate_chunk(mp, n, p, rho, size, rng, strict_log):
    """Draw and evaluate ``size`` trials; returns lengths and the draws."""
    A, H, _ = _draw_tangents(mp, n, p, size, rng)
    if mp.canonical:
        R1 = np.broadcast_to(np.eye(p), (size, p, p))
    else:
        R1 = haar_rotations(p, size, rng)
    R2 = haar_rotations(n - p, size, rng)
    b = mp.beta
    if mp.canonical:
        Om = _omega_batch(A, H)
        Q = expm_skew_batch(rho * Om) @ _block_diag_batch(R1, R2)
        Xi = logm_so_batch(Q, strict=strict_log)
        Ps = None
        x11, x21 = Xi[:, :p, :p], Xi[:, p:, :p]
        L2 = 0.5 * np.sum(x11**2, axis=(1, 2)) + np.sum(x21**2, axis=(1, 2))
    else:
        Om = _omega_batch(2.0 * b * A, H)
        Psi = -(1.0 - 2.0 * b) * A
        Q = expm_skew_batch(rho * Om) @ _block_diag_batch(R1, R2)
        V = expm_skew_batch(rho * Psi) @ R1
        Xi = logm_so_batch(Q, strict=strict_log)
        Ps = logm_so_batch(V, strict=strict_log)
        x11, x21 = Xi[:, :p, :p], Xi[:, p:, :p]
        L2 = b * np.sum((x11 - Ps) ** 2, axis=(1, 2)) + np.sum(x21**2, axis=(1, 2))
    return np.sqrt(L2), (A, H, R1, R2, Xi, Ps)


def run_certificate(mp, n, p, rho, max_iterations=DEFAULT_MAX_ITERATIONS, seed=0, *,
                    strict_log=False):
    """Run the randomized certificate until a shortcut is found or the cap is hit.

    Parameters
    ----------
    mp : BetaParam
    n, p : int
        Dimensions, ``1 <= p <= n - 1``.
    rho : float
        Radius to certify; a trial succeeds when ``L < rho - TOL.certificate_slack``.
    max_iterations : int
        Number of trials before giving up.
    seed : int
        Nonnegative seed of the trial stream.
    strict_log : bool
        Raise :class:`~stiefelinj.errors.NegativeEigenvalueAmbiguity` instead of
        applying the pairing policy when a logarithm is not unique.

    Returns
    -------
    CertificateRecord
        ``iterations`` counts trials including the successful one.
    """
    if not isinstance(mp, BetaParam):
        mp = BetaParam(mp)
    if not (isinstance(n, (int, np.integer)) and isinstance(p, (int, np.integer))) or not 1 <= p < n:
        raise InvalidDims(f"(n, p) = ({n}, {p}); need n > p >= 1")
    rho = float(rho)
    if not rho > 0:
        raise ValueError("rho must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    threshold = rho - TOL.certificate_slack
    done = 0
    chunk = 0
    while done < max_iterations:
        size = min(CHUNK, max_iterations - done)
        lengths, draws = _evaluate_chunk(mp, n, p, rho, size, _chunk_rng(seed, chunk), strict_log)
        hits = np.flatnonzero(lengths < threshold)
        if hits.size:
            k = int(hits[0])
            wit = _make_witness(mp, rho, done + k, k, draws)
            return CertificateRecord(n, p, mp.beta, rho, True, done + k + 1, float(lengths[k]),
                                     int(seed), int(max_iterations), mp.beta > 0.5, wit)
        done += size
        chunk += 1
    return CertificateRecord(n, p, mp.beta, rho, False, int(max_iterations), None, int(seed),
                             int(max_iterations), mp.beta > 0.5)


def _make_witness(mp, rho, trial, k, draws):
    from .stiefel import exp_stiefel

    A, H, R1, R2, Xi, Ps = draws
    u = TangentAH(A[k], H[k])
    return CertificateWitness(
        trial=trial,
        tangent=u,
        R1=np.array(R1[k]),
        R2=np.array(R2[k]),
        Omega=Xi[k].copy(),
        Psi=None if Ps is None else Ps[k].copy(),
        U=exp_stiefel(mp, u, rho),
    )


@dataclass(frozen=True)
class SweepGrid:
    betas: tuple
    rho_offsets: tuple
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    n: int = 4
    p: int = 2
    master_seed: int = 0

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        offsets = tuple(float(o) for o in self.rho_offsets)
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be strictly increasing")
        if any(b <= 0 for b in betas):
            raise ValueError("betas must be positive")
        if not all(math.isfinite(o) for o in offsets):
            raise ValueError("offsets must be finite")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "rho_offsets", offsets)

    def cells(self):
        """``(beta_index, offset_index, beta, rho)`` in output order."""
        for i, beta in enumerate(self.betas):
            bound = inj_upper_bound(beta, self.n, self.p).inj_upper
            for j, off in enumerate(self.rho_offsets):
                yield i, j, beta, bound + off


def default_grid(max_iterations=DEFAULT_MAX_ITERATIONS, n=4, p=2, master_seed=0):
    """beta = 0.10, 0.15, ..., 1.50 and offsets {0, 0.05}."""
    betas = tuple(round(0.1 + 0.05 * k, 10) for k in range(29))
    return SweepGrid(betas, (0.0, 0.05), max_iterations, n, p, master_seed)


def _run_cell(args):
    beta, n, p, rho, cap, seed, strict_log = args
    return run_certificate(BetaParam(beta), n, p, rho, cap, seed, strict_log=strict_log)


def run_sweep(grid, workers=1, strict_log=False):
    """One certificate run per (beta, offset) cell, in grid order.

    Cell ``(i, j)`` uses seed ``cell_seed(grid.master_seed, i, j)``, so the
    records do not depend on ``workers``.
    """
    jobs = [
        (beta, grid.n, grid.p, rho, grid.max_iterations, cell_seed(grid.master_seed, i, j), strict_log)
        for i, j, beta, rho in grid.cells()
    ]
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [_run_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, jobs))


def profile_records(mp, n, p, deltas, cap, seed, strict_log=False):
    """Certificate records at ``rho = inj_upper + delta`` for each delta."""
    bound = inj_upper_bound(mp.beta, n, p).inj_upper
    out = []
    for k, delta in enumerate(deltas):
        if not delta > 0:
            raise ValueError("deltas must be positive")
        out.append(run_certificate(mp, n, p, bound + delta, cap, cell_seed(seed, 0, k),
                                   strict_log=strict_log))
    return out


def iterations_profile(mp, n, p, deltas, cap, seed):
    """``(delta, iterations)`` pairs; ``iterations == cap`` when nothing was found."""
    return [(float(d), r.iterations) for d, r in zip(deltas, profile_records(mp, n, p, deltas, cap, seed))]
