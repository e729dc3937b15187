"""Least squares solvers for numerically low-rank systems.

Dense variants (direct, truncated SVD, truncated pivoted QR) take matrices;
randomized variants take matrix-free operators and a SolverConfig.  Every
solver recomputes the residual norm independently of its internal algebra.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from . import matrixcore as mc
from .operators import LinearOperator, from_dense

DEFAULT_OVERSAMPLING = 20


@dataclass(frozen=True)
class SolverConfig:
    """Truncation threshold and sketching parameters.

    eps is an absolute singular-value / diagonal threshold.  sketch_size is
    R = r + p; when only a target rank is known, use SolverConfig.for_rank.
    adaptive doubles R (reusing the random stream) while the sketch shows no
    singular value below eps, capped at N.
    """

    eps: float
    sketch_size: int
    seed: int = 0
    adaptive: bool = False

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.sketch_size < 1:
            raise ValueError("sketch_size must be >= 1")

    @classmethod
    def for_rank(cls, r: int, eps: float, p: int = DEFAULT_OVERSAMPLING,
                 seed: int = 0, adaptive: bool = False) -> "SolverConfig":
        if p < 2:
            raise ValueError("oversampling p must be >= 2")
        return cls(eps=eps, sketch_size=r + p, seed=seed, adaptive=adaptive)


@dataclass
class SolveReport:
    x: np.ndarray
    residual_norm: float
    rank_used: int
    sketch_size: int = 0
    wall_time: float = 0.0
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("x", "x1", "x2"):
            if d[key] is not None:
                d[key] = [[float(z.real), float(z.imag)] for z in np.asarray(d[key])]
        return d


def _residual(apply_a, b, x) -> float:
    return float(np.linalg.norm(b - apply_a(x)))


def _report(apply_a, b, x, rank, sketch=0, t0=None) -> SolveReport:
    wall = 0.0 if t0 is None else time.perf_counter() - t0
    return SolveReport(x=x, residual_norm=_residual(apply_a, b, x),
                       rank_used=rank, sketch_size=sketch, wall_time=wall)


def direct_lsq(a, b) -> SolveReport:
    """Minimum-norm least squares x = pinv(A) b via the SVD."""
    t0 = time.perf_counter()
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    f = mc.svd(a)
    cutoff = max(a.shape) * np.finfo(np.float64).eps * (f.sigma[0] if f.sigma.size else 0.0)
    keep = f.sigma > cutoff
    x = f.V[:, keep] @ ((f.U[:, keep].conj().T @ b) / f.sigma[keep])
    return _report(lambda v: a @ v, b, x, int(np.count_nonzero(keep)), t0=t0)


def tsvd_solve(a, b, eps: float) -> SolveReport:
    """Truncated SVD solve: invert only singular values >= eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    t0 = time.perf_counter()
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    f = mc.svd(a)
    k = int(np.count_nonzero(f.sigma >= eps))
    x = f.V[:, :k] @ ((f.U[:, :k].conj().T @ b) / f.sigma[:k])
    return _report(lambda v: a @ v, b, x, k, t0=t0)


def tqr_solve(a, b, r: int) -> SolveReport:
    """Truncated pivoted QR solve with explicit rank r."""
    a = np.asarray(a, dtype=np.complex128)
    if not 1 <= r <= a.shape[1]:
        raise ValueError(f"rank r={r} out of range for {a.shape} matrix")
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=np.complex128)
    f = mc.pivoted_qr(a)
    diag = np.abs(np.diagonal(f.R))[:r]
    if np.any(diag == 0.0):
        bad = int(np.argmax(diag == 0.0))
        raise ValueError(f"singular leading block: R[{bad},{bad}] = 0")
    y = scipy.linalg.solve_triangular(f.R[:r, :r], f.Q[:, :r].conj().T @ b)
    x = np.zeros(a.shape[1], dtype=np.complex128)
    x[f.perm[:r]] = y
    return _report(lambda v: a @ v, b, x, r, t0=t0)


def _as_operator(a) -> LinearOperator:
    return a if isinstance(a, LinearOperator) else from_dense(a)


def _sketch(a: LinearOperator, config: SolverConfig):
    """Yield (Omega, A @ Omega) for R, then doubled R if adaptive, capped at N."""
    n = a.cols
    rng = np.random.default_rng(config.seed)
    r_now = min(config.sketch_size, n)
    omega = rng.standard_normal((n, r_now))
    atil = np.asarray(a.apply(omega), dtype=np.complex128)
    while True:
        yield omega, atil
        if not config.adaptive or r_now >= n:
            return
        extra = min(r_now, n - r_now)
        omega_new = rng.standard_normal((n, extra))
        atil = np.concatenate([atil, np.asarray(a.apply(omega_new), dtype=np.complex128)], axis=1)
        omega = np.concatenate([omega, omega_new], axis=1)
        r_now += extra


def randomized_tsvd_solve(a, b, config: SolverConfig) -> SolveReport:
    """Sketch-then-truncated-SVD solve; the answer lies in the sketch span."""
    t0 = time.perf_counter()
    a = _as_operator(a)
    b = np.asarray(b, dtype=np.complex128)
    for omega, atil in _sketch(a, config):
        f = mc.svd(atil)
        k = int(np.count_nonzero(f.sigma >= config.eps))
        if k < omega.shape[1] or omega.shape[1] >= a.cols:
            break
    if k == 0:
        x = np.zeros(a.cols, dtype=np.complex128)
    else:
        y = f.V[:, :k] @ ((f.U[:, :k].conj().T @ b) / f.sigma[:k])
        x = omega @ y
    return _report(a.apply, b, x, k, sketch=omega.shape[1], t0=t0)


def randomized_tqr_solve(a, b, config: SolverConfig) -> SolveReport:
    """Sketch-then-truncated-pivoted-QR solve, thresholding |diag(R)| at eps."""
    t0 = time.perf_counter()
    a = _as_operator(a)
    b = np.asarray(b, dtype=np.complex128)
    for omega, atil in _sketch(a, config):
        f = mc.pivoted_qr(atil)
        diag = np.abs(np.diagonal(f.R))
        k = int(np.count_nonzero(diag >= config.eps))
        if k < omega.shape[1] or omega.shape[1] >= a.cols:
            break
    if k == 0:
        x = np.zeros(a.cols, dtype=np.complex128)
    else:
        y = scipy.linalg.solve_triangular(f.R[:k, :k], f.Q[:, :k].conj().T @ b)
        yfull = np.zeros(omega.shape[1], dtype=np.complex128)
        yfull[f.perm[:k]] = y
        x = omega @ yfull
    return _report(a.apply, b, x, k, sketch=omega.shape[1], t0=t0)


@dataclass(frozen=True)
class GaussianSketchStats:
    """Monte Carlo summary of pseudoinverse norms of r-by-(r+p) Gaussians."""

    r: int
    p: int
    trials: int
    mean_pinv_fro: float
    expected_pinv_fro: float
    tail_s: float
    tail_fraction: float
    tail_bound: float
    mean_fro: float


def mc_gaussian_props(r: int, p: int, trials: int, seed: int,
                      tail_s: float = 2.0) -> GaussianSketchStats:
    """Empirical check of the Gaussian pseudoinverse norm law and its tail.

    For r-by-(r+p) standard Gaussians with p >= 4 the mean Frobenius norm of
    the pseudoinverse is sqrt(r / (p - 1)), and the probability that it
    exceeds s * sqrt(3r / (p + 1)) is at most s**(-p).
    """
    if p < 4:
        raise ValueError("oversampling p must be >= 4")
    if trials < 100:
        raise ValueError("need at least 100 trials")
    threshold = tail_s * np.sqrt(3.0 * r / (p + 1))
    pinv_norms = np.empty(trials)
    fro_norms = np.empty(trials)
    for t in range(trials):
        omega = mc.gaussian_matrix(r, r + p, seed + t)
        pinv_norms[t] = np.linalg.norm(np.linalg.pinv(omega), "fro")
        fro_norms[t] = np.linalg.norm(omega, "fro")
    return GaussianSketchStats(
        r=r, p=p, trials=trials,
        mean_pinv_fro=float(pinv_norms.mean()),
        expected_pinv_fro=float(np.sqrt(r / (p - 1))),
        tail_s=tail_s,
        tail_fraction=float(np.mean(pinv_norms >= threshold)),
        tail_bound=float(tail_s ** (-p)),
        mean_fro=float(fro_norms.mean()),
    )
