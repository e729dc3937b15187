"""The AZ algorithm, its weighted variant, and the synthetic splitting check.

Step 1 solves (I - A Z*) A x1 = (I - A Z*) b with a pluggable low-rank
solver; step 2 corrects with x2 = Z* (b - A x1); the answer is x1 + x2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import matrixcore as mc
from . import solvers
from .operators import (LinearOperator, az_step1_operator, compose, diagonal,
                        materialize)
from .solvers import SolveReport, SolverConfig

DENSE_STEP1_SOLVERS = ("direct", "tsvd", "tqr")
RANDOMIZED_STEP1_SOLVERS = ("rand-tsvd", "rand-tqr")
STEP1_SOLVERS = DENSE_STEP1_SOLVERS + RANDOMIZED_STEP1_SOLVERS


@dataclass(frozen=True)
class AzProblem:
    """A pair of equal-shape operators (A, Z) plus approximation metadata.

    scale is a typical large singular value of A, used to turn relative
    truncation levels into the absolute thresholds the solvers expect.
    grid holds the collocation points (shape (M,) in 1D, (M, 2) in 2D) and
    evaluate, when present, evaluates the approximant built from a
    coefficient vector at arbitrary points of the domain.
    """

    A: LinearOperator
    Z: LinearOperator
    label: str = ""
    scale: float = 1.0
    grid: np.ndarray | None = None
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    domain: object | None = None

    def __post_init__(self):
        if self.A.shape != self.Z.shape:
            raise ValueError(f"A and Z shapes differ: {self.A.shape} vs {self.Z.shape}")


@dataclass(frozen=True)
class WeightedAzProblem:
    """A base problem together with positive row weights and the W_eps cut."""

    base: AzProblem
    d: np.ndarray
    eps_w: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.shape != (self.base.A.rows,):
            raise ValueError("weight vector length must equal the row count")
        if np.any(d <= 0):
            raise ValueError("all weights must be strictly positive")
        if self.eps_w < 0:
            raise ValueError("eps_w must be nonnegative")
        object.__setattr__(self, "d", d)


def _solve_step1(op: LinearOperator, rhs: np.ndarray, step1,
                 config: SolverConfig) -> SolveReport:
    if callable(step1):
        return step1(op, rhs)
    if step1 in RANDOMIZED_STEP1_SOLVERS:
        if step1 == "rand-tsvd":
            return solvers.randomized_tsvd_solve(op, rhs, config)
        return solvers.randomized_tqr_solve(op, rhs, config)
    if step1 not in DENSE_STEP1_SOLVERS:
        raise ValueError(f"unknown step-1 solver {step1!r}; choose from {STEP1_SOLVERS}")
    dense = materialize(op)
    if step1 == "direct":
        return solvers.direct_lsq(dense, rhs)
    if step1 == "tsvd":
        return solvers.tsvd_solve(dense, rhs, config.eps)
    # pivoted QR with the rank picked by the diagonal threshold
    diag = np.abs(np.diagonal(mc.pivoted_qr(dense).R))
    r = int(np.count_nonzero(diag >= config.eps))
    if r == 0:
        m, n = dense.shape
        return SolveReport(x=np.zeros(n, dtype=np.complex128),
                           residual_norm=float(np.linalg.norm(rhs)), rank_used=0)
    return solvers.tqr_solve(dense, rhs, r)


def default_config(problem: AzProblem, seed: int = 0, eps: float | None = None,
                   sketch_size: int | None = None, adaptive: bool = True) -> SolverConfig:
    """Step-1 config with eps defaulting to 1e-10 times the problem scale."""
    if eps is None:
        eps = 1e-10 * problem.scale
    if sketch_size is None:
        n = problem.A.cols
        sketch_size = min(n, max(1, int(4 * np.log2(n + 1))) + solvers.DEFAULT_OVERSAMPLING)
    return SolverConfig(eps=eps, sketch_size=sketch_size, seed=seed, adaptive=adaptive)


def _finish(a: LinearOperator, z: LinearOperator, b: np.ndarray,
            x1: np.ndarray, step1_report: SolveReport, t0: float,
            recompute_residual: bool) -> SolveReport:
    # steps 2-3: exactly one A-apply and one Z*-apply
    r1 = b - np.asarray(a.apply(x1), dtype=np.complex128)
    x2 = np.asarray(z.adjoint_apply(r1), dtype=np.complex128)
    x = x1 + x2
    if recompute_residual:
        res = float(np.linalg.norm(b - a.apply(x)))
    else:
        # the final residual equals the step-1 residual identically
        res = step1_report.residual_norm
    return SolveReport(x=x, residual_norm=res, rank_used=step1_report.rank_used,
                       sketch_size=step1_report.sketch_size,
                       wall_time=time.perf_counter() - t0, x1=x1, x2=x2)


def az_solve(problem: AzProblem, b, step1="rand-tsvd",
             config: SolverConfig | None = None,
             recompute_residual: bool = True) -> SolveReport:
    """Run the three-step AZ algorithm with the chosen step-1 solver.

    step1 is a solver name from STEP1_SOLVERS or a callable
    (operator, rhs) -> SolveReport.  With recompute_residual=False the
    reported residual is taken from step 1 (they agree identically) and
    steps 2-3 spend exactly one A-apply plus one Z*-apply.
    """
    t0 = time.perf_counter()
    a, z = problem.A, problem.Z
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (a.rows,):
        raise ValueError(f"b has shape {b.shape}, expected ({a.rows},)")
    if config is None:
        config = default_config(problem)
    op1 = az_step1_operator(a, z)
    rhs = b - np.asarray(a.apply(z.adjoint_apply(b)), dtype=np.complex128)
    rep1 = _solve_step1(op1, rhs, step1, config)
    return _finish(a, z, b, np.asarray(rep1.x, dtype=np.complex128), rep1, t0,
                   recompute_residual)


def az_solve_with_step1_override(problem: AzProblem, b, x1_forced) -> SolveReport:
    """Skip step 1 and run steps 2-3 on a caller-supplied x1."""
    t0 = time.perf_counter()
    a, z = problem.A, problem.Z
    b = np.asarray(b, dtype=np.complex128)
    x1 = np.asarray(x1_forced, dtype=np.complex128)
    if x1.shape != (a.cols,):
        raise ValueError(f"x1 has shape {x1.shape}, expected ({a.cols},)")
    stub = SolveReport(x=x1, residual_norm=0.0, rank_used=0)
    return _finish(a, z, b, x1, stub, t0, recompute_residual=True)


def weighted_eps_pinv(d: np.ndarray, eps_w: float) -> np.ndarray:
    """Entrywise pseudoinverse of the thresholded weight diagonal.

    Entries with d_i < eps_w are dropped (zero); the boundary d_i == eps_w
    is retained.
    """
    d = np.asarray(d, dtype=np.float64)
    out = np.zeros_like(d)
    keep = d >= eps_w
    out[keep] = 1.0 / d[keep]
    return out


def az_weighted_solve(problem: WeightedAzProblem, b, step1: str = "tsvd",
                      config: SolverConfig | None = None) -> SolveReport:
    """AZ for the weighted system W A x = W b with Z~ = pinv(W_eps) Z."""
    t0 = time.perf_counter()
    base = problem.base
    a, z = base.A, base.Z
    b = np.asarray(b, dtype=np.complex128)
    d = problem.d
    w = diagonal(d)
    wa = compose(w, a)
    ztil = compose(diagonal(weighted_eps_pinv(d, problem.eps_w)), z)
    if config is None:
        config = default_config(base, eps=1e-10 * base.scale * float(d.max()))
    op1 = az_step1_operator(wa, ztil)
    wb = d * b
    rhs = wb - np.asarray(wa.apply(ztil.adjoint_apply(wb)), dtype=np.complex128)
    rep1 = _solve_step1(op1, rhs, step1, config)
    x1 = np.asarray(rep1.x, dtype=np.complex128)
    r1 = wb - np.asarray(wa.apply(x1), dtype=np.complex128)
    x2 = np.asarray(ztil.adjoint_apply(r1), dtype=np.complex128)
    x = x1 + x2
    res = float(np.linalg.norm(wb - wa.apply(x)))
    return SolveReport(x=x, residual_norm=res, rank_used=rep1.rank_used,
                       sketch_size=rep1.sketch_size,
                       wall_time=time.perf_counter() - t0, x1=x1, x2=x2)


@dataclass(frozen=True)
class SplittingReport:
    """Synthetic (A, Z) built from W plus low-rank plus noise, and the rank check."""

    A: np.ndarray
    Z: np.ndarray
    e_bound: float
    eps_rank_report: mc.EpsRankReport
    rank_cap: int

    @property
    def holds(self) -> bool:
        return self.eps_rank_report.r <= self.rank_cap


def splitting_certificate(w, l1, e1, l2, e2, rank_cap: int) -> SplittingReport:
    """Build A = W + L1 + E1 and Z* = pinv(W) + L2 + E2 and certify that
    A - A Z* A has epsilon rank at most rank_cap at the analytic E-bound.

    The bound is eps * (1 + ||I - A Z*||_2 + ||A||_2^2) + eps^2 * ||A||_2
    with eps = max(||E1||_F, ||E2||_F).
    """
    w = np.asarray(w, dtype=np.complex128)
    a = w + l1 + e1
    zstar = mc.pseudoinverse(w) + l2 + e2
    z = zstar.conj().T
    eps = max(mc.frobenius_norm(e1), mc.frobenius_norm(e2))
    m = a.shape[0]
    norm_a = mc.two_norm(a)
    bound = eps * (1.0 + mc.two_norm(np.eye(m) - a @ zstar) + norm_a**2) + eps**2 * norm_a
    diff = a - a @ zstar @ a
    # a zero E-bound (exact splitting) degenerates to a plain rank cutoff
    report = mc.eps_rank(diff, bound if bound > 0 else 1e-12 * max(1.0, norm_a))
    return SplittingReport(A=a, Z=z, e_bound=bound, eps_rank_report=report,
                           rank_cap=rank_cap)
