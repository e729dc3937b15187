"""Matrix-free linear operators and combinators.

An operator maps C^N -> C^M and always carries its adjoint.  Apply callables
accept a vector of shape (N,) or a block of column vectors of shape (N, k);
every combinator preserves that convention.  Operators are immutable and
safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MATERIALIZE_CAP = 4096


class ShapeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class LinearOperator:
    """Matrix-free M-by-N map with mandatory adjoint.

    t_mult is an advisory flop estimate for one apply; it never influences
    results.
    """

    rows: int
    cols: int
    apply: Callable[[np.ndarray], np.ndarray]
    adjoint_apply: Callable[[np.ndarray], np.ndarray]
    t_mult: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)


def _check_same_shape(a: LinearOperator, z: LinearOperator) -> None:
    if a.shape != z.shape:
        raise ShapeMismatchError(f"operators have shapes {a.shape} and {z.shape}")


def from_dense(mat) -> LinearOperator:
    mat = np.asarray(mat, dtype=np.complex128)
    m, n = mat.shape
    mh = mat.conj().T
    return LinearOperator(m, n, lambda v: mat @ v, lambda v: mh @ v, t_mult=2 * m * n)


def materialize(op: LinearOperator, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Dense matrix of an operator, built by applying it to basis vectors."""
    if op.cols > cap:
        raise ValueError(f"refusing to materialize {op.shape} operator (cap {cap} columns)")
    return np.asarray(op.apply(np.eye(op.cols, dtype=np.complex128)), dtype=np.complex128)


def identity(n: int) -> LinearOperator:
    return LinearOperator(n, n, lambda v: np.asarray(v, dtype=np.complex128).copy(),
                          lambda v: np.asarray(v, dtype=np.complex128).copy(), t_mult=0)


def adjoint(op: LinearOperator) -> LinearOperator:
    return LinearOperator(op.cols, op.rows, op.adjoint_apply, op.apply, t_mult=op.t_mult)


def scale(c: complex, op: LinearOperator) -> LinearOperator:
    cbar = np.conj(c)
    return LinearOperator(op.rows, op.cols,
                          lambda v: c * op.apply(v),
                          lambda v: cbar * op.adjoint_apply(v),
                          t_mult=op.t_mult)


def _dmul(d: np.ndarray, v: np.ndarray) -> np.ndarray:
    return d[:, None] * v if v.ndim == 2 else d * v


def diagonal(d) -> LinearOperator:
    d = np.asarray(d, dtype=np.complex128)
    dbar = d.conj()
    n = d.shape[0]
    return LinearOperator(n, n,
                          lambda v: _dmul(d, np.asarray(v, dtype=np.complex128)),
                          lambda v: _dmul(dbar, np.asarray(v, dtype=np.complex128)),
                          t_mult=n)


def compose(b: LinearOperator, a: LinearOperator) -> LinearOperator:
    """Operator computing b(a(v))."""
    if b.cols != a.rows:
        raise ShapeMismatchError(f"cannot compose {b.shape} after {a.shape}")
    t = None if (a.t_mult is None or b.t_mult is None) else a.t_mult + b.t_mult
    return LinearOperator(b.rows, a.cols,
                          lambda v: b.apply(a.apply(v)),
                          lambda v: a.adjoint_apply(b.adjoint_apply(v)),
                          t_mult=t)


def subtract(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    _check_same_shape(a, b)
    return LinearOperator(a.rows, a.cols,
                          lambda v: a.apply(v) - b.apply(v),
                          lambda v: a.adjoint_apply(v) - b.adjoint_apply(v))


def hstack(a1: LinearOperator, a2: LinearOperator) -> LinearOperator:
    """[A1 A2] acting on stacked coefficients (first a1.cols, then a2.cols)."""
    if a1.rows != a2.rows:
        raise ShapeMismatchError(f"row mismatch: {a1.shape} vs {a2.shape}")
    n1 = a1.cols

    def apply(v):
        v = np.asarray(v, dtype=np.complex128)
        return a1.apply(v[:n1]) + a2.apply(v[n1:])

    def adjoint_apply(v):
        v = np.asarray(v, dtype=np.complex128)
        return np.concatenate([a1.adjoint_apply(v), a2.adjoint_apply(v)], axis=0)

    return LinearOperator(a1.rows, n1 + a2.cols, apply, adjoint_apply)


def restriction(indices, m: int) -> LinearOperator:
    """Select the given rows out of a length-m vector; adjoint zero-pads."""
    idx = np.asarray(indices, dtype=np.intp)

    def apply(v):
        return np.asarray(v, dtype=np.complex128)[idx]

    def adjoint_apply(v):
        v = np.asarray(v, dtype=np.complex128)
        out_shape = (m,) + v.shape[1:]
        out = np.zeros(out_shape, dtype=np.complex128)
        out[idx] = v
        return out

    return LinearOperator(len(idx), m, apply, adjoint_apply, t_mult=len(idx))


def extension(indices, n: int) -> LinearOperator:
    """Zero-padding embed into length n at the given rows; adjoint restricts."""
    return adjoint(restriction(indices, n))


def az_step1_operator(a: LinearOperator, z: LinearOperator) -> LinearOperator:
    """(I - A Z*) A, the system matrix of the first AZ step."""
    _check_same_shape(a, z)

    def apply(v):
        av = a.apply(v)
        return av - a.apply(z.adjoint_apply(av))

    def adjoint_apply(v):
        v = np.asarray(v, dtype=np.complex128)
        return a.adjoint_apply(v - z.apply(a.adjoint_apply(v)))

    t = None
    if a.t_mult is not None and z.t_mult is not None:
        t = 2 * a.t_mult + z.t_mult + a.rows
    return LinearOperator(a.rows, a.cols, apply, adjoint_apply, t_mult=t)


@dataclass
class CallCounter:
    """Mutable apply/adjoint counters for a wrapped operator (test aid)."""

    applies: int = 0
    adjoint_applies: int = 0


def counted(op: LinearOperator) -> tuple[LinearOperator, CallCounter]:
    """Wrap an operator so every apply/adjoint-apply is counted."""
    counter = CallCounter()

    def apply(v):
        counter.applies += 1
        return op.apply(v)

    def adjoint_apply(v):
        counter.adjoint_applies += 1
        return op.adjoint_apply(v)

    return LinearOperator(op.rows, op.cols, apply, adjoint_apply, t_mult=op.t_mult), counter
