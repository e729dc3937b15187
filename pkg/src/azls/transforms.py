"""Fast transform and quadrature primitives.

DFT convention: forward is unnormalized with kernel exp(-2*pi*1j*k*l/L); the
inverse carries the 1/L factor.  All lengths are supported (the FFT backend
is mixed-radix with Bluestein for large prime factors).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

_NEWTON_CAP = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (strictly increasing, in (-1,1)) and positive weights on [-1,1]."""

    nodes: np.ndarray
    weights: np.ndarray


def dft(v) -> np.ndarray:
    """Unnormalized forward DFT of any length."""
    return np.fft.fft(np.asarray(v, dtype=np.complex128), axis=0)


def idft(v) -> np.ndarray:
    """Inverse DFT carrying the 1/L factor."""
    return np.fft.ifft(np.asarray(v, dtype=np.complex128), axis=0)


def legendre_eval(n: int, x) -> np.ndarray:
    """Values of P_0 .. P_n at the points x, via the three-term recurrence.

    Returns an array of shape (len(x), n + 1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(np.abs(x) > 1 + 1e-14):
        raise ValueError("Legendre evaluation points must lie in [-1, 1]")
    out = np.empty((x.size, n + 1))
    out[:, 0] = 1.0
    if n >= 1:
        out[:, 1] = x
    for k in range(1, n):
        out[:, k + 1] = ((2 * k + 1) * x * out[:, k] - k * out[:, k - 1]) / (k + 1)
    return out


def _legendre_value_and_derivative(L: int, x: np.ndarray):
    p = legendre_eval(L, x)
    pl, plm1 = p[:, L], p[:, L - 1]
    dpl = L * (plm1 - x * pl) / (1.0 - x**2)
    return pl, dpl


def gauss_legendre(L: int) -> QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1].

    Newton iteration on the roots of P_L, started from Chebyshev roots.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if L == 1:
        return QuadratureRule(nodes=np.zeros(1), weights=np.full(1, 2.0))
    # Chebyshev-root initial guesses, ordered increasing
    x = -np.cos(np.pi * (4 * np.arange(L) + 3) / (4 * L + 2))
    for _ in range(_NEWTON_CAP):
        pl, dpl = _legendre_value_and_derivative(L, x)
        dx = pl / dpl
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # symmetrize to kill roundoff drift
    x = 0.5 * (x - x[::-1])
    pl, dpl = _legendre_value_and_derivative(L, x)
    # convergence is judged by the Newton step, not |P_L| itself: near the
    # endpoints dP_L grows like L^2 and amplifies an O(eps) root residual
    bad = np.nonzero(np.abs(pl / dpl) > 1e-14)[0]
    if bad.size:
        raise RuntimeError(f"Newton iteration did not converge for node index {bad[0]}")
    w = 2.0 / ((1.0 - x**2) * dpl**2)
    return QuadratureRule(nodes=x, weights=w)


def chebyshev_nodes(L: int, kind: str = "roots") -> np.ndarray:
    """Chebyshev points of the first ('roots') or second ('extremae') kind.

    Returned in increasing order.  'roots' are the zeros of T_L; 'extremae'
    are the L extrema of T_{L-1} including the endpoints (requires L >= 2).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if kind == "roots":
        return -np.cos(np.pi * (2 * np.arange(L) + 1) / (2 * L))
    if kind == "extremae":
        if L < 2:
            raise ValueError("extremae grid needs L >= 2")
        return -np.cos(np.pi * np.arange(L) / (L - 1))
    raise ValueError(f"unknown node kind {kind!r}")


def chebyshev_transform(values) -> np.ndarray:
    """Chebyshev coefficients of a function sampled at the L roots of T_L.

    `values` is ordered by increasing node, matching chebyshev_nodes(L).
    Exact (up to roundoff) for polynomials of degree < L.
    """
    v = np.asarray(values, dtype=np.complex128)
    L = v.shape[0]
    # DCT-II runs over nodes cos(pi*(2j+1)/(2L)), i.e. decreasing x
    y = scipy.fft.dct(v[::-1], type=2, axis=0)
    y[0] *= 0.5
    return y / L


def chebyshev_evaluate(coeffs) -> np.ndarray:
    """Evaluate a Chebyshev series at the L roots of T_L (increasing order)."""
    c = np.asarray(coeffs, dtype=np.complex128).copy()
    L = c.shape[0]
    c[1:] *= 0.5
    return scipy.fft.dct(c, type=3, axis=0)[::-1]
