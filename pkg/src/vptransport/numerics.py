"""Shared numerical helpers: bracketed roots, quadrature nodes, stencils."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre


@lru_cache(maxsize=64)
def _legendre(n):
    x, w = roots_legendre(int(n))
    return x, w


def gauss_nodes(n, a=0.0, b=1.0):
    """Gauss-Legendre nodes and weights mapped to (a, b).

    a and b may be arrays; the node axis is appended last, so scalars give
    shape (n,) and arrays of shape S give shape S + (n,).
    """
    x, w = _legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x
    weights = half * w
    if nodes.shape[:-1] == ():
        return nodes.reshape(-1), weights.reshape(-1)
    return nodes, weights


def chebyshev_interior(a, b, n):
    """n Chebyshev-distributed points strictly inside (a, b)."""
    k = np.arange(n)
    t = np.cos(np.pi * (2 * k + 1) / (2 * n))[::-1]
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * t
    if pts.shape[:-1] == ():
        return pts.reshape(-1)
    return pts


def bisect_root(fn, lo, hi, iters=90):
    """Elementwise bisection on a bracket where fn changes sign.

    fn must be vectorized.  The bracket [lo, hi] must satisfy
    sign(fn(lo)) != sign(fn(hi)) elementwise (zeros count as either side).
    90 halvings reduce the bracket by 2^-90, far below double precision,
    so the returned midpoint is converged to the last representable bit.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    flo = np.asarray(fn(lo))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(fn(mid))
        same_side = (fm <= 0) == (flo <= 0)
        lo = np.where(same_side, mid, lo)
        flo = np.where(same_side, fm, flo)
        hi = np.where(same_side, hi, mid)
    return 0.5 * (lo + hi)


def centered_derivative(y, h):
    """Fourth-order first derivative of uniformly sampled y; valid for
    indices 2..n-3 of the input (returned array is shorter by 4)."""
    y = np.asarray(y, dtype=float)
    return (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)


def ppoly_scalar(breaks, coeffs, x):
    """Evaluate a scipy PPoly (cubic, coeffs shape (4, m)) at scalar x.

    Fast path for sequential ODE loops where the PPoly.__call__ overhead
    dominates.  Clamps to the outermost pieces.
    """
    j = int(np.searchsorted(breaks, x)) - 1
    if j < 0:
        j = 0
    elif j >= coeffs.shape[1]:
        j = coeffs.shape[1] - 1
    t = x - breaks[j]
    return ((coeffs[0, j] * t + coeffs[1, j]) * t + coeffs[2, j]) * t + coeffs[3, j]
