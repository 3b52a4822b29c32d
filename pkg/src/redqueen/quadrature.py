"""Quadrature oracles, deliberately independent of the closed forms they check."""

import itertools
import math
import warnings

import numpy as np
from scipy import integrate


def gauss_hermite_integral(poly, n, a, order=80):
    """Integral over R^n of ``poly(z) * exp(-a |z|^2)``.

    ``poly`` receives an array of points with last axis n and must return the
    non-Gaussian factor. Exact when ``poly`` is a polynomial of degree
    below ``2 * order``.
    """
    x, w = np.polynomial.hermite.hermgauss(order)
    x = x / math.sqrt(a)
    w = w / math.sqrt(a)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    pts = np.stack(grids, axis=-1)
    wt = np.ones((order,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = order
        wt = wt * w.reshape(shape)
    return float(np.sum(wt * poly(pts)))


def gauss_hermite_grid(n, a, order):
    """Tensor nodes and weights such that sum(w * g(z) * exp(a|z|^2)) integrates g."""
    x, w = np.polynomial.hermite.hermgauss(order)
    x = x / math.sqrt(a)
    w = w * np.exp(x * x * a) / math.sqrt(a)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    pts = np.stack(grids, axis=-1)
    wt = np.ones((order,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = order
        wt = wt * w.reshape(shape)
    return pts, wt


def adaptive_1d(func, lo=-np.inf, hi=np.inf, rel=1e-12, mag_rel=1e-3):
    """Adaptive Gauss-Kronrod integral; returns (value, integral of |func|).

    The second value is only a scale for relative errors, hence the loose
    default ``mag_rel``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=rel, limit=500)
        mag, _ = integrate.quad(lambda t: abs(func(t)), lo, hi, epsabs=0.0, epsrel=mag_rel, limit=500)
    return val, mag


def adaptive_nd_product(factors):
    """Integral of a separable integrand prod_i f_i(z_i), one quad per axis."""
    out = 1.0
    for f in factors:
        out *= adaptive_1d(f)[0]
    return out


def index_box(n, kmax):
    return itertools.product(range(kmax + 1), repeat=n)


def alpha0_integral(n, lam):
    """alpha_0 as (lam/2) int_0^1 (1 + lam^2 t^2)^{-3/2} exp(-(n-1) lam^2 t^2 / 4) dt.

    Obtained by writing 1/(2s+1) as int_0^1 t^{2s} dt and summing each
    coordinate series in closed form; independent of the shell summation.
    """
    f = lambda t: (1.0 + lam * lam * t * t) ** -1.5 * math.exp(-(n - 1) * lam * lam * t * t / 4.0)  # noqa: E731
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return 0.5 * lam * val
