"""Harmonic-oscillator eigenbasis built from physicists' Hermite polynomials.

The eigenfunctions of ``-mu^2 Laplacian + beta^2 |z|^2`` on R^n are

    Gamma_k(z) = C_k exp(-beta |z|^2 / (2 mu)) prod_i H_{k_i}(sqrt(beta/mu) z_i),

with ``C_k = (beta/(pi mu))^{n/4} (2^{sigma(k)} prod_i k_i!)^{-1/2}`` and
eigenvalue ``(2 sigma(k) + n) mu beta``. Everything that can overflow is
evaluated through the normalized recurrence for ``H_k / sqrt(2^k k!)`` or
with log-factorials.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


@dataclass(frozen=True)
class MultiIndex:
    """Tuple of per-axis Hermite degrees."""

    k: tuple

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        if any(v < 0 for v in k):
            raise DomainError(f"multi-index entries must be >= 0, got {k}")
        object.__setattr__(self, "k", k)

    @property
    def n(self):
        return len(self.k)

    @property
    def sigma(self):
        return sum(self.k)

    def __getitem__(self, i):
        return self.k[i]

    def __iter__(self):
        return iter(self.k)

    def __len__(self):
        return len(self.k)

    def bumped(self, i, delta):
        k = list(self.k)
        k[i] += delta
        return MultiIndex(tuple(k))


def as_index(k):
    """Coerce an int, tuple or MultiIndex to a MultiIndex."""
    if isinstance(k, MultiIndex):
        return k
    if isinstance(k, (int, np.integer)):
        return MultiIndex((int(k),))
    return MultiIndex(tuple(k))


def sigma(k):
    return as_index(k).sigma


def multi_indices(n, sigma_max, sigma_min=0):
    """All multi-indices of length ``n`` with sigma_min <= sigma <= sigma_max.

    Ordered by sigma, then lexicographically (descending first entry).
    """
    out = []
    for s in range(sigma_min, sigma_max + 1):
        for head in itertools.product(range(s, -1, -1), repeat=n - 1):
            rest = s - sum(head)
            if rest >= 0:
                out.append(MultiIndex(head + (rest,)))
    return out


@dataclass(frozen=True)
class HermiteContext:
    """Spectral parameters ``mu`` (= mu_H) and ``beta`` in dimension ``n``."""

    mu: float
    beta: float
    n: int

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0):
            raise DomainError("HermiteContext requires mu > 0 and beta > 0")
        if self.n < 1:
            raise DomainError("n must be >= 1")

    @property
    def scale(self):
        """sqrt(beta/mu): maps z to the argument of H_k."""
        return math.sqrt(self.beta / self.mu)

    @classmethod
    def from_params(cls, params):
        return cls(params.mu_H, params.beta, params.n)


def _check_index(k, ctx):
    k = as_index(k)
    if ctx is not None and k.n != ctx.n:
        raise DomainError(f"multi-index of length {k.n} does not match n={ctx.n}")
    return k


# ---------------------------------------------------------------------------
# one-dimensional polynomials


def hermite(k, x):
    """Physicists' Hermite polynomial H_k(x) by forward recurrence."""
    if k < 0:
        raise DomainError("k must be >= 0")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for j in range(1, k):
        h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    return h if h.ndim else float(h)


def hermite_normalized_table(kmax, x, weighted=False):
    """Rows ``H_j(x)/sqrt(2^j j!)`` for j = 0..kmax.

    With ``weighted=True`` every row is multiplied by exp(-x^2/2), giving
    the functions bounded by one in Cramer's inequality.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = np.exp(-0.5 * x * x) if weighted else 1.0
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(1, kmax):
        out[j + 1] = (math.sqrt(2.0 / (j + 1)) * x * out[j]
                      - math.sqrt(j / (j + 1)) * out[j - 1])
    return out


def hermite_normalized(k, x, weighted=False):
    """H_k(x)/sqrt(2^k k!) (optionally times exp(-x^2/2))."""
    x = np.asarray(x, dtype=float)
    h_prev = np.exp(-0.5 * x * x) if weighted else np.ones_like(x)
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = math.sqrt(2.0) * x * h_prev
    for j in range(1, k):
        h_prev, h = h, math.sqrt(2.0 / (j + 1)) * x * h - math.sqrt(j / (j + 1)) * h_prev
    return h if h.ndim else float(h)


def hermite_scale_shift(k, gamma, x, y):
    """Right-hand side of the scale-and-shift expansion of H_k(gamma (x + y)).

    sum_j binom(k, j) gamma^j (1 - gamma^2)^{(k-j)/2}
          H_{k-j}(y gamma / sqrt(1 - gamma^2)) H_j(x)
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    s = math.sqrt(1.0 - gamma * gamma)
    arg = y * gamma / s
    total = 0.0
    for j in range(k + 1):
        total += (math.comb(k, j) * gamma ** j * s ** (k - j)
                  * hermite(k - j, arg) * hermite(j, x))
    return total


# ---------------------------------------------------------------------------
# eigenfunctions


def log_norm_const(k, ctx):
    """log C_k."""
    k = _check_index(k, ctx)
    return (0.25 * ctx.n * math.log(ctx.beta / (math.pi * ctx.mu))
            - 0.5 * (k.sigma * math.log(2.0) + sum(math.lgamma(v + 1) for v in k)))


def gamma_k(k, z, ctx):
    """Evaluate Gamma_k at points ``z`` (last axis of length n)."""
    k = _check_index(k, ctx)
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != ctx.n:
        raise DomainError(f"points must have last axis of length {ctx.n}")
    s = ctx.scale
    val = (ctx.beta / (math.pi * ctx.mu)) ** (0.25 * ctx.n)
    for i, ki in enumerate(k):
        val = val * hermite_normalized(ki, s * z[..., i], weighted=True)
    return val


def gamma_k_derivative(i, k, z, ctx):
    """d Gamma_k / d z_i from the ladder relation."""
    k = _check_index(k, ctx)
    s = ctx.scale
    up = -math.sqrt((k[i] + 1) / 2.0) * gamma_k(k.bumped(i, 1), z, ctx)
    if k[i] == 0:
        return s * up
    return s * (math.sqrt(k[i] / 2.0) * gamma_k(k.bumped(i, -1), z, ctx) + up)


def eigenvalue(k, ctx):
    """(2 sigma(k) + n) mu beta."""
    k = _check_index(k, ctx)
    return (2 * k.sigma + ctx.n) * ctx.mu * ctx.beta


# ---------------------------------------------------------------------------
# moments


def moment_mk(k, ctx):
    """Integral of Gamma_k over R^n."""
    k = _check_index(k, ctx)
    if any(v % 2 for v in k):
        return 0.0
    log_val = (0.25 * ctx.n * math.log(math.pi * ctx.mu / ctx.beta)
               + 0.5 * (ctx.n - k.sigma) * math.log(2.0)
               + sum(0.5 * math.lgamma(v + 1) - math.lgamma(v // 2 + 1) for v in k))
    return math.exp(log_val)


def in_odd_class(i, k):
    """True when k_i is odd and every other entry is even."""
    k = as_index(k)
    return all((v % 2 == 1) if j == i else (v % 2 == 0) for j, v in enumerate(k))


def first_moment_wik(i, k, ctx):
    """Integral of z_i Gamma_k over R^n."""
    k = _check_index(k, ctx)
    if not in_odd_class(i, k):
        return 0.0
    log_val = (math.log(2.0) + 0.5 * math.log(ctx.mu / ctx.beta)
               + 0.25 * ctx.n * math.log(math.pi * ctx.mu / ctx.beta)
               + 0.5 * (ctx.n - k.sigma) * math.log(2.0)
               + sum(0.5 * math.lgamma(v + 1) for v in k))
    for j, v in enumerate(k):
        log_val -= math.lgamma((v - 1) // 2 + 1) if j == i else math.lgamma(v // 2 + 1)
    return math.exp(log_val)


def gaussian_overlap_first(i, k, ctx):
    """Integral of z_i Gamma_k exp(-beta |z|^2 / (2 mu))."""
    k = _check_index(k, ctx)
    if not all(v == (1 if j == i else 0) for j, v in enumerate(k)):
        return 0.0
    return math.sqrt(ctx.mu / (2.0 * ctx.beta)) * (math.pi * ctx.mu / ctx.beta) ** (0.25 * ctx.n)


def gaussian_overlap_even(k, theta, ctx):
    """Integral of Gamma_{2k} exp(-theta |z|^2), theta > 0."""
    if not theta > 0:
        raise DomainError("theta must be > 0")
    k = _check_index(k, ctx)
    k2 = MultiIndex(tuple(2 * v for v in k))
    mu, beta = ctx.mu, ctx.beta
    ratio = (beta - 2.0 * theta * mu) / (beta + 2.0 * theta * mu)
    if ratio == 0.0 and k.sigma > 0:
        return 0.0
    log_val = (log_norm_const(k2, ctx)
               + 0.5 * ctx.n * math.log(2.0 * math.pi * mu / (beta + 2.0 * theta * mu)))
    sign = 1.0
    for v in k:
        if v:
            log_val += v * math.log(abs(ratio)) + math.lgamma(2 * v + 1) - math.lgamma(v + 1)
            if ratio < 0 and v % 2:
                sign = -sign
    return sign * math.exp(log_val)


# ---------------------------------------------------------------------------
# Hermite products against a shifted Gaussian


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def hermite_gauss_product_normalized(j, k, theta, kappa):
    """Integral of h_j h_k exp(-y^2 - theta (y - kappa)^2), h_m = H_m/sqrt(2^m m!).

    Stable for large degrees: only bounded normalized polynomials and
    log-binomials enter.
    """
    if not theta > 0:
        raise DomainError("theta must be > 0")
    if j < 0 or k < 0:
        raise DomainError("degrees must be >= 0")
    lam2 = theta / (1.0 + theta)
    lam = math.sqrt(lam2)
    x0 = lam * kappa
    lo = min(j, k)
    ls = np.arange(lo + 1)
    table = hermite_normalized_table(max(j, k), x0)
    hv = table[j - ls] * table[k - ls]
    logs = (0.5 * (_log_binom(j, ls) + _log_binom(k, ls)) - ls * math.log(theta)
            + (j + k) * math.log(lam))
    top = logs.max()
    total = float(np.sum(np.exp(logs - top) * hv))
    return (math.sqrt(math.pi / (1.0 + theta)) * math.exp(-lam2 * kappa * kappa)
            * total * math.exp(top))


def hermite_gauss_product(j, k, theta, kappa):
    """Integral of H_j H_k exp(-y^2 - theta (y - kappa)^2) over R."""
    norm = hermite_gauss_product_normalized(j, k, theta, kappa)
    log_scale = 0.5 * ((j + k) * math.log(2.0) + math.lgamma(j + 1) + math.lgamma(k + 1))
    return norm * math.exp(log_scale)


def hermite_gauss_product_centered(j, k, theta):
    """The kappa = 0 specialization, summed over its positive terms only."""
    if not theta > 0:
        raise DomainError("theta must be > 0")
    if (j + k) % 2:
        return 0.0
    if j < k:
        j, k = k, j
    half = (j - k) // 2
    logs = []
    for i in range(k // 2 + 1):
        logs.append(math.lgamma(j + 1) + math.lgamma(k + 1) - math.lgamma(i + 1)
                    - math.lgamma(k - 2 * i + 1) - math.lgamma(half + i + 1)
                    + (k - 2 * i) * math.log(2.0 / theta))
    logs = np.array(logs)
    top = logs.max()
    log_total = top + math.log(np.sum(np.exp(logs - top)))
    log_total += 0.5 * math.log(math.pi / (1.0 + theta)) + 0.5 * (j + k) * math.log(theta / (1.0 + theta))
    sign = -1.0 if half % 2 else 1.0
    return sign * math.exp(log_total)
