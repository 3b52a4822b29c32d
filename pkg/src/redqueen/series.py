"""Numerical evidence for the binomial series bounds used in the pulse construction.

All binomials and factorials are taken in the log domain. Sums over j
are evaluated in a fixed order so that repeated runs agree bitwise.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, SeriesDivergenceError
from .hermite import hermite_normalized_table

THETA_BAR_MAX = math.sqrt(5.0) - 2.0


@dataclass(frozen=True)
class SeriesParams:
    """Scaled constants of the series: theta_bar, decay exponent b, speed/offset shift.

    ``c_bar`` and ``ell_bar`` are the speed and offset rescaled by
    sqrt(beta/mu_H); ``tau`` is the delay, so the Gaussian center in the
    scaled variable is ``-(c_bar tau + ell_bar) u``.
    """

    theta_bar: float
    b: float = 5.0
    c_bar: float = 0.0
    ell_bar: float = 0.0
    tau: float = 0.0
    n: int = 2

    def __post_init__(self):
        if not self.theta_bar > 0:
            raise DomainError("theta_bar must be > 0")
        if self.n < 1:
            raise DomainError("n must be >= 1")

    @property
    def lam(self):
        return math.sqrt(self.theta_bar / (1.0 + self.theta_bar))

    @property
    def shift(self):
        return self.c_bar * self.tau + self.ell_bar

    @property
    def admissible(self):
        return self.theta_bar < THETA_BAR_MAX

    @property
    def rate(self):
        """q = (2 sqrt(2) lam / (1 + theta_bar))^{1/2}."""
        return math.sqrt(2.0 * math.sqrt(2.0) * self.lam / (1.0 + self.theta_bar))

    @classmethod
    def from_model(cls, params, c=0.0, b=5.0):
        scale = math.sqrt(params.beta / params.mu_H)
        tau = 1.0 / (2.0 * params.mu_P * params.alpha_P)
        return cls(params.mu_H * params.theta / params.beta, b, scale * c, scale * params.ell, tau,
                   params.n)

    def as_dict(self):
        d = asdict(self)
        d["lambda"] = self.lam
        return d


class _LogFact:
    """Cached table of log(m!)."""

    def __init__(self, size=64):
        self.table = gammaln(np.arange(size) + 1.0)

    def __call__(self, upto):
        if upto >= len(self.table):
            self.table = gammaln(np.arange(max(upto + 1, 2 * len(self.table))) + 1.0)
        return self.table


_LF = _LogFact()


def _log_terms(j, k, sp, quartic=True):
    """log of the l-summands of gamma_j^k (without the (1+j)^-b lam^(j+k) prefactor)."""
    lf = _LF(max(j, k))
    m = min(j, k)
    ls = np.arange(m + 1)
    out = (0.5 * (lf[j] - lf[ls] - lf[j - ls] + lf[k] - lf[ls] - lf[k - ls])
           - ls * math.log(sp.theta_bar))
    if quartic:
        out = out - 0.25 * np.log(np.maximum(1.0, k - ls)) - 0.25 * np.log(np.maximum(1.0, j - ls))
    return out


def _log_gamma(j, k, sp, quartic=True):
    return (-sp.b * math.log1p(j) + (j + k) * math.log(sp.lam)
            + float(logsumexp(_log_terms(j, k, sp, quartic))))


def gamma_jk(j, k, sp):
    """gamma_j^k with the quartic denominators."""
    if j < 0 or k < 0:
        raise DomainError("indices must be >= 0")
    return math.exp(_log_gamma(j, k, sp))


def gamma_tilde_jk(j, k, sp):
    """gamma_j^k without the quartic denominators."""
    if j < 0 or k < 0:
        raise DomainError("indices must be >= 0")
    return math.exp(_log_gamma(j, k, sp, quartic=False))


def _block_terms(js, k, sp, ls):
    lf = _LF(int(max(js.max(), k)))
    m = np.minimum(js, k)
    jj = js[:, None]
    valid = (ls[None, :] <= m[:, None]) & (ls[None, :] >= 0)
    lsafe = np.where(valid, ls[None, :], 0)
    terms = (0.5 * (lf[jj] - lf[lsafe] - lf[np.maximum(jj - lsafe, 0)]
                    + lf[k] - lf[lsafe] - lf[np.maximum(k - lsafe, 0)])
             - lsafe * math.log(sp.theta_bar)
             - 0.25 * np.log(np.maximum(1.0, k - lsafe))
             - 0.25 * np.log(np.maximum(1.0, jj - lsafe)))
    return np.where(valid, terms, -np.inf)


def _log_gamma_block(js, k, sp, window=True):
    """log gamma_j^k for an array of j values.

    For long l ranges the l-sum is restricted to a window around its peak,
    located on a coarse grid; the window is widened to the full range unless
    both edges sit 45 e-folds below the peak.
    """
    js = np.asarray(js, dtype=int)
    mmax = int(np.minimum(js, k).max())
    full = np.arange(mmax + 1)
    prefix = -sp.b * np.log1p(js) + (js + k) * math.log(sp.lam)
    if not window or mmax <= 256:
        return prefix + logsumexp(_block_terms(js, k, sp, full), axis=1)
    stride = max(1, mmax // 128)
    coarse = np.arange(0, mmax + 1, stride)
    ct = _block_terms(js, k, sp, coarse)
    peaks = coarse[np.argmax(ct, axis=1)]
    half = 2 * stride + int(12.0 * math.sqrt(mmax)) + 16
    lo = max(0, int(peaks.min()) - half)
    hi = min(mmax, int(peaks.max()) + half)
    terms = _block_terms(js, k, sp, np.arange(lo, hi + 1))
    top = terms.max(axis=1)
    m = np.minimum(js, k)
    edge_lo = terms[:, 0] if lo > 0 else np.full(len(js), -np.inf)
    right = np.where(m > hi, terms[:, -1], -np.inf)
    if np.all(edge_lo < top - 45.0) and np.all(right < top - 45.0):
        return prefix + logsumexp(terms, axis=1)
    return prefix + logsumexp(_block_terms(js, k, sp, full), axis=1)


def gamma_row_bruteforce(k, jmax, sp):
    """gamma_j^k for j = 0..jmax, every term evaluated."""
    return np.exp(_log_gamma_block(np.arange(jmax + 1), k, sp, window=False))


def sum_gamma(k, sp, rel=1e-17, patience=10, block=32, jcap=None):
    """sum_j gamma_j^k over a window grown outward from j = k.

    Each side stops once ``patience`` consecutive terms fall below ``rel``
    times the running sum. Returns (sum, j_lo, j_hi).
    """
    jcap = jcap or 50 * (k + 10)
    centre = k
    total = 0.0
    pieces = []
    lo, hi = centre, centre - 1
    quiet_lo = quiet_hi = 0
    done_lo = done_hi = False
    while not (done_lo and done_hi):
        if not done_hi:
            js = np.arange(hi + 1, hi + 1 + block)
            vals = np.exp(_log_gamma_block(js, k, sp))
            pieces.append((int(js[0]), vals))
            total += float(np.sum(vals))
            for v in vals:
                quiet_hi = quiet_hi + 1 if v < rel * total else 0
            hi = int(js[-1])
            if quiet_hi >= patience:
                done_hi = True
            elif hi > jcap:
                raise SeriesDivergenceError(f"sum over j for k = {k} has not settled by j = {hi}")
        if not done_lo:
            if lo == 0:
                done_lo = True
                continue
            start = max(0, lo - block)
            js = np.arange(start, lo)
            vals = np.exp(_log_gamma_block(js, k, sp))
            pieces.append((start, vals))
            total += float(np.sum(vals))
            for v in vals[::-1]:
                quiet_lo = quiet_lo + 1 if v < rel * total else 0
            lo = start
            if quiet_lo >= patience:
                done_lo = True
    pieces.sort(key=lambda t: t[0])
    ordered = math.fsum(float(x) for _, v in pieces for x in v)
    return ordered, lo, hi


# ---------------------------------------------------------------------------
# the weighted Hermite series Sigma(k, u)


def _product_row(k, jmax, theta, kappa):
    """Integrals of h_j h_k exp(-y^2 - theta (y - kappa)^2) for j = 0..jmax."""
    lam2 = theta / (1.0 + theta)
    lam = math.sqrt(lam2)
    top = max(jmax, k)
    table = hermite_normalized_table(top, lam * kappa)
    lf = _LF(top)
    out = np.empty(jmax + 1)
    pref = math.sqrt(math.pi / (1.0 + theta)) * math.exp(-lam2 * kappa * kappa)
    for j in range(jmax + 1):
        ls = np.arange(min(j, k) + 1)
        logs = (0.5 * (lf[j] - lf[ls] - lf[j - ls] + lf[k] - lf[ls] - lf[k - ls])
                - ls * math.log(theta) + (j + k) * math.log(lam))
        m = logs.max()
        out[j] = pref * math.exp(m) * float(np.sum(np.exp(logs - m) * table[j - ls] * table[k - ls]))
    return out


def _log_A(k, theta):
    lf = _LF(k)
    ls = np.arange(k + 1)
    return float(logsumexp(0.5 * (lf[k] - lf[ls] - lf[k - ls]) - ls * math.log(theta)))


@dataclass
class SigmaResult:
    value: float
    terms: int
    tail: float


def sigma_series(k, u, sp, rel_tail=1e-12, jmax=20000):
    """Sigma(k, u): weighted absolute Hermite-Gauss integrals summed over j.

    Term j is |int h_j h_k exp(-y^2 - theta_bar (y + shift u)^2)| divided by
    p(j)^{1/n} (1+j)^{b - 1/n}, p(0) = 1, p(j) = j. Summation stops when ten
    consecutive terms are below 1e-16 of the partial sum and the geometric
    majorant of the remainder, from |h_m(x)| <= exp(x^2/2), is below
    ``rel_tail`` of it.
    """
    if u not in (0, 1):
        raise DomainError("u must be 0 or 1")
    th = sp.theta_bar
    lam = sp.lam
    r = math.sqrt(2.0) * lam
    if not r < 1.0:
        raise SeriesDivergenceError("sqrt(2) lambda >= 1: no geometric majorant")
    kappa = -sp.shift * u
    log_major = 0.5 * math.log(math.pi / (1.0 + th)) + k * math.log(lam) + _log_A(k, th)
    ex = sp.b - 1.0 / sp.n
    J = max(64, 2 * k + 64)
    while True:
        row = np.abs(_product_row(k, J, th, kappa))
        js = np.arange(J + 1)
        p = np.where(js == 0, 1.0, js.astype(float))
        terms = row / (p ** (1.0 / sp.n) * (1.0 + js) ** ex)
        total = math.fsum(terms)
        tail = math.exp(log_major + (J + 1) * math.log(r)) / (1.0 - r)
        quiet = np.all(terms[-10:] < 1e-16 * total) if total > 0 else True
        if quiet and tail < rel_tail * total:
            return SigmaResult(total, J + 1, tail)
        if J >= jmax:
            raise SeriesDivergenceError(f"Sigma({k}, {u}) not converged by j = {J}: tail bound {tail:.3e}, "
                                        f"partial sum {total:.3e}")
        J = min(jmax, 2 * J)


# ---------------------------------------------------------------------------
# limsup experiments


@dataclass
class LimsupReport:
    exponent: float
    b: float
    theta_bar: float
    k_max: int
    ks: list
    scaled: list
    sup: float
    argsup: int
    last_decade_max: float
    early_max: float
    last_decade_slope: float
    bounded: bool
    label: str

    def summary(self):
        d = asdict(self)
        d.pop("ks")
        d.pop("scaled")
        return d

    def csv(self):
        return limsup_csv(self)


_SUMS = {}


def gamma_sums(sp, k_max):
    """sum_j gamma_j^k for k = 0..k_max (memoized on theta_bar, b)."""
    key = (sp.theta_bar, sp.b)
    have = _SUMS.setdefault(key, [])
    for k in range(len(have), k_max + 1):
        have.append(sum_gamma(k, sp)[0])
    return have[:k_max + 1]


def _scaled_sums(sp, k_max, exponent):
    ks = list(range(k_max + 1))
    sums = gamma_sums(sp, k_max)
    return ks, [(1.0 + k) ** exponent * s for k, s in zip(ks, sums)]


def _report(sp, k_max, exponent, label):
    ks, scaled = _scaled_sums(sp, k_max, exponent)
    arr = np.asarray(scaled)
    cut = int(math.floor(0.9 * k_max))
    early = float(arr[:cut].max()) if cut > 0 else float(arr[0])
    last = float(arr[cut:].max())
    tail_k = np.asarray(ks[cut:], float)
    slope = float(np.polyfit(np.log1p(tail_k), np.log(arr[cut:]), 1)[0]) if len(tail_k) > 2 else float("nan")
    return LimsupReport(exponent, sp.b, sp.theta_bar, k_max, ks, scaled, float(arr.max()),
                        int(arr.argmax()), last, early, slope, bool(last <= early), label)


def verify_limsup(sp, k_max):
    """Scaled sums (1+k)^{b-1/2} sum_j gamma_j^k for k = 0..k_max.

    ``bounded`` is true when the maximum over the last tenth of the k range
    does not exceed the maximum over the first nine tenths.
    """
    if not sp.admissible:
        raise DomainError(f"theta_bar = {sp.theta_bar} must be < sqrt(5) - 2")
    return _report(sp, k_max, sp.b - 0.5, "proven bound")


def verify_conjecture(sp, n, k_max):
    """Same experiment with exponent b - 1/n; the verdict is evidence only."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return _report(sp, k_max, sp.b - 1.0 / n, "numerical evidence (not a proof)")


def limsup_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "scaled_sum", "exponent", "bound_estimate"])
    for k, v in zip(report.ks, report.scaled):
        w.writerow([k, f"{v:.17g}", f"{report.exponent:.17g}",
                    f"{report.sup / (1.0 + k) ** report.exponent:.17g}"])
    return buf.getvalue()


def report_json(reports, extra=None):
    d = {"reports": [r.summary() for r in reports]}
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def smallest_passing_b(theta_bar, bs, k_max):
    """Smallest b in ``bs`` whose limsup experiment reports bounded, else None."""
    for b in sorted(bs):
        if verify_limsup(SeriesParams(theta_bar, b), k_max).bounded:
            return b
    return None


# ---------------------------------------------------------------------------
# binomial inequality and the three-part decomposition


def _log_gen_binom(x, l):
    return math.lgamma(x + 1.0) - math.lgamma(l + 1.0) - math.lgamma(x - l + 1.0)


def binom_inequality(j, k, l):
    """binom(j, l) binom(k, l) <= binom((j+k)/2, l)^2.

    Exact integers when j + k is even; otherwise the generalized binomial in
    the log domain with 1e-12 slack.
    """
    if min(j, k, l) < 0 or l > min(j, k):
        raise DomainError("requires 0 <= l <= min(j, k)")
    if (j + k) % 2 == 0:
        return math.comb(j, l) * math.comb(k, l) <= math.comb((j + k) // 2, l) ** 2
    lhs = math.log(math.comb(j, l)) + math.log(math.comb(k, l))
    return lhs <= 2.0 * _log_gen_binom(0.5 * (j + k), l) + 1e-12


def jensen_slack(j, k, sp):
    """(rhs - lhs) / rhs for the Cauchy-Schwarz step over l < min(j, k).

    Returned relative to the right side so that large j, k do not overflow.
    """
    m = min(j, k)
    if m < 1:
        return 0.0
    ls = np.arange(m)
    lf = _LF(max(j, k))
    loga = (0.5 * (lf[j] - lf[ls] - lf[j - ls] + lf[k] - lf[ls] - lf[k - ls])
            - ls * math.log(sp.theta_bar))
    top = loga.max()
    a = np.exp(loga - top)
    lhs = float(np.sum(a / ((k - ls) ** 0.25 * (j - ls) ** 0.25)))
    rhs = math.sqrt(float(np.sum(a)) * float(np.sum(a / np.sqrt((k - ls) * (j - ls)))))
    return (rhs - lhs) / rhs


@dataclass
class PartBounds:
    k: int
    part_i: float
    part_ii: float
    part_iii: float
    total: float
    geometric_rate: float
    tail_ii: float


def proof_part_bounds(sp, k, rel=1e-16):
    """Sums of gamma_j^k over j <= k/2, j >= 3k/2 and the band between.

    The outer part j >= 3k/2 is summed until its geometric majorant
    lam^k A_k (sqrt 2 lam)^j (1+j)^{-b} falls below ``rel`` of the total.
    """
    if not sp.admissible:
        raise DomainError(f"theta_bar = {sp.theta_bar} must be < sqrt(5) - 2")
    half = k // 2
    lo_edge = math.ceil(1.5 * k)
    low = np.exp(_log_gamma_block(np.arange(half + 1), k, sp)) if k >= 0 else np.zeros(0)
    mid_js = np.arange(half + 1, lo_edge)
    mid = np.exp(_log_gamma_block(mid_js, k, sp)) if len(mid_js) else np.zeros(0)
    r = math.sqrt(2.0) * sp.lam
    log_major = k * math.log(sp.lam) + _log_A(k, sp.theta_bar)
    high = []
    j = lo_edge
    running = math.fsum(low) + math.fsum(mid)
    while True:
        js = np.arange(j, j + 64)
        vals = np.exp(_log_gamma_block(js, k, sp))
        high.extend(vals.tolist())
        running += float(np.sum(vals))
        j += 64
        tail = math.exp(log_major + j * math.log(r) - sp.b * math.log1p(j)) / (1.0 - r)
        if tail < rel * running:
            break
        if j > 100 * (k + 10):
            raise SeriesDivergenceError(f"outer part for k = {k} has not settled")
    p1, p3, p2 = math.fsum(low), math.fsum(mid), math.fsum(high)
    return PartBounds(k, p1, p2, p3, math.fsum([p1, p2, p3]), sp.rate, tail)


def geometric_domination(sp, ks, fit_ks):
    """Fit C = max part/q^k over ``fit_ks`` and test part <= C q^k on ``ks``.

    Returns a dict with the fitted constants and per-part verdicts.
    """
    q = sp.rate
    parts = {k: proof_part_bounds(sp, k) for k in sorted(set(ks) | set(fit_ks))}
    out = {"rate": q}
    for name in ("part_i", "part_ii"):
        C = max(getattr(parts[k], name) / q ** k for k in fit_ks)
        ratios = [getattr(parts[k], name) / (C * q ** k) for k in ks]
        out[name] = {"C": C, "max_ratio": max(ratios), "holds": bool(max(ratios) <= 1.0 + 1e-9)}
    return out


def middle_band_constant(sp, ks):
    """max over k/2 < j < 3k/2 of gamma_j^k (1+k)^{b+1/2}, per k."""
    out = {}
    for k in ks:
        js = np.arange(k // 2 + 1, math.ceil(1.5 * k))
        if len(js) == 0:
            continue
        vals = np.exp(_log_gamma_block(js, k, sp))
        out[k] = float(vals.max() * (1.0 + k) ** (sp.b + 0.5))
    return out
