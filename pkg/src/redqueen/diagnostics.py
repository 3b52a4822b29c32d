"""Regime detection and pulse fitting from simulated trajectories."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import interpn

from .errors import (CircleFitDegenerateError, DegenerateMassError, InsufficientSamplesError,
                     UndefinedDelayError)

REGIMES = ("ring-diffusing", "ring-stationary", "linear-pulse", "rotating-pulse", "undetermined")


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds for :func:`classify`.

    ``window`` is the trailing fraction of the run used for fitting.
    ``min_displacement`` is the smallest distance the host mean must travel
    across the window before a linear pulse is declared.
    """

    window: float = 0.4
    linear_r2: float = 0.99
    profile_residual: float = 0.05
    circle_r2: float = 0.99
    radius_drift: float = 0.02
    omega_drift: float = 0.05
    ring_score: float = 0.5
    min_displacement: float = 0.05

    def as_dict(self):
        return asdict(self)


@dataclass
class LinearFit:
    c: float
    direction: np.ndarray
    r2: float


@dataclass
class CircleFit:
    center: np.ndarray
    radius: float
    omega: float
    r2: float
    phase_span: float


@dataclass
class PulseReport:
    """Fitted pulse quantities and the regime verdict."""

    regime: str
    c_fit: float = float("nan")
    direction: list = field(default_factory=list)
    delay_fit: float = float("nan")
    radius_fit: float = float("nan")
    omega_fit: float = float("nan")
    r2: float = 0.0
    profile_residual: float = float("nan")
    circle_r2: float = float("nan")
    radius_drift: float = float("nan")
    omega_drift: float = float("nan")
    ring_score: float = float("nan")
    spread_ratio: float = float("nan")
    window: list = field(default_factory=list)

    def as_dict(self):
        def clean(v):
            if isinstance(v, float):
                return v if math.isfinite(v) else None
            if isinstance(v, (list, tuple, np.ndarray)):
                return [clean(float(x)) for x in v]
            return v
        return {k: clean(v) for k, v in asdict(self).items()}


def _window_mask(t, window):
    t = np.asarray(t)
    if window is None:
        window = 0.4
    if np.isscalar(window):
        t0 = t[-1] - window * (t[-1] - t[0])
        return t >= t0
    lo, hi = window
    return (t >= lo) & (t <= hi)


def fit_linear_speed(traj, window=None, min_samples=10):
    """Total-least-squares line through the host-mean samples in ``window``.

    ``window`` is a trailing fraction of the run or a ``(t0, t1)`` pair.
    Returns the speed along the fitted direction (oriented so that it is
    nonnegative), the unit direction, and the fraction of the sample
    variance explained by the line.
    """
    mask = _window_mask(traj.t, window)
    t = np.asarray(traj.t)[mask]
    x = np.asarray(traj.xbar)[mask]
    if len(t) < min_samples:
        raise InsufficientSamplesError(f"{len(t)} samples in window, need {min_samples}")
    xc = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    total = float(np.sum(s * s))
    n = x.shape[1]
    if total == 0.0:
        d = np.zeros(n)
        d[0] = 1.0
        return LinearFit(0.0, d, 0.0)
    d = vt[0]
    proj = xc @ d
    tc = t - t.mean()
    slope = float(np.sum(tc * proj) / np.sum(tc * tc))
    if slope < 0:
        d, slope = -d, -slope
    return LinearFit(slope, d, float(s[0] ** 2 / total))


def fit_delay(traj, c_fit, direction, offset=None, window=None):
    """Mean of (xbar - ybar - offset) . direction / c over the window."""
    if abs(c_fit) < 1e-6:
        raise UndefinedDelayError(f"speed {c_fit:.3e} is below 1e-6")
    mask = _window_mask(traj.t, window)
    x = np.asarray(traj.xbar)[mask]
    y = np.asarray(traj.ybar)[mask]
    off = np.zeros(x.shape[1]) if offset is None else np.asarray(offset, float)
    return float(np.mean((x - y - off) @ np.asarray(direction)) / c_fit)


def fit_circle(traj, window=None, min_samples=20):
    """Algebraic (Kasa) circle fit and angular-velocity regression."""
    mask = _window_mask(traj.t, window)
    t = np.asarray(traj.t)[mask]
    p = np.asarray(traj.xbar)[mask]
    if len(t) < min_samples:
        raise InsufficientSamplesError(f"{len(t)} samples in window, need {min_samples}")
    if p.shape[1] != 2:
        raise CircleFitDegenerateError("circle fits need planar trajectories")
    pc = p - p.mean(axis=0)
    sv = np.linalg.svd(pc, compute_uv=False)
    if sv[0] == 0.0 or sv[1] / sv[0] < 1e-6:
        raise CircleFitDegenerateError("samples are collinear")
    a = np.column_stack([2.0 * p, np.ones(len(p))])
    b = np.sum(p * p, axis=1)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    center = sol[:2]
    radius = math.sqrt(max(sol[2] + float(center @ center), 0.0))
    d = np.linalg.norm(p - center, axis=1)
    ss_res = float(np.sum((d - radius) ** 2))
    ss_tot = float(np.sum(pc * pc))
    r2 = max(0.0, 1.0 - ss_res / ss_tot)
    phase = np.unwrap(np.arctan2(p[:, 1] - center[1], p[:, 0] - center[0]))
    tc = t - t.mean()
    omega = float(np.sum(tc * (phase - phase.mean())) / np.sum(tc * tc))
    return CircleFit(center, radius, omega, r2, float(abs(phase[-1] - phase[0])))


def _interp(field_, pts):
    g = field_.grid
    return interpn(tuple(g.axes), field_.values, pts, method="linear",
                   bounds_error=False, fill_value=0.0)


def ring_score(f):
    """1 - f(mean)/max f: near 0 for a blob, near 1 when the mean sits in a hole."""
    w = f.grid.weights()
    mass = float(np.sum(w * f.values))
    if not mass > 0:
        raise DegenerateMassError(f"field mass {mass:.3e}")
    mean = np.array([float(np.sum(np.sum(w * f.values, axis=tuple(j for j in range(f.grid.n) if j != i))
                                  * f.grid.axis(i))) for i in range(f.grid.n)]) / mass
    top = float(np.max(f.values))
    val = float(_interp(f, mean[None, :])[0])
    return 1.0 - val / top


def spread(f):
    """Root mean squared distance of the mass from its mean."""
    g = f.grid
    w = g.weights() * f.values
    mass = float(np.sum(w))
    if not mass > 0:
        raise DegenerateMassError(f"field mass {mass:.3e}")
    pts = g.points()
    mean = np.array([float(np.sum(w * pts[..., i])) for i in range(g.n)]) / mass
    return math.sqrt(float(np.sum(w * np.sum((pts - mean) ** 2, axis=-1))) / mass)


def _mean(f, mass):
    g = f.grid
    w = g.weights() * f.values
    return np.array([float(np.sum(w * g.axis(i).reshape(_axis_shape(g.n, i)))) for i in range(g.n)]) / mass


def _axis_shape(n, i):
    shape = [1] * n
    shape[i] = -1
    return tuple(shape)


def profile_constancy(snapshots, c_fit=None, direction=None):
    """Mean L1 distance between consecutive mass-normalized host profiles.

    Each earlier profile is translated (linear interpolation) before
    comparison with the next one: by ``c_fit * dt`` along ``direction`` when
    both are given, otherwise by the displacement of the host mean between
    the two snapshots, which tolerates a slowly turning direction of travel.
    """
    if len(snapshots) < 2:
        raise InsufficientSamplesError("profile constancy needs at least two snapshots")
    out = []
    for a, b in zip(snapshots[:-1], snapshots[1:]):
        fa, fb = a.h, b.h
        wa, wb = fa.grid.weights(), fb.grid.weights()
        ma, mb = float(np.sum(wa * fa.values)), float(np.sum(wb * fb.values))
        if not (ma > 0 and mb > 0):
            raise DegenerateMassError("snapshot with nonpositive host mass")
        if c_fit is None or direction is None:
            shift = _mean(fb, mb) - _mean(fa, ma)
        else:
            shift = c_fit * (b.t - a.t) * np.asarray(direction, float)
        pts = fb.grid.points() - shift
        moved = _interp(fa, pts.reshape(-1, fb.grid.n)).reshape(fb.grid.shape) / ma
        out.append(float(np.sum(wb * np.abs(fb.values / mb - moved))))
    return float(np.mean(out))


def classify(traj, snapshots=None, thresholds=None, offset=None):
    """Label the regime of a completed run and populate every fitted quantity."""
    th = thresholds or Thresholds()
    snapshots = list(traj.snapshots if snapshots is None else snapshots)
    t = np.asarray(traj.t)
    rep = PulseReport(regime="undetermined")
    if len(t) < 2:
        return rep
    t0 = t[-1] - th.window * (t[-1] - t[0])
    rep.window = [float(t0), float(t[-1])]
    late = [s for s in snapshots if s.t >= t0 - 1e-9]

    try:
        lin = fit_linear_speed(traj, th.window)
        rep.c_fit, rep.direction, rep.r2 = lin.c, list(lin.direction), lin.r2
    except InsufficientSamplesError:
        lin = None
    if lin is not None and len(late) >= 2:
        try:
            rep.profile_residual = profile_constancy(late)
        except (InsufficientSamplesError, DegenerateMassError):
            pass
    if lin is not None and lin.c >= 1e-6:
        rep.delay_fit = fit_delay(traj, lin.c, lin.direction, offset, th.window)

    if np.asarray(traj.xbar).shape[1] == 2:
        try:
            full = fit_circle(traj, th.window)
            mid = 0.5 * (t0 + t[-1])
            first = fit_circle(traj, (t0, mid))
            second = fit_circle(traj, (mid, t[-1]))
            rep.radius_fit, rep.omega_fit, rep.circle_r2 = full.radius, full.omega, full.r2
            rep.radius_drift = abs(second.radius - first.radius) / (0.5 * (first.radius + second.radius))
            om = 0.5 * (abs(first.omega) + abs(second.omega))
            rep.omega_drift = abs(second.omega - first.omega) / om if om > 0 else float("inf")
            circle_span = full.phase_span
        except (CircleFitDegenerateError, InsufficientSamplesError):
            circle_span = 0.0
    else:
        circle_span = 0.0

    if snapshots:
        try:
            rep.ring_score = ring_score(snapshots[-1].h)
            if len(snapshots) >= 2:
                ref = late[0] if len(late) >= 2 else snapshots[-2]
                rep.spread_ratio = spread(snapshots[-1].h) / spread(ref.h)
        except DegenerateMassError:
            pass

    window_len = t[-1] - t0
    if rep.ring_score > th.ring_score:
        rep.regime = "ring-diffusing" if rep.spread_ratio > 1.0 + th.radius_drift else "ring-stationary"
    elif (lin is not None and lin.r2 >= th.linear_r2 and lin.c * window_len >= th.min_displacement
            and rep.profile_residual < th.profile_residual):
        rep.regime = "linear-pulse"
    elif (rep.circle_r2 >= th.circle_r2 and rep.radius_drift < th.radius_drift
          and rep.omega_drift < th.omega_drift and circle_span >= math.pi):
        rep.regime = "rotating-pulse"
    return rep
