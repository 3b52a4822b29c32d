"""Method-of-lines solver for the nonlocal host-pathogen system.

Space is discretized on a uniform box with the five-point (per axis)
Laplacian and zero ghost values outside the box; time is advanced with
classical RK4. The nonlocal quantities H, P, xbar, ybar are recomputed from
the stage fields at every Runge-Kutta stage.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMassError, DomainError, InstabilityError
from .integrators import rk4_step

NEG_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on a box.

    ``offset`` counts whole cells by which the box has been translated (the
    comoving frame); node ``j`` on axis ``i`` sits at
    ``lo[i] + (offset[i] + j) * dx[i]``.
    """

    n: int
    lo: tuple
    hi: tuple
    m: tuple
    offset: tuple = None

    def __post_init__(self):
        lo = tuple(float(v) for v in np.broadcast_to(self.lo, (self.n,)))
        hi = tuple(float(v) for v in np.broadcast_to(self.hi, (self.n,)))
        m = tuple(int(v) for v in np.broadcast_to(self.m, (self.n,)))
        off = (0,) * self.n if self.offset is None else tuple(int(v) for v in self.offset)
        if self.n not in (1, 2):
            raise DomainError(f"grids support n = 1 or 2, got {self.n}")
        if any(not a < b for a, b in zip(lo, hi)):
            raise DomainError("grid requires lo < hi on every axis")
        if any(v < 16 for v in m):
            raise DomainError("grid requires at least 16 points per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "offset", off)

    @classmethod
    def box(cls, n, half_width, m, center=None):
        c = np.zeros(n) if center is None else np.broadcast_to(np.asarray(center, float), (n,))
        hw = np.broadcast_to(np.asarray(half_width, float), (n,))
        return cls(n, tuple(c - hw), tuple(c + hw), m)

    @property
    def dx(self):
        return tuple((b - a) / (k - 1) for a, b, k in zip(self.lo, self.hi, self.m))

    @property
    def shape(self):
        return self.m

    def axis(self, i):
        return self.lo[i] + (self.offset[i] + np.arange(self.m[i])) * self.dx[i]

    @property
    def axes(self):
        return [self.axis(i) for i in range(self.n)]

    @property
    def center(self):
        return np.array([0.5 * (a[0] + a[-1]) for a in self.axes])

    @property
    def corner_radius(self):
        """Distance from the box center to a corner."""
        return 0.5 * math.sqrt(sum((b - a) ** 2 for a, b in zip(self.lo, self.hi)))

    def weights(self):
        """Tensor trapezoid weights."""
        w = None
        for i in range(self.n):
            wi = np.full(self.m[i], self.dx[i])
            wi[0] = wi[-1] = 0.5 * self.dx[i]
            w = wi if w is None else np.multiply.outer(w, wi)
        return w

    def points(self):
        """Node coordinates, shape ``m + (n,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def shifted(self, cells):
        return Grid(self.n, self.lo, self.hi, self.m,
                    tuple(o + int(c) for o, c in zip(self.offset, cells)))

    def as_dict(self):
        return {"n": self.n, "lo": list(self.lo), "hi": list(self.hi), "m": list(self.m),
                "offset": list(self.offset), "dx": list(self.dx)}


def _bcast(v, i, n):
    shape = [1] * n
    shape[i] = -1
    return np.reshape(v, shape)


@dataclass
class Field:
    """Density values on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise DomainError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")


def _mass(values, w):
    return float(np.sum(w * values))


def _moments(values, grid, w):
    wf = w * values
    mass = float(np.sum(wf))
    first = []
    for i in range(grid.n):
        other = tuple(a for a in range(grid.n) if a != i)
        marginal = np.sum(wf, axis=other) if other else wf
        first.append(float(np.sum(marginal * grid.axis(i))))
    return mass, np.array(first)


def quadrature_mass(f):
    """Trapezoid-rule integral of a field over its box."""
    return _mass(f.values, f.grid.weights())


def quadrature_mean(f):
    """Mass-normalized first moment of a field."""
    mass, first = _moments(f.values, f.grid, f.grid.weights())
    if not mass > 0:
        raise DegenerateMassError(f"mean of a field with mass {mass:.3e} is undefined")
    return first / mass


def _laplacian_array(values, dx):
    out = np.zeros_like(values)
    for i, h in enumerate(dx):
        v = np.moveaxis(values, i, 0)
        o = np.moveaxis(out, i, 0)
        lap = -2.0 * v
        lap[1:] += v[:-1]
        lap[:-1] += v[1:]
        o += lap / (h * h)
    return out


def laplacian(f):
    """Second-order central Laplacian with zero ghost values outside the box."""
    return Field(f.grid, _laplacian_array(f.values, f.grid.dx))


@dataclass(frozen=True)
class SimState:
    """Host and pathogen densities at time ``t`` with derived totals and means."""

    t: float
    h: Field
    p: Field
    H: float = field(init=False)
    P: float = field(init=False)
    xbar: np.ndarray = field(init=False)
    ybar: np.ndarray = field(init=False)

    def __post_init__(self):
        w = self.h.grid.weights()
        H, xs = _moments(self.h.values, self.h.grid, w)
        P, ys = _moments(self.p.values, self.p.grid, self.p.grid.weights())
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "xbar", xs / H if H > 0 else np.full(self.h.grid.n, np.nan))
        object.__setattr__(self, "ybar", ys / P if P > 0 else np.full(self.p.grid.n, np.nan))

    @property
    def grid(self):
        return self.h.grid


class _Geometry:
    """Cached per-grid arrays used by the right-hand side."""

    def __init__(self, grid):
        self.grid = grid
        self.n = grid.n
        self.dx = grid.dx
        self.w = grid.weights()
        self.axes = grid.axes

    def moments(self, values):
        wf = self.w * values
        mass = float(np.sum(wf))
        first = np.empty(self.n)
        for i in range(self.n):
            other = tuple(a for a in range(self.n) if a != i)
            marginal = np.sum(wf, axis=other) if other else wf
            first[i] = float(np.sum(marginal * self.axes[i]))
        return mass, first


def _rhs_arrays(y, geo, params, t=None):
    h, p = y[0], y[1]
    n = geo.n
    H, hx = geo.moments(h)
    if not H > 0:
        if not np.any(h) and not np.any(p):
            return np.zeros_like(y)
        raise DegenerateMassError(f"host mass is {H:.3e}", t)
    P, py = geo.moments(p)
    xbar = hx / H
    ybar = py / P if P != 0 else np.zeros(n)

    quad_h = 0.0
    quad_p = 0.0
    kern = 1.0
    shift = params.ell * params.u_vec
    for i, a in enumerate(geo.axes):
        quad_h = quad_h + _bcast(params.alpha_H ** 2 * a * a + params.beta ** 2 * (a - xbar[i]) ** 2, i, n)
        quad_p = quad_p + _bcast(params.alpha_P ** 2 * (a + shift[i] - xbar[i]) ** 2, i, n)
        kern = kern * _bcast(np.exp(-params.theta * (a - ybar[i]) ** 2), i, n)

    growth_h = (params.R_H - params.gamma_H * H) - quad_h - (P * params.rho_max) * kern
    growth_p = (params.R_P - params.gamma_P * P / H) - quad_p
    out = np.empty_like(y)
    out[0] = params.mu_H2 * _laplacian_array(h, geo.dx) + growth_h * h
    out[1] = params.mu_P2 * _laplacian_array(p, geo.dx) + growth_p * p
    return out


def rhs_full(s, params):
    """Time derivatives (dh/dt, dp/dt) of the full system at state ``s``."""
    geo = _Geometry(s.grid)
    d = _rhs_arrays(np.stack([s.h.values, s.p.values]), geo, params, s.t)
    return Field(s.grid, d[0]), Field(s.grid, d[1])


def _check_negativity(y, t):
    for idx, name in ((0, "h"), (1, "p")):
        v = y[idx]
        top = float(np.max(v))
        low = float(np.min(v))
        if low < -NEG_TOL * max(top, 0.0) or not np.isfinite(low) or not np.isfinite(top):
            raise InstabilityError(name, low, t)


def step_rk4(s, dt, params):
    """One RK4 step with nonlocal terms recomputed at every stage."""
    geo = _Geometry(s.grid)
    y = np.stack([s.h.values, s.p.values])
    y = rk4_step(lambda t, v: _rhs_arrays(v, geo, params, t), s.t, y, dt)
    _check_negativity(y, s.t + dt)
    return SimState(s.t + dt, Field(s.grid, y[0]), Field(s.grid, y[1]))


def stable_dt(grid, params, H_bound, P_bound, mean_radius=None, safety=0.4):
    """Largest admissible explicit step on ``grid``.

    Combines the diffusive limit ``safety dx^2 / (2 n mu_max^2)``, the
    reaction-resolution cap ``0.1 / max(R_H, R_P)`` and a stiffness cap from
    the magnitude of the reaction coefficients on the box. The last one
    keeps ``dt (4 n mu_max^2 / dx^2 + a_max)`` inside the RK4 stability
    interval; ``mean_radius`` bounds the distance between the box center and
    the means (defaults to the corner radius, i.e. anywhere in the box).
    """
    mu2 = max(params.mu_H2, params.mu_P2)
    dx2 = min(h * h for h in grid.dx)
    diff = safety * dx2 / (2 * grid.n * mu2)
    react = 0.1 / max(params.R_H, params.R_P)
    r = grid.corner_radius
    rm = r if mean_radius is None else mean_radius
    c = float(np.linalg.norm(grid.center))
    a_h = (params.gamma_H * H_bound + params.alpha_H ** 2 * (c + r) ** 2
           + params.beta ** 2 * (r + rm) ** 2 + params.rho_max * P_bound)
    a_p = params.R_P + params.alpha_P ** 2 * (r + rm + params.ell) ** 2
    stiff = 2.5 / (4 * grid.n * mu2 / dx2 + max(a_h, a_p))
    return min(diff, react, stiff)


def gaussian_blob(grid, mass, center, std):
    """Isotropic Gaussian on ``grid`` rescaled to quadrature mass ``mass``."""
    center = np.broadcast_to(np.asarray(center, float), (grid.n,))
    q = sum(_bcast((a - center[i]) ** 2, i, grid.n) for i, a in enumerate(grid.axes))
    v = np.exp(-q / (2.0 * std * std)) * np.ones(grid.shape)
    total = _mass(v, grid.weights())
    if mass == 0:
        return np.zeros(grid.shape)
    if not total > 0:
        raise DomainError("initial blob has no mass on the grid; enlarge the box")
    return v * (mass / total)


@dataclass
class Trajectory:
    """Per-step summaries plus scheduled snapshots of a run."""

    t: np.ndarray
    xbar: np.ndarray
    ybar: np.ndarray = None
    H: np.ndarray = None
    P: np.ndarray = None
    snapshots: list = field(default_factory=list)
    dt: float = float("nan")
    grid: Grid = None
    frame_shift: tuple = ()
    steps: int = 0

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.xbar = np.asarray(self.xbar, dtype=float).reshape(len(self.t), -1)
        if self.ybar is not None:
            self.ybar = np.asarray(self.ybar, dtype=float).reshape(len(self.t), -1)
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")

    def window(self, frac=0.4):
        """Boolean mask of the last ``frac`` of the time span."""
        t0 = self.t[-1] - frac * (self.t[-1] - self.t[0])
        return self.t >= t0

    @property
    def final(self):
        return self.snapshots[-1] if self.snapshots else None


def run(state, params, t_end, dt, snapshot_times=(), comoving=False, record_every=1):
    """Integrate ``state`` to ``t_end`` with constant step (<= ``dt``).

    The step is shrunk so that an integer number of steps reaches ``t_end``.
    Snapshots are taken at the first step at or after each requested time;
    a final snapshot is always stored.
    """
    n_steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > state.t else 0
    h_step = (t_end - state.t) / n_steps if n_steps else 0.0
    grid = state.grid
    geo = _Geometry(grid)
    y = np.stack([state.h.values, state.p.values])
    t0 = state.t
    snaps = sorted(float(s) for s in snapshot_times if s <= t_end)
    snap_out = []
    si = 0
    total_shift = np.zeros(grid.n, dtype=int)

    def record(y, t, store):
        H, hx = geo.moments(y[0])
        P, py = geo.moments(y[1])
        store[0].append(t)
        store[1].append(H)
        store[2].append(P)
        store[3].append(hx / H if H > 0 else np.full(grid.n, np.nan))
        store[4].append(py / P if P > 0 else np.full(grid.n, np.nan))

    store = ([], [], [], [], [])
    record(y, t0, store)
    while si < len(snaps) and snaps[si] <= t0 + 1e-12:
        snap_out.append(SimState(t0, Field(grid, y[0].copy()), Field(grid, y[1].copy())))
        si += 1

    rhs = lambda t, v: _rhs_arrays(v, geo, params, t)  # noqa: E731
    for k in range(1, n_steps + 1):
        t_prev = t0 + (k - 1) * h_step
        y = rk4_step(rhs, t_prev, y, h_step)
        t = t_end if k == n_steps else t0 + k * h_step
        _check_negativity(y, t)
        if comoving:
            H, hx = geo.moments(y[0])
            if H > 0:
                cells = np.rint((hx / H - geo.grid.center) / np.array(grid.dx)).astype(int)
                if np.any(cells != 0):
                    y = _shift_fields(y, cells)
                    total_shift += cells
                    grid = grid.shifted(cells)
                    geo = _Geometry(grid)
                    rhs = lambda t, v, g=geo: _rhs_arrays(v, g, params, t)  # noqa: E731
        if k % record_every == 0 or k == n_steps:
            record(y, t, store)
        while si < len(snaps) and snaps[si] <= t + 1e-9 * h_step:
            snap_out.append(SimState(t, Field(grid, y[0].copy()), Field(grid, y[1].copy())))
            si += 1
    final = SimState(t_end if n_steps else t0, Field(grid, y[0].copy()), Field(grid, y[1].copy()))
    if not snap_out or snap_out[-1].t != final.t:
        snap_out.append(final)
    return Trajectory(
        t=np.array(store[0]), H=np.array(store[1]), P=np.array(store[2]),
        xbar=np.array(store[3]).reshape(-1, grid.n), ybar=np.array(store[4]).reshape(-1, grid.n),
        snapshots=snap_out, dt=h_step, grid=state.grid, frame_shift=tuple(int(c) for c in total_shift),
        steps=n_steps,
    )


def _shift_fields(y, cells):
    """Translate both fields by whole cells (content moves by -cells), zero fill."""
    out = y
    for i, c in enumerate(cells):
        if c == 0:
            continue
        ax = i + 1
        out = np.roll(out, -c, axis=ax)
        idx = [slice(None)] * out.ndim
        idx[ax] = slice(out.shape[ax] - c, None) if c > 0 else slice(0, -c)
        out[tuple(idx)] = 0.0
    return out


def initial_state(config):
    """Gaussian initial blobs of ``config`` on its grid."""
    grid = config.grid()
    h0 = gaussian_blob(grid, config.host.mass, config.host.center, config.host.std)
    p0 = gaussian_blob(grid, config.pathogen.mass, config.pathogen.center, config.pathogen.std)
    return SimState(0.0, Field(grid, h0), Field(grid, p0))


def config_dt(config, grid=None):
    """Step used for ``config``: the configured one, or :func:`stable_dt`."""
    if config.dt is not None:
        return config.dt
    grid = grid or config.grid()
    p = config.params
    h_bound = max(config.host.mass, p.R_H / p.gamma_H if p.gamma_H > 0 else config.host.mass)
    p_bound = max(config.pathogen.mass, p.R_P * h_bound / p.gamma_P if p.gamma_P > 0 else 0.0)
    mean_radius = math.sqrt(grid.n) * max(grid.dx) if config.frame == "comoving" else None
    return stable_dt(grid, p, h_bound, p_bound, mean_radius)


def simulate(config):
    """Run the configured experiment and return its :class:`Trajectory`."""
    state = initial_state(config)
    dt = config_dt(config, state.grid)
    return run(state, config.params, config.t_end, dt, config.snapshots,
               comoving=config.frame == "comoving", record_every=config.record_every)
