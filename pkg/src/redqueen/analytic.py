"""Closed-form and semi-analytic solutions of the host-pathogen system.

Stationary states (beta = 0) come from a principal-eigenvalue root find;
pursuit pulses (alpha_H = 0, beta > 0) are described through their
explicit pathogen profile, delay and mass relation, plus the spectral
inversion of the operator linearized around the unperturbed host profile.
Spectral quantities use the eigenbasis Gamma_k of :mod:`redqueen.hermite`
with ``mu = mu_H`` and the pursuit direction along the first axis.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import linalg as splinalg

from .errors import (BracketError, ConvergenceUnsafeError, DomainError, NoStationaryStateError,
                     PulseInfeasibleError, SeriesDivergenceError)
from .hermite import (HermiteContext, MultiIndex, as_index, first_moment_wik, gamma_k,
                      hermite_gauss_product_normalized, moment_mk, multi_indices)
from .pde import Field, Grid, _bcast, _laplacian_array
from .quadrature import gauss_hermite_grid

# ---------------------------------------------------------------------------
# closed-form profiles


@dataclass(frozen=True)
class GaussianProfile:
    """Isotropic Gaussian probability density with given center and per-axis variance."""

    center: tuple
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if not self.variance > 0:
            raise DomainError("variance must be > 0")

    @property
    def n(self):
        return len(self.center)

    @property
    def mass(self):
        return 1.0

    @property
    def peak(self):
        return (2.0 * math.pi * self.variance) ** (-0.5 * self.n)

    def evaluate(self, w):
        w = np.asarray(w, dtype=float)
        d2 = np.sum((w - np.asarray(self.center)) ** 2, axis=-1)
        return self.peak * np.exp(-0.5 * d2 / self.variance)

    def on_grid(self, grid):
        return Field(grid, self.evaluate(grid.points()))

    def as_dict(self):
        return {"kind": "gaussian", "center": list(self.center), "variance": self.variance,
                "mass": 1.0}


@dataclass(frozen=True)
class PursuitPsi:
    """Pathogen profile of a pursuit pulse in the frame of the host mean.

    ``psi(w) = K exp(-c w.u / (2 mu_P^2)) exp(-alpha_P |w - (c tau - ell) u|^2 / (2 mu_P))``
    with ``tau = 1 / (2 mu_P alpha_P)``. Completing the square shows this is
    the Gaussian of center ``-ell u`` and per-axis variance ``mu_P / alpha_P``.
    """

    c: float
    tau: float
    ell: float
    u: tuple
    mu_P: float
    alpha_P: float

    @property
    def n(self):
        return len(self.u)

    @property
    def log_K(self):
        mu, a, c = self.mu_P, self.alpha_P, self.c
        return -(0.5 * self.n * math.log(2.0 * math.pi * mu / a)
                 - (c * self.tau - self.ell) * c / (2.0 * mu * mu)
                 + c * c / (8.0 * a * mu ** 3))

    @property
    def K(self):
        return math.exp(self.log_K)

    @property
    def gaussian(self):
        return GaussianProfile(tuple(-self.ell * v for v in self.u), self.mu_P / self.alpha_P)

    def evaluate(self, w):
        w = np.asarray(w, dtype=float)
        u = np.asarray(self.u)
        mu, a = self.mu_P, self.alpha_P
        centre = (self.c * self.tau - self.ell) * u
        expo = (-self.c * (w @ u) / (2.0 * mu * mu)
                - a * np.sum((w - centre) ** 2, axis=-1) / (2.0 * mu))
        return np.exp(self.log_K + expo)

    def as_dict(self):
        return {"kind": "pursuit-psi", "c": self.c, "tau": self.tau, "ell": self.ell,
                "u": list(self.u), "K": self.K, "center": list(self.gaussian.center),
                "variance": self.gaussian.variance}


def stationary_exists(params):
    """True iff R_P > n mu_P alpha_P and R_H > n mu_H alpha_H."""
    n = params.n
    return params.R_P > n * params.mu_P * params.alpha_P and params.R_H > n * params.mu_H * params.alpha_H


def _require_stationary(params):
    if not stationary_exists(params):
        raise NoStationaryStateError(
            f"requires R_P > n mu_P alpha_P ({params.R_P} vs {params.n * params.mu_P * params.alpha_P:.6g})"
            f" and R_H > n mu_H alpha_H ({params.R_H} vs {params.n * params.mu_H * params.alpha_H:.6g})")


def psi_stationary(params):
    """Normalized principal eigenfunction of -mu_P^2 Laplacian + alpha_P^2 |y|^2."""
    _require_stationary(params)
    if not params.alpha_P > 0:
        raise NoStationaryStateError("alpha_P = 0 gives no normalizable pathogen profile")
    return GaussianProfile((0.0,) * params.n, params.mu_P / params.alpha_P)


def H_of_P(P, params, kappa=None):
    """Host mass forced by the pathogen equation: gamma_P P / (R_P - n mu_P alpha_P)."""
    if kappa is None:
        kappa = params.R_P - params.n * params.mu_P * params.alpha_P
    if not kappa > 0:
        raise NoStationaryStateError(f"R_P - n mu_P alpha_P = {kappa:.6g} must be > 0")
    return params.gamma_P * P / kappa


# ---------------------------------------------------------------------------
# stationary state


def _laplacian_matrix(grid):
    ops = []
    for h, m in zip(grid.dx, grid.m):
        ops.append(sparse.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1],
                                format="csr") / (h * h))
    if grid.n == 1:
        return ops[0].tocsc()
    i0 = sparse.identity(grid.m[0], format="csr")
    i1 = sparse.identity(grid.m[1], format="csr")
    return (sparse.kron(ops[0], i1) + sparse.kron(i0, ops[1])).tocsc()


def _radius2(grid):
    return sum(_bcast(a * a, i, grid.n) for i, a in enumerate(grid.axes)) * np.ones(grid.shape)


def _top_eigenpair(mu2, potential, grid, seed):
    """Largest eigenpair of mu2 * (discrete Laplacian) + diag(potential)."""
    a = mu2 * _laplacian_matrix(grid) + sparse.diags(potential.ravel())
    shift = float(np.max(potential)) + 1e-3 * (1.0 + abs(float(np.max(potential))))
    vals, vecs = splinalg.eigsh(a.tocsc(), k=1, sigma=shift, which="LM", v0=seed.ravel(), tol=0.0)
    vec = vecs[:, 0].reshape(grid.shape)
    if np.sum(vec) < 0:
        vec = -vec
    return float(vals[0]), vec


def default_stationary_grid(params, m=256):
    """Box of half-width seven host standard deviations (at least six pathogen ones)."""
    stds = [math.sqrt(params.mu_P / params.alpha_P)] if params.alpha_P > 0 else []
    if params.alpha_H > 0:
        stds.append(math.sqrt(params.mu_H / params.alpha_H))
    hw = max([7.0 * s for s in stds] + [4.0])
    return Grid.box(params.n, hw, m)


def _host_potential(P, H, params, r2):
    return (params.R_H - params.gamma_H * H - params.alpha_H ** 2 * r2
            - P * params.rho_max * np.exp(-params.theta * r2))


def _seed(params, grid, r2):
    a = params.alpha_H if params.alpha_H > 0 else 1.0
    return np.exp(-a * r2 / (2.0 * params.mu_H))


def lambda_P(P, params, grid=None, m=256, return_vector=False, kappa=None):
    """Principal eigenvalue of the host operator at pathogen mass ``P``.

    The operator is discretized with the solver's Laplacian (zero ghosts) on
    ``grid`` and the top eigenpair is obtained by shift-invert Lanczos seeded
    with the P = 0 Gaussian. ``kappa`` replaces R_P - n mu_P alpha_P in H(P).
    """
    if P < 0:
        raise DomainError("P must be >= 0")
    H = H_of_P(P, params, kappa)
    grid = grid or default_stationary_grid(params, m)
    r2 = _radius2(grid)
    lam, vec = _top_eigenpair(params.mu_H2, _host_potential(P, H, params, r2), grid,
                              _seed(params, grid, r2))
    return (lam, vec) if return_vector else lam


@dataclass
class StationaryState:
    """Stationary solution (H phi, P psi) on a grid.

    ``pathogen`` is ``"analytic"`` when psi is the closed-form Gaussian and
    H = H(P), or ``"discrete"`` when psi is the grid eigenvector and H uses
    the grid eigenvalue in place of -n mu_P alpha_P.
    """

    H: float
    P: float
    phi: Field
    psi: object
    lam: float
    pathogen: str = "analytic"
    kappa: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.phi.grid

    def psi_field(self):
        return self.psi if isinstance(self.psi, Field) else self.psi.on_grid(self.grid)

    def as_dict(self):
        psi = self.psi.as_dict() if hasattr(self.psi, "as_dict") else {"kind": "grid"}
        return {"H": self.H, "P": self.P, "lambda_P": self.lam, "pathogen": self.pathogen,
                "kappa": self.kappa, "grid": self.grid.as_dict(), "psi": psi,
                "diagnostics": dict(self.diagnostics)}


def _pathogen_discrete(params, grid):
    r2 = _radius2(grid)
    lam, vec = _top_eigenpair(params.mu_P2, -params.alpha_P ** 2 * r2, grid,
                              np.exp(-params.alpha_P * r2 / (2.0 * params.mu_P)))
    vec = vec / float(np.sum(grid.weights() * vec))
    return lam, vec


def solve_stationary(params, grid=None, m=256, pathogen="analytic", tol=1e-8, max_doublings=60):
    """Stationary state: the unique P with lambda_P = 0, found by bracketing and Brent's method."""
    _require_stationary(params)
    if not params.alpha_P > 0:
        raise NoStationaryStateError("alpha_P = 0 gives no normalizable pathogen profile")
    grid = grid or default_stationary_grid(params, m)
    if pathogen == "analytic":
        kappa = params.R_P - params.n * params.mu_P * params.alpha_P
        psi = psi_stationary(params)
    elif pathogen == "discrete":
        lam_p, psi_vals = _pathogen_discrete(params, grid)
        kappa = params.R_P + lam_p
        if not kappa > 0:
            raise NoStationaryStateError(f"grid pathogen eigenvalue leaves R_P + lambda = {kappa:.6g}")
        psi = Field(grid, psi_vals)
    else:
        raise DomainError(f"pathogen must be 'analytic' or 'discrete', got {pathogen!r}")

    def f(P):
        return lambda_P(P, params, grid, kappa=kappa)

    lam0 = f(0.0)
    if not lam0 > 0:
        raise NoStationaryStateError(f"lambda_0 = {lam0:.6g} on the grid is not positive")
    hi = max(1.0, params.R_H * kappa / (params.gamma_H * params.gamma_P))
    lam_hi = f(hi)
    doublings = 0
    while lam_hi >= 0:
        doublings += 1
        if doublings > max_doublings:
            raise BracketError(f"lambda_P still {lam_hi:.6g} >= 0 at P = {hi:.6g}")
        hi *= 2.0
        lam_hi = f(hi)
    P = optimize.brentq(f, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    lam, vec = lambda_P(P, params, grid, return_vector=True, kappa=kappa)
    if abs(lam) >= tol:
        raise BracketError(f"root refinement stopped at |lambda_P| = {abs(lam):.3e}")
    vec = vec / float(np.sum(grid.weights() * vec))
    H = H_of_P(P, params, kappa)
    return StationaryState(H, P, Field(grid, vec), psi, lam, pathogen, kappa,
                           {"bracket_hi": hi, "lambda_0": lam0})


def _laplacian4_array(values, dx):
    """Fourth-order central Laplacian with zero values beyond the box."""
    out = np.zeros_like(values)
    for i, h in enumerate(dx):
        v = np.moveaxis(values, i, 0)
        o = np.moveaxis(out, i, 0)
        pad = np.zeros((v.shape[0] + 4,) + v.shape[1:])
        pad[2:-2] = v
        o += (-pad[:-4] + 16.0 * pad[1:-3] - 30.0 * pad[2:-2] + 16.0 * pad[3:-1] - pad[4:]) / (12.0 * h * h)
    return out


def stationary_residual(state, params):
    """Sup norm of the host profile equation evaluated with a fourth-order Laplacian.

    The profile solves the second-order discretization, so the value
    measures the discretization error and decays like dx^2.
    """
    g = state.grid
    phi = state.phi.values
    pot = _host_potential(state.P, state.H, params, _radius2(g))
    res = params.mu_H2 * _laplacian4_array(phi, g.dx) + pot * phi
    return float(np.max(np.abs(res)))


def full_residual(state, params):
    """Sup norms of the solver right-hand side at (H phi, P psi)."""
    from .pde import SimState, rhs_full
    s = SimState(0.0, Field(state.grid, state.H * state.phi.values),
                 Field(state.grid, state.P * state.psi_field().values))
    dh, dp = rhs_full(s, params)
    return float(np.max(np.abs(dh.values))), float(np.max(np.abs(dp.values)))


def radial_asymmetry(f):
    """Relative sup difference between a planar field and its 90 degree rotation."""
    v = f.values
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DomainError("radial check needs a square planar grid")
    return float(np.max(np.abs(v - np.rot90(v))) / np.max(np.abs(v)))


# ---------------------------------------------------------------------------
# pursuit pulse


def tau(params):
    """Delay 1 / (2 mu_P alpha_P)."""
    if not params.alpha_P > 0:
        raise DomainError("the delay requires alpha_P > 0")
    return 1.0 / (2.0 * params.mu_P * params.alpha_P)


def pursuit_psi(c, params):
    return PursuitPsi(float(c), tau(params), params.ell, tuple(params.u_vec), params.mu_P,
                      params.alpha_P)


def relation3_P(c, H, params):
    """Pathogen mass P = H (R_P - n mu_P alpha_P - c^2 / (4 mu_P^2)) / gamma_P."""
    if not H > 0:
        raise DomainError("H must be > 0")
    drive = params.R_P - params.n * params.mu_P * params.alpha_P - c * c / (4.0 * params.mu_P2)
    P = H * drive / params.gamma_P
    if not P > 0:
        raise PulseInfeasibleError(f"speed {c:.6g} leaves no positive pathogen mass (P = {P:.6g})")
    return P


def unperturbed_host(params):
    """(c0, phi0, H0) for rho_max = 0: c0 = 0, Gaussian of variance mu_H/beta, H0."""
    if not params.beta > 0:
        raise PulseInfeasibleError("the unperturbed pulse requires beta > 0")
    H0 = (params.R_H - params.n * params.mu_H * params.beta) / params.gamma_H
    if not H0 > 0:
        raise PulseInfeasibleError(f"R_H = {params.R_H} must exceed n mu_H beta "
                                   f"= {params.n * params.mu_H * params.beta:.6g}")
    return 0.0, GaussianProfile((0.0,) * params.n, params.mu_H / params.beta), H0


@dataclass
class PursuitPulse:
    c: float
    tau: float
    H: float
    P: float
    phi: object
    psi: PursuitPsi

    def as_dict(self):
        phi = self.phi.as_dict() if hasattr(self.phi, "as_dict") else {"kind": "coefficients"}
        return {"c": self.c, "tau": self.tau, "H": self.H, "P": self.P, "phi": phi,
                "psi": self.psi.as_dict()}


def pursuit_pulse(c, H, phi, params):
    """Assemble a pulse from (c, H, phi): the delay, P and psi follow in closed form."""
    return PursuitPulse(float(c), tau(params), float(H), relation3_P(c, H, params), phi,
                        pursuit_psi(c, params))


def unperturbed_pulse(params):
    c0, phi0, H0 = unperturbed_host(params)
    return pursuit_pulse(c0, H0, phi0, params)


# ---------------------------------------------------------------------------
# linearized operator around the unperturbed pulse


def _context(params):
    if not params.beta > 0:
        raise DomainError("the spectral basis requires beta > 0")
    return HermiteContext(params.mu_H, params.beta, params.n)


def _phi0_factor(ctx):
    """a with phi0 = a Gamma_0."""
    return (ctx.beta / (4.0 * math.pi * ctx.mu)) ** (0.25 * ctx.n)


def _unit(n):
    return MultiIndex((1,) + (0,) * (n - 1))


@dataclass
class LinearizedSolution:
    """Output of :func:`linearized_inverse`; ``tail`` bounds the truncated series."""

    c: float
    phi: dict
    eta: float
    tail: float = 0.0


def _shell_source(f, n, kmax):
    if isinstance(f, Mapping):
        items = {}
        for k, v in f.items():
            k = as_index(k)
            if k.n != n:
                raise DomainError(f"multi-index {tuple(k)} does not have length {n}")
            v = float(v)
            if not math.isfinite(v):
                raise DomainError("coefficients must be finite")
            if v != 0.0:
                items[k] = v
        top = max((k.sigma for k in items), default=0)
        shells = [[] for _ in range(top + 1)]
        for k in sorted(items, key=lambda k: (k.sigma, tuple(k))):
            shells[k.sigma].append((k, items[k]))
        return shells, True
    shells = []
    for s in range(kmax + 1):
        shells.append([(k, float(f(k))) for k in multi_indices(n, s, s)])
    return shells, False


def linearized_inverse(f, h, r, params, kmax=None, tol=1e-12):
    """Solve L(c, phi, eta) = (f, h, r) in Gamma_k coordinates.

    ``f`` is a sparse map multi-index -> coefficient or a callable of the
    multi-index; callables are summed shell by shell up to ``kmax`` and must
    decay so that the last shells fall below ``tol`` relative to the sums.
    """
    ctx = _context(params)
    n, mu, beta = ctx.n, ctx.mu, ctx.beta
    kmax = (200 if n == 1 else 80) if kmax is None else kmax
    shells, finite = _shell_source(f, n, kmax)
    a = _phi0_factor(ctx)
    u = _unit(n)
    zero = MultiIndex((0,) * n)

    f0 = dict(shells[0]).get(zero, 0.0) if shells else 0.0
    eta = -f0 * (4.0 * math.pi * mu / beta) ** (0.25 * n) / params.gamma_H

    c_sum = 0.0
    phi = {}
    shell_mag = []
    for s, shell in enumerate(shells):
        mag = 0.0
        for k, fk in shell:
            if s == 0:
                continue
            if k[0] % 2 == 1 and all(v % 2 == 0 for v in tuple(k)[1:]):
                term = first_moment_wik(0, k, ctx) * fk / s
                c_sum += term
                mag += abs(term)
            if k != u:
                phi[k] = -fk / (2.0 * mu * beta * s)
            mag += abs(fk)
        shell_mag.append(mag)
    tail = 0.0
    if not finite:
        total = sum(shell_mag)
        last = shell_mag[-1] + shell_mag[-2]
        prev = shell_mag[-3] + shell_mag[-4]
        ratio = math.sqrt(last / prev) if prev > 0 else 0.0
        if last > tol * max(1.0, total) or ratio >= 1.0:
            raise SeriesDivergenceError(f"coefficient shells do not decay by sigma = {kmax}: "
                                        f"last shell magnitude {last:.3e}")
        tail = last * ratio / (1.0 - ratio) if last > 0 else 0.0
    c = -2.0 * beta * mu * r - c_sum
    fu = next((v for k, v in (shells[1] if len(shells) > 1 else []) if k == u), 0.0)
    phi[u] = -fu / (2.0 * mu * beta) - c / (2.0 * mu) / math.sqrt(2.0 * mu * beta) * a
    mass = sum(v * moment_mk(k, ctx) for k, v in sorted(phi.items(), key=lambda t: (t[0].sigma, tuple(t[0]))))
    phi[zero] = (h - mass) / moment_mk(zero, ctx)
    phi = {k: phi[k] for k in sorted(phi, key=lambda k: (k.sigma, tuple(k)))}
    return LinearizedSolution(c, phi, eta, tail)


def _apply_ladder_laplacian(coeffs, ctx):
    """Gamma_k coefficients of the Laplacian via the ladder relations."""
    s2 = ctx.beta / ctx.mu
    out = {}
    for k, v in coeffs.items():
        for i in range(ctx.n):
            ki = k[i]
            terms = [(k.bumped(i, 2), math.sqrt((ki + 1) * (ki + 2)) / 2.0), (k, -(2 * ki + 1) / 2.0)]
            if ki >= 2:
                terms.append((k.bumped(i, -2), math.sqrt(ki * (ki - 1)) / 2.0))
            for kk, w in terms:
                out[kk] = out.get(kk, 0.0) + s2 * w * v
    return out


def _evaluate_series(coeffs, z, ctx):
    total = np.zeros(z.shape[:-1])
    for k, v in coeffs.items():
        total = total + v * gamma_k(k, z, ctx)
    return total


def apply_linearized(c, phi, eta, params, sigma_out=None, order=None):
    """Forward map (c, phi, eta) -> (f, h, r), projected by Gauss-Hermite quadrature.

    The profile equation is evaluated pointwise; the Laplacian uses the
    ladder relations, not the eigenvalue identity the inverse relies on.
    """
    ctx = _context(params)
    n, mu, beta = ctx.n, ctx.mu, ctx.beta
    phi = {as_index(k): float(v) for k, v in phi.items()}
    top = max((k.sigma for k in phi), default=0)
    sigma_out = top + 2 if sigma_out is None else sigma_out
    order = order or max(24, top + sigma_out + 8)
    s2 = beta / mu
    a = _phi0_factor(ctx)
    zero = MultiIndex((0,) * n)
    H0 = (params.R_H - n * mu * beta) / params.gamma_H

    pts, wts = gauss_hermite_grid(n, s2, order)
    lap = _evaluate_series(_apply_ladder_laplacian(phi, ctx), pts, ctx)
    val = _evaluate_series(phi, pts, ctx)
    g0 = gamma_k(zero, pts, ctx)
    r2 = np.sum(pts * pts, axis=-1)
    res = (mu * mu * lap + (params.R_H - params.gamma_H * H0 - beta * beta * r2) * val
           - (c * beta / mu) * pts[..., 0] * a * g0 - params.gamma_H * eta * a * g0)
    f = {}
    for k in multi_indices(n, sigma_out):
        f[k] = float(np.sum(wts * res * gamma_k(k, pts, ctx)))
    pts2, wts2 = gauss_hermite_grid(n, 0.5 * s2, order)
    val2 = _evaluate_series(phi, pts2, ctx)
    h = float(np.sum(wts2 * val2))
    r = float(np.sum(wts2 * val2 * pts2[..., 0]))
    return f, h, r


# ---------------------------------------------------------------------------
# first-order response in rho_max


def pursuit_conditions(params):
    """The parameter conditions of the pursuit existence result, by name."""
    n, mu, th = params.n, params.mu_H, params.theta
    return {
        "R_P > n mu_P alpha_P": params.R_P > n * params.mu_P * params.alpha_P,
        "R_H > n mu_H beta": params.R_H > n * mu * params.beta,
        "beta > max(3 2^(n-2) - 1, 1/(sqrt 5 - 2)) mu_H theta":
            params.beta > max(3.0 * 2.0 ** (n - 2) - 1.0, 1.0 / (math.sqrt(5.0) - 2.0)) * mu * th,
        "alpha_H = 0": params.alpha_H == 0.0,
        "theta > 0": th > 0,
        "alpha_P > 0": params.alpha_P > 0,
    }


@dataclass
class FirstOrderResponse:
    dc_deps: float
    deta_deps: float
    tail: float
    kmax: int
    conditions: dict

    def as_dict(self):
        return {"dc_deps": self.dc_deps, "deta_deps": self.deta_deps, "tail": self.tail,
                "kmax": self.kmax, "conditions": dict(self.conditions)}


def response_source(params):
    """Gamma_k coefficients of the first-order forcing P0 phi0 exp(-theta |z + ell u|^2).

    Returned as a callable of the multi-index, with u along the first axis.
    """
    ctx = _context(params)
    n, mu, beta = ctx.n, ctx.mu, ctx.beta
    M = ((params.R_H - n * mu * beta) * (params.R_P - n * params.mu_P * params.alpha_P)
         / (params.gamma_H * params.gamma_P))
    th_bar = mu * params.theta / beta
    ell_bar = math.sqrt(beta / mu) * params.ell
    pref = M * _phi0_factor(ctx) * math.pi ** (-0.5 * n)
    cache = {}

    def factor(axis, k):
        key = (axis == 0, k)
        if key not in cache:
            kappa = -ell_bar if axis == 0 else 0.0
            cache[key] = hermite_gauss_product_normalized(k, 0, th_bar, kappa)
        return cache[key]

    def fk(k):
        k = as_index(k)
        out = pref
        for i, v in enumerate(k):
            out *= factor(i, v)
        return out

    return fk, M


def first_order_response(params, strict=True, tol=1e-15, kmax=None):
    """(dc/deps, deta/deps) at eps = rho_max = 0.

    deta/deps is the closed form; dc/deps sums the first-moment series over
    odd-class indices up to sigma = kmax with a rigorous geometric tail bound
    from |h_k(x)| <= exp(x^2/2).
    """
    conds = pursuit_conditions(params)
    if strict and not all(conds.values()):
        bad = [k for k, v in conds.items() if not v]
        raise PulseInfeasibleError("pursuit conditions violated: " + "; ".join(bad))
    if not (params.beta > 0 and params.theta > 0 and params.alpha_P > 0):
        raise PulseInfeasibleError("requires beta, theta, alpha_P > 0")
    ctx = _context(params)
    n, mu, beta = ctx.n, ctx.mu, ctx.beta
    if not params.R_H > n * mu * beta:
        raise PulseInfeasibleError("requires R_H > n mu_H beta")
    fk, M = response_source(params)
    deta = (-(M / params.gamma_H) * (beta / (beta + mu * params.theta)) ** (0.5 * n)
            * math.exp(-beta * params.theta * params.ell ** 2 / (beta + mu * params.theta)))

    th_bar = mu * params.theta / beta
    lam = math.sqrt(th_bar / (1.0 + th_bar))
    ell_bar = math.sqrt(beta / mu) * params.ell
    lam2 = th_bar / (1.0 + th_bar)
    F = (abs(M) * _phi0_factor(ctx) * math.pi ** (-0.5 * n) * (math.pi / (1.0 + th_bar)) ** (0.5 * n)
         * math.exp(-0.5 * lam2 * ell_bar ** 2))
    W = 2.0 * math.sqrt(mu / beta) * (math.pi * mu / beta) ** (0.25 * n) * 2.0 ** (0.5 * n)

    def tail_after(K):
        return W * F * lam ** (K + 1) / (1.0 - lam)

    if kmax is None:
        kmax = 1
        while tail_after(kmax) > tol * max(1.0, abs(deta)) and kmax < 4000:
            kmax += 1
    total = 0.0
    for s in range(1, kmax + 1, 2):
        for k in multi_indices(n, s, s):
            if k[0] % 2 == 1 and all(v % 2 == 0 for v in tuple(k)[1:]):
                total += first_moment_wik(0, k, ctx) * fk(k) / s
    return FirstOrderResponse(-total, deta, tail_after(kmax), kmax, conds)


# ---------------------------------------------------------------------------
# alpha_0 and the cube claim


@dataclass
class SeriesValue:
    value: float
    tail: float
    terms: int


def lambda_bar(params):
    """sqrt(theta_bar / (1 + theta_bar)) with theta_bar = mu_H theta / beta."""
    th = params.mu_H * params.theta / params.beta
    return math.sqrt(th / (1.0 + th))


def _log_g(j, lam):
    j = tuple(int(v) for v in j)
    s = sum(j)
    out = (-math.log(2 * s + 1) + math.lgamma(2 * j[0] + 2) - 2.0 * math.lgamma(j[0] + 1)
           + (2 * j[0] + 1) * math.log(lam / 2.0))
    for v in j[1:]:
        out += -math.lgamma(v + 1) + v * math.log(lam * lam / 4.0)
    return out


def claim_g(j, lam):
    """The positive term g(j) of the alternating sum alpha_0."""
    return math.exp(_log_g(j, lam))


def claim_S(j, lam):
    """Sum of g(j + k) over k in {0,1}^n with an odd number of ones."""
    n = len(j)
    total = 0.0
    for bits in range(1, 2 ** n):
        k = [(bits >> i) & 1 for i in range(n)]
        if sum(k) % 2:
            total += claim_g([a + b for a, b in zip(j, k)], lam)
    return total


def claim_margins(n, lam, sigma_max):
    """Map j -> g(j) - S(j) for every j with sigma(j) <= sigma_max."""
    return {tuple(j): claim_g(tuple(j), lam) - claim_S(tuple(j), lam)
            for j in multi_indices(n, sigma_max)}


def alpha0(n, lam, strict=True, tol=1e-16, max_terms=100000):
    """Alternating sum of (-1)^sigma(j) g(j) over j in N^n.

    Shell sums are closed form (the other axes collapse through the
    multinomial theorem). The tail after shell K is bounded by
    (lam/2) e^{(n-1)/4} lam^{2(K+1)} / (1 - lam^2).
    """
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be >= 1")
    if strict and n >= 2 and not 3.0 * 2.0 ** (n - 2) * lam * lam < 1.0:
        raise ConvergenceUnsafeError(f"3 2^(n-2) lambda^2 = {3.0 * 2.0 ** (n - 2) * lam * lam:.6g} >= 1")
    base = 0.5 * lam * math.exp(0.25 * (n - 1)) / (1.0 - lam * lam)

    def tail_after(K):
        return base * lam ** (2 * (K + 1))

    K = 0
    while tail_after(K) > tol * 0.5 * lam and K < max_terms:
        K += 1
    total = 0.0
    for s in range(K + 1):
        logs = []
        for j1 in range(s + 1):
            m = s - j1
            lt = (math.lgamma(2 * j1 + 2) - 2.0 * math.lgamma(j1 + 1) + (2 * j1 + 1) * math.log(lam / 2.0)
                  - math.lgamma(m + 1) + m * math.log(lam * lam / 4.0))
            if m and n > 1:
                lt += m * math.log(n - 1)
            elif m and n == 1:
                continue
            logs.append(lt)
        if not logs:
            continue
        top = max(logs)
        shell = math.exp(top) * sum(math.exp(v - top) for v in logs) / (2 * s + 1)
        total += -shell if s % 2 else shell
    return SeriesValue(total, tail_after(K), K + 1)


# ---------------------------------------------------------------------------
# export


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(obj):
    """Deterministic JSON text of any descriptor with an ``as_dict`` method."""
    d = obj.as_dict() if hasattr(obj, "as_dict") else obj
    return json.dumps(_jsonable(d), indent=2, sort_keys=True) + "\n"
