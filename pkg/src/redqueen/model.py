"""Model constants, fitness and impact functions, and the demographic ODE."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .integrators import integrate


@dataclass(frozen=True)
class ModelParams:
    """All constants of the host-pathogen model.

    Mutation intensities are stored squared, as they appear in the
    diffusion terms. ``u`` is normalized on construction.

    Attributes
    ----------
    n : int
        Phenotype dimension (1 or 2).
    mu_H2, mu_P2 : float
        Squared mutation intensities of host and pathogen.
    R_H, R_P : float
        Maximal fitnesses.
    gamma_H, gamma_P : float
        Competition constants.
    rho_max : float
        Maximal impact of a unit pathogen mass on the host.
    theta : float
        Inverse squared width of the impact kernel.
    alpha_H, alpha_P : float
        Selection strengths towards the respective optima.
    beta : float
        Concerted-evolution strength of the host.
    ell : float
        Offset between the host mean and the pathogen optimum.
    u : tuple of float
        Direction of the offset.
    """

    n: int = 2
    mu_H2: float = 0.1
    mu_P2: float = 0.1
    R_H: float = 4.0
    R_P: float = 1.0
    gamma_H: float = 1.0
    gamma_P: float = 0.01
    rho_max: float = 0.1
    theta: float = 1.0
    alpha_H: float = 0.0
    alpha_P: float = 1.0
    beta: float = 0.0
    ell: float = 0.0
    u: tuple = field(default=None)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise DomainError(f"n must be 1 or 2, got {self.n}")
        u = (1.0,) + (0.0,) * (self.n - 1) if self.u is None else tuple(float(v) for v in self.u)
        if len(u) != self.n:
            raise DomainError(f"u has {len(u)} components, expected n={self.n}")
        norm = math.sqrt(sum(v * v for v in u))
        if not norm > 0 or not math.isfinite(norm):
            raise DomainError("u must be a nonzero finite vector")
        object.__setattr__(self, "u", tuple(v / norm for v in u))
        for name in ("mu_H2", "mu_P2"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        for name in ("R_H", "R_P", "gamma_H", "gamma_P", "theta", "alpha_P",
                     "rho_max", "alpha_H", "beta", "ell"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")

    @property
    def mu_H(self):
        return math.sqrt(self.mu_H2)

    @property
    def mu_P(self):
        return math.sqrt(self.mu_P2)

    @property
    def u_vec(self):
        return np.array(self.u)

    def with_(self, **changes):
        """Copy with some fields replaced."""
        return replace(self, **changes)

    def as_dict(self):
        return {
            "n": self.n, "mu_H2": self.mu_H2, "mu_P2": self.mu_P2,
            "R_H": self.R_H, "R_P": self.R_P, "gamma_H": self.gamma_H,
            "gamma_P": self.gamma_P, "rho_max": self.rho_max, "theta": self.theta,
            "alpha_H": self.alpha_H, "alpha_P": self.alpha_P, "beta": self.beta,
            "ell": self.ell, "u": list(self.u),
        }


@dataclass(frozen=True)
class OdeState:
    """Total masses of host (H) and pathogen (P)."""

    H: float
    P: float

    def __post_init__(self):
        if not (self.H > 0 and self.P > 0):
            raise DomainError(f"OdeState requires H > 0 and P > 0, got H={self.H}, P={self.P}")


def _sqnorm(v):
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=-1)


def fitness_host(x, xbar, params):
    """R_H - alpha_H^2 |x|^2 - beta^2 |x - xbar|^2.

    ``x`` may carry leading batch axes; the last axis is the phenotype.
    """
    x = np.asarray(x, dtype=float)
    return (params.R_H - params.alpha_H ** 2 * _sqnorm(x)
            - params.beta ** 2 * _sqnorm(x - np.asarray(xbar, dtype=float)))


def impact(x, ybar, params):
    """rho_max exp(-theta |x - ybar|^2)."""
    x = np.asarray(x, dtype=float)
    return params.rho_max * np.exp(-params.theta * _sqnorm(x - np.asarray(ybar, dtype=float)))


def fitness_pathogen(y, xbar, params):
    """R_P - alpha_P^2 |y + ell u - xbar|^2 (optimum at xbar - ell u)."""
    y = np.asarray(y, dtype=float)
    shift = params.ell * params.u_vec - np.asarray(xbar, dtype=float)
    return params.R_P - params.alpha_P ** 2 * _sqnorm(y + shift)


def ode_rhs(s, params):
    """Right-hand side of the demographic system.

    The growth rates are identified with the maximal fitnesses,
    r_H = R_H, r_P = R_P, and the impact constant with rho_max.
    """
    H, P = (s.H, s.P) if isinstance(s, OdeState) else s
    if not H > 0:
        raise DomainError(f"host mass must be positive, got H={H}")
    dH = params.R_H * H - params.gamma_H * H * H - params.rho_max * H * P
    dP = params.R_P * P - params.gamma_P * P * P / H
    return dH, dP


def ode_equilibrium(params):
    """Coexistence equilibrium (H_inf, P_inf) of the demographic system."""
    d = params.gamma_H * params.gamma_P + params.rho_max * params.R_P
    if not d > 0:
        raise DomainError("gamma_H gamma_P + rho r_P must be positive")
    return params.R_H * params.gamma_P / d, params.R_H * params.R_P / d


def integrate_ode(s0, params, t_end, dt=None):
    """RK4 integration of the demographic system.

    Returns ``(t, H, P)`` arrays. The default step is ``0.25`` over the
    largest per-capita rate present at the start or at equilibrium.
    """
    if dt is None:
        h_inf, p_inf = ode_equilibrium(params)
        rates = [params.R_H, params.R_P, params.gamma_H * s0.H, params.rho_max * s0.P,
                 params.gamma_P * s0.P / s0.H, params.gamma_P * p_inf / h_inf]
        dt = 0.25 / max(max(rates), 1e-12)

    def rhs(t, y):
        return np.array(ode_rhs((y[0], y[1]), params))

    t, y = integrate(rhs, [s0.H, s0.P], t_end, dt)
    return t, y[:, 0], y[:, 1]
