import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from redqueen import analytic as an
from redqueen.errors import (DomainError, NoStationaryStateError, PulseInfeasibleError,
                             SeriesDivergenceError, ConvergenceUnsafeError)
from redqueen.hermite import multi_indices
from redqueen.model import ModelParams
from redqueen.quadrature import alpha0_integral

PURSUIT = ModelParams(alpha_H=0.0, beta=1.0, ell=0.05)
STATIONARY = ModelParams(alpha_H=0.5, beta=0.0)


# ---------------------------------------------------------------------------
# profiles


def test_gaussian_profile():
    g = an.GaussianProfile((0.0, 0.0), 0.5)
    assert g.peak == pytest.approx(1 / math.pi)
    with pytest.raises(DomainError):
        an.GaussianProfile((0.0,), 0.0)


@settings(max_examples=30)
@given(st.floats(-1.0, 1.0), st.floats(0.0, 0.3))
def test_pursuit_psi_is_the_shifted_gaussian(c, ell):
    p = PURSUIT.with_(ell=ell)
    psi = an.pursuit_psi(c, p)
    w = np.array([[0.1, -0.3], [-0.5, 0.2], [1.0, 1.0]])
    np.testing.assert_allclose(psi.evaluate(w), psi.gaussian.evaluate(w), rtol=1e-10)
    assert psi.gaussian.center == pytest.approx((-ell, 0.0))


def test_stationary_existence_threshold():
    assert an.stationary_exists(STATIONARY)
    with pytest.raises(NoStationaryStateError):
        an.psi_stationary(STATIONARY.with_(R_P=0.5))
    with pytest.raises(NoStationaryStateError):
        an.H_of_P(1.0, STATIONARY, kappa=0.0)


def test_psi_stationary_peak():
    assert an.psi_stationary(STATIONARY).peak == pytest.approx(0.503292, abs=1e-6)


# ---------------------------------------------------------------------------
# stationary state


@pytest.fixture(scope="module")
def stationary():
    grid = an.default_stationary_grid(STATIONARY, 96)
    return an.solve_stationary(STATIONARY, grid)


def test_stationary_relations(stationary):
    p = STATIONARY
    assert p.R_P - p.gamma_P * stationary.P / stationary.H == pytest.approx(2 * p.mu_P * p.alpha_P, abs=1e-10)
    assert abs(stationary.lam) < 1e-6
    assert an.stationary_residual(stationary, p) < 1e-3
    assert an.radial_asymmetry(stationary.phi) < 1e-8
    json.loads(an.to_json(stationary))


def test_lambda_at_zero_pathogen():
    grid = an.default_stationary_grid(STATIONARY, 96)
    lam = an.lambda_P(0.0, STATIONARY, grid)
    assert lam == pytest.approx(STATIONARY.R_H - 2 * STATIONARY.mu_H * STATIONARY.alpha_H, abs=2e-3)


def test_discrete_pathogen_variant(stationary):
    grid = stationary.phi.grid
    disc = an.solve_stationary(STATIONARY, grid, pathogen="discrete")
    assert disc.P == pytest.approx(stationary.P, rel=1e-2)
    with pytest.raises(DomainError):
        an.solve_stationary(STATIONARY, grid, pathogen="other")


# ---------------------------------------------------------------------------
# pursuit pulse


def test_pursuit_constants():
    assert an.tau(PURSUIT) == pytest.approx(1.5811388300841898, rel=1e-14)
    c0, phi0, H0 = an.unperturbed_host(PURSUIT)
    assert c0 == 0.0 and H0 == pytest.approx(4 - 2 * math.sqrt(0.1))
    assert phi0.variance == pytest.approx(math.sqrt(0.1))
    pulse = an.unperturbed_pulse(PURSUIT)
    assert pulse.P == pytest.approx(H0 * (1 - 2 * math.sqrt(0.1)) / 0.01)


def test_relation3():
    assert an.relation3_P(0.1, 3.0, PURSUIT) == pytest.approx(3 * (1 - 2 * math.sqrt(0.1) - 0.025) / 0.01)
    with pytest.raises(PulseInfeasibleError):
        an.relation3_P(2.0, 3.0, PURSUIT)
    with pytest.raises(PulseInfeasibleError):
        an.unperturbed_host(PURSUIT.with_(beta=0.0))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.floats(0.5, 3.0), st.floats(0.05, 0.5), st.integers(0, 2 ** 31 - 1))
def test_linearized_round_trip(n, beta, mu2, seed):
    p = ModelParams(n=n, alpha_H=0.0, beta=beta, mu_H2=mu2, ell=0.05)
    rng = np.random.default_rng(seed)
    idx = multi_indices(n, 5)
    f = {idx[i]: float(rng.normal()) for i in rng.choice(len(idx), size=min(4, len(idx)), replace=False)}
    h, r = (float(v) for v in rng.normal(size=2))
    sol = an.linearized_inverse(f, h, r, p)
    fb, hb, rb = an.apply_linearized(sol.c, sol.phi, sol.eta, p)
    assert hb == pytest.approx(h, abs=1e-8) and rb == pytest.approx(r, abs=1e-8)
    for k in set(fb) | set(f):
        assert fb.get(k, 0.0) == pytest.approx(f.get(k, 0.0), abs=1e-8)


def test_linearized_rejects_growing_source():
    with pytest.raises(SeriesDivergenceError):
        an.linearized_inverse(lambda k: 1.0, 0.0, 0.0, PURSUIT, kmax=30)


def _mehler_dc_deps(p):
    """dc/deps from the Mehler kernel, independent of the Hermite series.

    1/sigma = int_0^1 t^(sigma-1) dt turns the eigen-sum into an integral of
    the oscillator kernel, whose x-integrals are Gaussian in closed form.
    """
    mu, beta, n = p.mu_H, p.beta, p.n
    s = math.sqrt(beta / mu)
    M = (p.R_H - n * mu * beta) * (p.R_P - n * p.mu_P * p.alpha_P) / (p.gamma_H * p.gamma_P)

    def axis(t, first):
        def f(y):
            j0 = math.sqrt(2 / (1 + t * t)) * math.exp(-y * y * (1 - t * t) / (2 * (1 + t * t)))
            j = 2 * t * y / (1 + t * t) * j0 if first else j0
            shift = p.ell if first else 0.0
            phi0 = math.sqrt(beta / (2 * math.pi * mu)) * math.exp(-0.5 * y * y)
            return phi0 * math.exp(-p.theta * (y / s + shift) ** 2) * j
        return integrate.quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]

    def G(t):
        if t == 0.0:
            return 0.0
        return s ** (-n - 1) * M * axis(t, True) * axis(t, False) ** (n - 1) / t

    return -integrate.quad(G, 0.0, 1.0, epsabs=0, epsrel=1e-11)[0]


@pytest.mark.parametrize("beta,ell", [(2.0, 0.05), (1.0, 0.05), (2.0, 0.2), (3.0, 0.1)])
def test_first_order_speed_against_mehler_oracle(beta, ell):
    p = PURSUIT.with_(beta=beta, ell=ell)
    resp = an.first_order_response(p, strict=False)
    assert resp.dc_deps == pytest.approx(_mehler_dc_deps(p), rel=1e-8)


def test_first_order_frozen_values():
    resp = an.first_order_response(PURSUIT.with_(beta=2.0))
    assert resp.dc_deps == pytest.approx(1.0867, abs=5e-5)
    assert resp.deta_deps == pytest.approx(-86.6149, abs=5e-4)
    assert resp.tail < 1e-12


def test_strict_conditions():
    with pytest.raises(PulseInfeasibleError):
        an.first_order_response(PURSUIT)
    assert an.first_order_response(PURSUIT, strict=False).dc_deps > 0
    assert an.first_order_response(PURSUIT.with_(beta=2.0, ell=0.0)).dc_deps == 0.0


# ---------------------------------------------------------------------------
# alternating series and the cube claim


@pytest.mark.parametrize("n,lam", [(1, 0.3), (1, 0.8), (2, 0.2), (2, 0.5), (3, 0.3)])
def test_alpha0_against_integral(n, lam):
    assert an.alpha0(n, lam, strict=False).value == pytest.approx(alpha0_integral(n, lam), abs=1e-13)


def test_alpha0_guard():
    with pytest.raises(ConvergenceUnsafeError):
        an.alpha0(2, 0.6)
    with pytest.raises(DomainError):
        an.alpha0(2, 1.0)


@pytest.mark.parametrize("lam2,holds", [(0.1, True), (0.3, True), (0.9, False)])
def test_cube_claim(lam2, holds):
    margins = an.claim_margins(2, math.sqrt(lam2), 10)
    assert (min(margins.values()) > 0) is holds
