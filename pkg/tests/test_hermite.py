import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redqueen.errors import DomainError
from redqueen.hermite import (HermiteContext, MultiIndex, eigenvalue, first_moment_wik, gamma_k,
                              gamma_k_derivative, gaussian_overlap_even, hermite,
                              hermite_gauss_product, hermite_gauss_product_centered,
                              hermite_gauss_product_normalized, hermite_normalized,
                              hermite_normalized_table, hermite_scale_shift, moment_mk, multi_indices)
from redqueen.quadrature import gauss_hermite_grid

CTX = HermiteContext(math.sqrt(0.1), 1.0, 2)


@pytest.mark.parametrize("k,x,val", [(0, 0.3, 1.0), (1, 0.3, 0.6), (2, 2.0, 14.0), (3, 1.0, -4.0),
                                     (4, 0.0, 12.0)])
def test_hermite_values(k, x, val):
    assert hermite(k, x) == pytest.approx(val)


def test_hermite_matches_numpy():
    x = np.linspace(-3, 3, 13)
    for k in range(12):
        np.testing.assert_allclose(hermite(k, x), np.polynomial.hermite.hermval(x, np.eye(k + 1)[k]),
                                   rtol=1e-12, atol=1e-12)


def test_normalized_table_consistent():
    x = np.linspace(-5, 5, 7)
    t = hermite_normalized_table(30, x, weighted=True)
    for k in (0, 7, 30):
        np.testing.assert_allclose(t[k], hermite_normalized(k, x, weighted=True), rtol=1e-13)
    np.testing.assert_allclose(t[10], hermite(10, x) * np.exp(-x * x / 2) / math.sqrt(2 ** 10 * math.factorial(10)),
                               rtol=1e-12)


def test_cramer_bound():
    x = np.linspace(-40, 40, 2001)
    assert np.abs(hermite_normalized_table(300, x, weighted=True)).max() <= 1.0 + 1e-12


def test_multi_indices_count_and_order():
    idx = multi_indices(2, 3)
    assert len(idx) == 10 and idx[0] == MultiIndex((0, 0))
    assert [k.sigma for k in idx] == sorted(k.sigma for k in idx)
    with pytest.raises(DomainError):
        MultiIndex((1, -1))


def test_orthonormality():
    idx = multi_indices(2, 6)
    pts, w = gauss_hermite_grid(2, CTX.beta / CTX.mu, 20)
    vals = np.array([gamma_k(k, pts, CTX).ravel() for k in idx])
    np.testing.assert_allclose((vals * w.ravel()) @ vals.T, np.eye(len(idx)), atol=1e-10)


def test_eigenvalue_and_dimension_checks():
    assert eigenvalue((1, 2), CTX) == pytest.approx(8 * CTX.mu * CTX.beta)
    with pytest.raises(DomainError):
        gamma_k((1,), np.zeros((1, 2)), CTX)
    with pytest.raises(DomainError):
        HermiteContext(0.0, 1.0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6), st.floats(0.2, 2.0), st.floats(0.2, 2.0))
def test_moments_against_quadrature(k1, k2, mu, beta):
    ctx = HermiteContext(mu, beta, 2)
    k = (k1, k2)
    pts, w = gauss_hermite_grid(2, 0.5 * beta / mu, 30)
    g = gamma_k(k, pts, ctx)
    assert float(np.sum(w * g)) == pytest.approx(moment_mk(k, ctx), abs=1e-10)
    assert float(np.sum(w * g * pts[..., 0])) == pytest.approx(first_moment_wik(0, k, ctx), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.floats(0.1, 3.0))
def test_even_overlap(k, theta):
    ctx = HermiteContext(0.7, 1.3, 1)
    pts, w = gauss_hermite_grid(1, 0.5 * ctx.beta / ctx.mu + theta, 40)
    ref = float(np.sum(w * gamma_k((2 * k,), pts, ctx) * np.exp(-theta * pts[..., 0] ** 2)))
    assert gaussian_overlap_even((k,), theta, ctx) == pytest.approx(ref, abs=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 14), st.integers(0, 14), st.floats(0.1, 3.0), st.floats(-1.5, 1.5))
def test_product_against_gauss_hermite(j, k, theta, kappa):
    x, w = np.polynomial.hermite.hermgauss(40)
    m = theta * kappa / (1 + theta)
    y = m + x / math.sqrt(1 + theta)
    terms = w * hermite(j, y) * hermite(k, y) * math.exp(-theta * kappa ** 2 / (1 + theta)) / math.sqrt(1 + theta)
    ref, mag = float(np.sum(terms)), float(np.sum(np.abs(terms)))
    assert abs(hermite_gauss_product(j, k, theta, kappa) - ref) <= 1e-10 * mag


@given(st.integers(0, 40), st.integers(0, 40), st.floats(0.1, 3.0))
def test_product_symmetric_and_parity(j, k, theta):
    a = hermite_gauss_product_normalized(j, k, theta, 0.4)
    b = hermite_gauss_product_normalized(k, j, theta, 0.4)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)
    c = hermite_gauss_product_normalized(j, k, theta, -0.4)
    assert c == pytest.approx((-1) ** (j + k) * a, rel=1e-10, abs=1e-300)
    if (j + k) % 2:
        assert hermite_gauss_product_centered(j, k, theta) == 0.0


def test_product_large_degree_finite():
    v = hermite_gauss_product_normalized(400, 380, 0.5, 0.3)
    assert math.isfinite(v) and abs(v) <= math.sqrt(math.pi / 1.5)


@settings(max_examples=40)
@given(st.integers(0, 10), st.floats(0.05, 0.95), st.floats(-2, 2), st.floats(-2, 2))
def test_scale_shift(k, gam, x, y):
    ref = hermite(k, gam * (x + y))
    assert hermite_scale_shift(k, gam, x, y) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_ladder_derivative():
    z = np.array([[0.3, -0.2], [1.1, 0.4]])
    h = 1e-6
    for k in [(0, 0), (2, 1), (3, 4)]:
        fd = (gamma_k(k, z + [h, 0], CTX) - gamma_k(k, z - [h, 0], CTX)) / (2 * h)
        np.testing.assert_allclose(gamma_k_derivative(0, k, z, CTX), fd, atol=1e-6)
