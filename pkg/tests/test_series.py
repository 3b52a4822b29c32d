import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redqueen import series as se
from redqueen.errors import DomainError
from redqueen.model import ModelParams

SP = se.SeriesParams(0.1, 5.0)


def test_params():
    assert SP.lam == pytest.approx(math.sqrt(0.1 / 1.1))
    assert SP.admissible and not se.SeriesParams(0.3).admissible
    assert SP.rate < 1.0
    sp = se.SeriesParams.from_model(ModelParams(beta=1.0))
    assert sp.theta_bar == pytest.approx(math.sqrt(0.1))


def test_small_values():
    assert se.gamma_jk(0, 0, SP) == 1.0
    assert se.gamma_jk(0, 2, se.SeriesParams(1 / 3, 3.0)) == pytest.approx(0.25 / 2 ** 0.25, rel=1e-14)


@settings(max_examples=60)
@given(st.integers(0, 200), st.integers(0, 200))
def test_quartic_bound(j, k):
    assert se.gamma_jk(j, k, SP) <= se.gamma_tilde_jk(j, k, SP) * (1 + 1e-12)


@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.01, 0.2))
def test_monotone_in_b(j, k, th):
    a = se.gamma_jk(j, k, se.SeriesParams(th, 3.0))
    b = se.gamma_jk(j, k, se.SeriesParams(th, 4.0))
    assert b <= a


@pytest.mark.parametrize("k", [0, 1, 7, 40, 150, 300])
def test_windowed_sum_matches_brute_force(k):
    s, lo, hi = se.sum_gamma(k, SP)
    ref = math.fsum(se.gamma_row_bruteforce(k, 3 * k + 200, SP))
    assert s == pytest.approx(ref, rel=1e-13)
    assert lo <= k <= hi


@settings(max_examples=200)
@given(st.integers(0, 80), st.integers(0, 80), st.data())
def test_binomial_inequality(j, k, data):
    l = data.draw(st.integers(0, min(j, k)))
    assert se.binom_inequality(j, k, l)


def test_binomial_inequality_domain():
    with pytest.raises(DomainError):
        se.binom_inequality(2, 3, 4)


@settings(max_examples=30)
@given(st.integers(1, 300), st.integers(1, 300))
def test_cauchy_schwarz_slack(j, k):
    assert se.jensen_slack(j, k, SP) >= -1e-12


def test_partition_and_domination():
    for k in (20, 100):
        pb = se.proof_part_bounds(SP, k)
        assert pb.total == pytest.approx(se.sum_gamma(k, SP)[0], rel=1e-12)
    dom = se.geometric_domination(SP, list(range(50, 201, 25)), list(range(50, 61)))
    assert dom["part_i"]["holds"] and dom["part_ii"]["holds"]
    with pytest.raises(DomainError):
        se.proof_part_bounds(se.SeriesParams(0.3), 10)


def test_limsup_report_and_csv():
    rep = se.verify_limsup(SP, 300)
    assert rep.bounded and rep.exponent == 4.5
    rows = list(csv.reader(io.StringIO(se.limsup_csv(rep))))
    assert rows[0] == ["k", "scaled_sum", "exponent", "bound_estimate"] and len(rows) == 302
    d = json.loads(se.report_json([rep]))
    assert d["reports"][0]["bounded"] is True
    with pytest.raises(DomainError):
        se.verify_limsup(se.SeriesParams(0.3), 50)


def test_conjecture_reports_and_smallest_b():
    reps = [se.verify_conjecture(SP, n, 200) for n in (1, 2, 3)]
    assert [r.exponent for r in reps] == pytest.approx([4.0, 4.5, 5 - 1 / 3])
    assert se.smallest_passing_b(0.1, [1.0, 2.0, 5.0], 200) in (1.0, 2.0, 5.0)


def test_sigma_series():
    sp = se.SeriesParams(0.2, 5.0)
    r = se.sigma_series(0, 0, sp)
    assert r.value == pytest.approx(1.61899279764, rel=1e-10)
    ks = [10, 100, 400]
    vals = [se.sigma_series(k, 1, se.SeriesParams(0.1, 5.0, ell_bar=0.1)).value for k in ks]
    assert all(np.isfinite(vals)) and vals[2] < vals[0]
