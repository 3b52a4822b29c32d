"""Acceptance benchmarks, one recorded pass/fail line per criterion.

Every line is also repeated in the terminal summary under
"acceptance criteria".
"""

import filecmp
import math
import pathlib
import time

import numpy as np
import pytest

from redqueen import analytic as an
from redqueen import cli, pde
from redqueen import verify as vf
from redqueen.config import load_config
from redqueen.model import ModelParams, OdeState, integrate_ode, ode_equilibrium

pytestmark = pytest.mark.slow

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"
RHO = {"pursuit_rho0": 0.0, "pursuit_rho002": 0.02, "pursuit_rho005": 0.05}


class Runs:
    """Simulate-and-analyze each shipped config once per session."""

    def __init__(self, root):
        self.root = root
        self.cache = {}

    def __call__(self, name):
        if name not in self.cache:
            out = self.root / name
            start = time.perf_counter()
            manifest, traj = cli.run_simulation(load_config(CONFIGS / f"{name}.ini"), str(out))
            report = cli.analyze_run(str(out))
            self.cache[name] = (out, traj, report, time.perf_counter() - start)
        return self.cache[name]


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory.mktemp("acceptance"))


def _by_name(checks):
    return {c.name: c for c in checks}


def _timed(fn, *args, **kw):
    start = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - start


def _ode():
    p = ModelParams()
    return integrate_ode(OdeState(10.0, 10.0), p, 500.0), p


def test_1_ode_equilibrium(criterion):
    ((t, H, P), p), secs = _timed(_ode)
    assert ode_equilibrium(p) == pytest.approx((0.04 / 0.11, 4 / 0.11), rel=1e-15)
    eh = abs(H[-1] - 0.04 / 0.11) / (0.04 / 0.11)
    ep = abs(P[-1] - 4 / 0.11) / (4 / 0.11)
    criterion("1", t[-1] == 500.0 and max(eh, ep) < 1e-6 and secs < 1.0,
              f"rel errors H {eh:.1e} P {ep:.1e}, {secs:.2f} s")


def test_2_hermite_suite(criterion):
    checks, secs = _timed(vf.hermite_suite)
    bad = [c.name for c in checks if c.passed is False]
    criterion("2", not bad and secs < 60.0,
              f"{len(checks)} checks, failed {bad or 'none'}, {secs:.1f} s")


@pytest.fixture(scope="module")
def stationary_suite():
    return _timed(vf.stationary_suite, m=256)


def test_3a_stationary_relation(stationary_suite, criterion):
    c = _by_name(stationary_suite[0])["pathogen mass relation of the stationary state"]
    criterion("3a", c.passed, f"R_P - gamma_P P/H - n mu_P alpha_P = {c.detail}")


def test_3b_stationary_residual(stationary_suite, criterion):
    checks = _by_name(stationary_suite[0])
    res = checks["host profile equation residual at m = 256"]
    order = checks["residual order under refinement"]
    criterion("3b", res.passed and order.passed, f"sup residual {res.detail}, {order.detail}")


def test_3c_stationary_attracts(stationary_suite, criterion):
    start = time.perf_counter()
    p = ModelParams(alpha_H=0.5, beta=0.0)
    grid = an.default_stationary_grid(p, 64)
    st = an.solve_stationary(p, grid, pathogen="discrete")
    psi = st.psi_field().values
    bump = 1.0 + 0.2 * np.exp(-np.sum((grid.points() - [0.5, 0.0]) ** 2, axis=-1))
    s0 = pde.SimState(0.0, pde.Field(grid, st.H * st.phi.values * bump), pde.Field(grid, 0.9 * st.P * psi))
    dt = pde.stable_dt(grid, p, 2 * st.H + p.R_H, 2 * st.P)
    end = pde.run(s0, p, 50.0, dt).final
    w = grid.weights()
    eh = float(np.sum(w * np.abs(end.h.values - st.H * st.phi.values))) / st.H
    ep = float(np.sum(w * np.abs(end.p.values - st.P * psi))) / st.P
    secs = stationary_suite[1] + time.perf_counter() - start
    criterion("3c", max(eh, ep) < 1e-3 and secs < 300.0,
              f"relative L1 at t = 50: host {eh:.1e}, pathogen {ep:.1e}; criterion 3 total {secs:.0f} s")


def test_4a_pursuit_unperturbed(runs, criterion):
    out, traj, report, secs = runs("pursuit_rho0")
    p = load_config(CONFIGS / "pursuit_rho0.ini").params
    _, phi0, H0 = an.unperturbed_host(p)
    end = traj.final
    grid = end.h.grid
    w = grid.weights()
    H = float(np.sum(w * end.h.values))
    xbar = [float(np.sum(w * end.h.values * grid.points()[..., i])) / H for i in range(2)]
    ref = an.GaussianProfile(xbar, phi0.variance).evaluate(grid.points())
    l1 = float(np.sum(w * np.abs(end.h.values / H - ref)))
    dh = abs(H - H0) / H0
    criterion("4a", l1 < 1e-3 and dh < 1e-3, f"L1 {l1:.1e}, |H - H0|/H0 {dh:.1e}, {secs:.0f} s")


@pytest.mark.parametrize("name", ["pursuit_rho002", "pursuit_rho005"])
def test_4b_pursuit_pulse(runs, name, criterion):
    out, traj, report, secs = runs(name)
    r = report["report"]
    H0 = report["analytic"]["pursuit"]["H0"]
    tau = report["analytic"]["pursuit"]["tau"]
    rel = abs(r["delay_fit"] - tau) / tau if r["delay_fit"] is not None else math.inf
    ok = r["regime"] == "linear-pulse" and r["c_fit"] > 0 and rel < 0.05 and traj.H[-1] < H0
    criterion(f"4b@{RHO[name]}", ok,
              f"{r['regime']}, c {r['c_fit']:.4f}, delay {r['delay_fit']:.4f} ({rel:.1%} from tau), "
              f"H {traj.H[-1]:.4f} < H0 {H0:.4f}")


def test_4c_pursuit_speed_slope(runs, criterion):
    rho = np.array(list(RHO.values()))
    c = np.array([runs(n)[2]["report"]["c_fit"] if RHO[n] > 0 else 0.0 for n in RHO])
    secs = sum(runs(n)[3] for n in RHO)
    slope = float(rho @ c / (rho @ rho))
    secants = c[1:] / rho[1:]
    spread_ = float(abs(secants[1] - secants[0]) / secants.mean())
    p = load_config(CONFIGS / "pursuit_rho002.ini").params
    pred = an.first_order_response(p, strict=False).dc_deps
    rel = abs(slope - pred) / pred
    criterion("4c", rel < 0.15 and spread_ < 0.15 and secs < 900.0,
              f"fitted slope {slope:.3f} vs dc/deps {pred:.4f} ({rel:.0%} off), "
              f"secant spread {spread_:.0%}, runs {secs:.0f} s")


def test_5_rotating(runs, criterion):
    out, traj, report, secs = runs("rotating")
    r = report["report"]
    ok = (r["regime"] == "rotating-pulse" and r["radius_drift"] < 0.02 and r["omega_drift"] < 0.05
          and secs < 600.0)
    criterion("5", ok, f"{r['regime']}, radius {r['radius_fit']:.4f} drift {r['radius_drift']:.2%}, "
                       f"omega {r['omega_fit']:.4f} drift {r['omega_drift']:.2%}, {secs:.0f} s")


def test_6_rings(runs, criterion):
    from redqueen.diagnostics import ring_score
    _, traj, _, s1 = runs("ring")
    score = next(ring_score(s.h) for s in traj.snapshots if s.t >= 10.0 - 1e-9)
    i1 = int(np.argmin(np.abs(traj.t - 1.0)))
    drift = float(np.linalg.norm(traj.xbar[-1] - traj.xbar[i1]))
    _, sel, _, s2 = runs("ring_selection")
    home = float(np.linalg.norm(sel.xbar[-1]))
    ok = score > 0.5 and drift < 0.3 and home < 0.1 and s1 + s2 < 600.0
    criterion("6", ok, f"ring score at t = 10 {score:.3f}, |xbar(20) - xbar(1)| {drift:.3f}; "
                       f"with selection |xbar(20)| {home:.2e}; {s1 + s2:.0f} s")


def test_7_series_suite(criterion):
    checks, secs = _timed(vf.series_suite, theta_bar=0.1, b=5.0, kmax=2000)
    by = _by_name(checks)
    needed = ["binomial product inequality (j, k <= 60, all l)",
              "bounded scaled sums with exponent b - 1/2 (k <= 2000)",
              "outer parts dominated by the geometric rate (k in [50, 500])",
              "exponent b - 1/3 report generated (evidence only)"]
    bad = [c.name for c in checks if c.passed is False]
    ok = all(by[n].passed for n in needed) and not bad and secs < 300.0
    criterion("7", ok, f"{by[needed[1]].detail}; failed {bad or 'none'}, {secs:.0f} s")


def test_8_linear_algebra(criterion):
    checks, secs = _timed(vf.pursuit_suite, trials=100)
    by = _by_name(checks)
    needed = ["linearized round trip on 100 random inputs", "host mass decreases at first order",
              "speed increases at first order for small ell",
              "corner term dominates the odd cube sum (sigma <= 10)",
              "corner dominance fails beyond the threshold"]
    ok = all(by[n].passed for n in needed) and secs < 120.0
    criterion("8", ok, "; ".join(by[n].detail for n in needed if by[n].detail) + f"; {secs:.1f} s")


def _same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(_same_tree(a / d, b / d) for d in cmp.common_dirs)


def test_9_determinism(runs, tmp_path, criterion):
    same = {}
    (t1, H1, P1), _ = _ode()
    (t2, H2, P2), _ = _ode()
    same["ode"] = all(x.tobytes() == y.tobytes() for x, y in ((t1, t2), (H1, H2), (P1, P2)))
    for suite, extra in (("hermite", []), ("pursuit", []), ("series", ["--kmax", "300"])):
        for d in ("a", "b"):
            assert cli.main(["verify", "--suite", suite, "--out", str(tmp_path / suite / d)] + extra) == 0
        same[suite] = _same_tree(tmp_path / suite / "a", tmp_path / suite / "b")
    p = ModelParams(alpha_H=0.5, beta=0.0)
    grid = an.default_stationary_grid(p, 96)
    same["stationary"] = (an.to_json(an.solve_stationary(p, grid))
                          == an.to_json(an.solve_stationary(p, grid)))
    first, *_ = runs("pursuit_rho002")
    again = tmp_path / "pursuit_rho002"
    cli.run_simulation(load_config(CONFIGS / "pursuit_rho002.ini"), str(again))
    cli.analyze_run(str(again))
    same["pursuit run"] = _same_tree(first, again)
    criterion("9", all(same.values()), ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                                 for k, v in same.items()))
