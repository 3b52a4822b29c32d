"""Command line entry point: ``redqueen {simulate,analyze,verify,sweep}``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 numerical failure. The output root is ``--out`` when given, otherwise
``$REDQUEEN_OUT/<config output dir>`` when the variable is set, otherwise
the config's own output directory.
"""

import argparse
import configparser
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from . import analytic as an
from . import artifacts as art
from . import series as se
from . import verify as vf
from .config import load_config, parse_config
from .diagnostics import classify
from .errors import ConfigError, DomainError, RedQueenError
from .pde import config_dt, simulate

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _err(msg):
    print(f"redqueen: error: {msg}", file=sys.stderr)


def _out_root(explicit, configured):
    if explicit:
        return explicit
    env = os.environ.get("REDQUEEN_OUT")
    if env and not os.path.isabs(configured):
        return os.path.join(env, configured)
    return configured


def _load_any(path):
    """Config from an INI file or from a run manifest."""
    if path.endswith(".json"):
        run_dir = os.path.dirname(path) or "."
        return art.config_from_manifest(art.read_manifest(run_dir), path)
    return load_config(path)


# ---------------------------------------------------------------------------
# simulate


def run_simulation(cfg, out_dir):
    dt = config_dt(cfg)
    traj = simulate(cfg)
    return art.write_run(out_dir, cfg, traj, dt), traj


def cmd_simulate(args):
    if not args.config:
        _err("simulate requires --config")
        return EXIT_USAGE
    try:
        cfg = _load_any(args.config)
    except (ConfigError, FileNotFoundError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    out = _out_root(args.out, cfg.output)
    try:
        manifest, _ = run_simulation(cfg, out)
    except RedQueenError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    f = manifest["final"]
    print(f"t = {f['t']:.6g}  H = {f['H']:.6g}  P = {f['P']:.6g}  steps = {manifest['steps']}  -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def analytic_summary(params):
    """Closed-form reference values available for ``params``; cheap to build."""
    out = {}
    if params.beta == 0.0:
        if an.stationary_exists(params):
            try:
                st = an.solve_stationary(params, m=128)
                out["stationary"] = {"H": st.H, "P": st.P, "lambda": st.lam}
            except RedQueenError as exc:
                out["stationary"] = {"error": str(exc)}
        else:
            out["stationary"] = {"error": "existence threshold violated"}
    elif params.alpha_H == 0.0:
        _, _, H0 = an.unperturbed_host(params)
        entry = {"tau": an.tau(params), "H0": H0, "conditions": an.pursuit_conditions(params)}
        try:
            resp = an.first_order_response(params, strict=False)
            entry.update({"dc_deps": resp.dc_deps, "deta_deps": resp.deta_deps,
                          "c_first_order": resp.dc_deps * params.rho_max})
        except RedQueenError as exc:
            entry["error"] = str(exc)
        out["pursuit"] = entry
    return out


VERDICT_HEADER = ["run", "regime", "c_fit", "delay_fit", "radius_fit", "omega_fit", "r2",
                  "profile_residual", "circle_r2", "radius_drift", "omega_drift", "ring_score"]


def analyze_run(run_dir, out_dir=None):
    cfg, traj, manifest = art.load_run(run_dir)
    p = cfg.params
    rep = classify(traj, thresholds=cfg.thresholds, offset=p.ell * p.u_vec)
    report = {"report": rep.as_dict(), "thresholds": cfg.thresholds.as_dict(),
              "analytic": analytic_summary(p), "run": os.path.basename(os.path.normpath(run_dir))}
    out_dir = out_dir or run_dir
    art.write_text(os.path.join(out_dir, "report.json"), art.dump_json(report))
    d = rep.as_dict()
    art.write_csv(os.path.join(out_dir, "verdict.csv"), VERDICT_HEADER,
                  [[report["run"]] + [d[k] for k in VERDICT_HEADER[1:]]])
    return report


def cmd_analyze(args):
    run_dir = args.run_dir
    if not run_dir:
        _err("analyze requires a run directory")
        return EXIT_USAGE
    try:
        report = analyze_run(run_dir, args.out)
    except (ConfigError, FileNotFoundError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except RedQueenError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    r = report["report"]
    print(f"regime: {r['regime']}  c = {r['c_fit']}  delay = {r['delay_fit']}  "
          f"radius = {r['radius_fit']}  ring_score = {r['ring_score']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def write_series_outputs(out_dir, sp, kmax):
    rep = se.verify_limsup(sp, kmax)
    art.write_text(os.path.join(out_dir, "limsup.csv"), se.limsup_csv(rep))
    conj = [se.verify_conjecture(sp, n, kmax) for n in (1, 2, 3)]
    art.write_text(os.path.join(out_dir, "series.json"), se.report_json([rep] + conj, sp.as_dict()))
    art.write_text(os.path.join(out_dir, "plot_limsup.py"), art.LIMSUP_PLOT)


def cmd_verify(args):
    try:
        if args.kmax < 10:
            raise DomainError("--kmax must be >= 10")
        if not args.b > 0.5:
            raise DomainError("--b must be > 1/2")
        if not args.theta_bar > 0:
            raise DomainError("--theta-bar must be > 0")
        checks = vf.run_suite(args.suite, theta_bar=args.theta_bar, b=args.b, kmax=args.kmax)
    except DomainError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(vf.format_table(checks))
    failed = [c for c in checks if c.passed is False]
    skipped = [c for c in checks if c.passed is None]
    out = args.out or os.environ.get("REDQUEEN_OUT")
    if out:
        rows = [[c.name, c.status, c.detail] for c in checks]
        art.write_csv(os.path.join(out, f"verify_{args.suite}.csv"), ["check", "status", "detail"],
                      [[r[0].replace(",", ";"), r[1], r[2].replace(",", ";")] for r in rows])
        sp = se.SeriesParams(args.theta_bar, args.b)
        if args.suite in ("series", "all") and sp.admissible:
            write_series_outputs(out, sp, args.kmax)
    print(f"{len(checks) - len(failed) - len(skipped)} passed, {len(failed)} failed, {len(skipped)} skipped")
    if failed:
        print("failures:", file=sys.stderr)
        for c in failed:
            print(f"  {c.name}: {c.detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def parse_sweep(path):
    """Read a sweep file.

    Sections: ``[sweep] base = <config path, relative to the sweep file>``
    and optional ``output = <dir>`` (default ``runs/sweep``),
    ``[axes] section.key = v1, v2, ...`` and optional ``[overrides]
    section.key = value`` applied to every cell.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read sweep file: {exc.strerror}", None, path) from None
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc}", getattr(exc, "lineno", None), path) from None
    if not cp.has_option("sweep", "base"):
        raise ConfigError("[sweep] base is required", None, path)
    base_path = os.path.join(os.path.dirname(path), cp.get("sweep", "base"))
    try:
        with open(base_path, encoding="utf-8") as fh:
            base_text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read base config: {exc.strerror}", None, base_path) from None
    axes = []
    if cp.has_section("axes"):
        for key, raw in cp.items("axes"):
            if "." not in key:
                raise ConfigError(f"axis '{key}' must be written section.key", None, path)
            vals = [v.strip() for v in raw.split(",") if v.strip()]
            if not vals:
                raise ConfigError(f"axis '{key}' has no values", None, path)
            axes.append((key, vals))
    overrides = dict(cp.items("overrides")) if cp.has_section("overrides") else {}
    cells = []
    for combo in itertools.product(*[vals for _, vals in axes]):
        settings = dict(overrides)
        settings.update({k: v for (k, _), v in zip(axes, combo)})
        try:
            cfg_text = _apply_settings(base_text, settings)
        except configparser.Error as exc:
            raise ConfigError(f"base config: {exc}", None, base_path) from None
        cfg = parse_config(cfg_text, f"{path} (cell {combo})")
        key = "__".join(f"{k.split('.', 1)[1]}={v}" for (k, _), v in zip(axes, combo)) or "base"
        sort_key = tuple(float(v) if _is_number(v) else math.inf for v in combo)
        cells.append((sort_key, key, dict(zip([k for k, _ in axes], combo)), cfg_text, cfg))
    cells.sort(key=lambda c: (c[0], c[1]))
    output = cp.get("sweep", "output", fallback="runs/sweep")
    return [k for k, _ in axes], cells, output


def _is_number(v):
    try:
        float(v)
        return True
    except ValueError:
        return False


def _apply_settings(text, settings):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    cp.read_string(text)
    for dotted, value in settings.items():
        section, key = dotted.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    lines = []
    for section in cp.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in cp.items(section))
        lines.append("")
    return "\n".join(lines)


def _run_cell(job):
    key, cfg_text, cell_dir = job
    try:
        cfg = parse_config(cfg_text)
        run_simulation(cfg, cell_dir)
        report = analyze_run(cell_dir)
        return key, "ok", report["report"], ""
    except RedQueenError as exc:
        return key, "failed", None, str(exc)


def cmd_sweep(args):
    if not args.config:
        _err("sweep requires --config")
        return EXIT_USAGE
    if args.jobs < 1:
        _err("--jobs must be >= 1")
        return EXIT_USAGE
    try:
        axis_names, cells, output = parse_sweep(args.config)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    out = _out_root(args.out, output)
    jobs = [(key, text, os.path.join(out, "cells", key)) for _, key, _, text, _ in cells]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(j) for j in jobs]
    by_key = {r[0]: r for r in results}
    header = ["cell"] + [f"axis:{a}" for a in axis_names] + ["status"] + VERDICT_HEADER[1:] + ["error"]
    rows = []
    for _, key, values, _, _ in cells:
        _, status, rep, error = by_key[key]
        rep = rep or {}
        rows.append([key] + [values[a] for a in axis_names] + [status]
                    + [rep.get(k) for k in VERDICT_HEADER[1:]] + [error.replace(",", ";")])
    art.write_csv(os.path.join(out, "verdicts.csv"), header, rows)
    art.write_text(os.path.join(out, "plot_phase_diagram.py"), art.PHASE_PLOT)
    ok = sum(1 for r in results if r[1] == "ok")
    for row in rows:
        print(f"{row[0]}: {row[len(axis_names) + 1]} {row[len(axis_names) + 2] or ''}".rstrip())
    print(f"{ok}/{len(results)} cells succeeded -> {out}")
    return EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="redqueen", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"redqueen {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the PDE solver for one config")
    p.add_argument("--config", help="INI config or a run manifest.json")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="classify a finished run and fit pulse quantities")
    p.add_argument("run_dir", nargs="?", help="directory written by simulate")
    p.add_argument("--out", help="directory for report.json (default: the run directory)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run an oracle suite")
    p.add_argument("--suite", choices=vf.SUITES + ("all",), default="all")
    p.add_argument("--kmax", type=int, default=2000, help="largest k for the series suite")
    p.add_argument("--b", type=float, default=5.0, help="decay exponent for the series suite")
    p.add_argument("--theta-bar", type=float, default=0.1, dest="theta_bar")
    p.add_argument("--out", help="also write the check table and series reports here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a grid of config overrides")
    p.add_argument("--config", help="sweep file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
