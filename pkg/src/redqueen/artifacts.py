"""Run directories: CSV tables, JSON manifests, generated plot scripts.

Every float is written with ``repr`` (shortest round-trip form) and JSON is
dumped with sorted keys, so identical runs give byte-identical files.
"""

import hashlib
import json
import math
import os

import numpy as np

from . import __version__
from .config import parse_config, render_config
from .errors import ConfigError
from .pde import Field, Grid, SimState, Trajectory

FORMAT = "redqueen-run/1"
TRAJECTORY = "trajectory.csv"
MANIFEST = "manifest.json"
RESOLVED = "resolved.ini"


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(obj):
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    write_text(path, "\n".join(lines) + "\n")


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# trajectories and snapshots


def trajectory_header(n):
    axes = [str(i + 1) for i in range(n)]
    return ["t", "H", "P"] + [f"xbar{a}" for a in axes] + [f"ybar{a}" for a in axes]


def trajectory_rows(traj):
    for i in range(len(traj.t)):
        yield [traj.t[i], traj.H[i], traj.P[i], *traj.xbar[i], *traj.ybar[i]]


def snapshot_header(n):
    return [f"z{i + 1}" for i in range(n)] + ["h", "p"]


def snapshot_rows(state):
    pts = state.grid.points().reshape(-1, state.grid.n)
    h = state.h.values.ravel()
    p = state.p.values.ravel()
    for i in range(len(h)):
        yield [*pts[i], h[i], p[i]]


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


# ---------------------------------------------------------------------------
# plot scripts

TRAJECTORY_PLOT = '''"""Plot a simulation run written by `redqueen simulate`.

Usage: python plot_trajectory.py   (needs matplotlib; run inside the run directory)

Left panel: mean phenotypes of host (xbar) and pathogen (ybar).
Right panel: host density of the last snapshot.
"""
import json

import matplotlib.pyplot as plt
import numpy as np

manifest = json.load(open("manifest.json"))
n = manifest["grid"]["n"]
data = np.loadtxt("trajectory.csv", delimiter=",", skiprows=1, ndmin=2)
t = data[:, 0]
xbar = data[:, 3:3 + n]
ybar = data[:, 3 + n:3 + 2 * n]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 5))
if n == 1:
    # one phenotype axis: plot both means against time
    ax1.plot(t, xbar[:, 0], label="host mean")
    ax1.plot(t, ybar[:, 0], label="pathogen mean")
    ax1.set_xlabel("t")
else:
    ax1.plot(xbar[:, 0], xbar[:, 1], label="host mean")
    ax1.plot(ybar[:, 0], ybar[:, 1], label="pathogen mean")
    ax1.set_aspect("equal")
ax1.legend()

snap = manifest["snapshots"][-1]
s = np.loadtxt(snap["file"], delimiter=",", skiprows=1, ndmin=2)
if n == 1:
    ax2.plot(s[:, 0], s[:, 1])
else:
    m = manifest["grid"]["m"]
    h = s[:, 2].reshape(m)
    ax2.imshow(h.T, origin="lower", extent=(s[:, 0].min(), s[:, 0].max(), s[:, 1].min(), s[:, 1].max()))
ax2.set_title("host density at t = %g" % snap["t"])
plt.tight_layout()
plt.show()
'''

PHASE_PLOT = '''"""Phase diagram of a parameter sweep written by `redqueen sweep`.

Usage: python plot_phase_diagram.py   (needs matplotlib; run inside the sweep directory)

Each cell of verdicts.csv becomes one marker labelled with its regime; the
first two sweep axes are used as coordinates.
"""
import csv

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("verdicts.csv")))
axes = [k for k in rows[0] if k.startswith("axis:")]
xs = [float(r[axes[0]]) for r in rows]
ys = [float(r[axes[1]]) if len(axes) > 1 else 0.0 for r in rows]
fig, ax = plt.subplots(figsize=(6, 5))
ax.scatter(xs, ys)
for x, y, r in zip(xs, ys, rows):
    ax.annotate(r["regime"] or r["status"], (x, y), textcoords="offset points", xytext=(4, 4))
ax.set_xlabel(axes[0][5:])
if len(axes) > 1:
    ax.set_ylabel(axes[1][5:])
plt.tight_layout()
plt.show()
'''

LIMSUP_PLOT = '''"""Scaled sums from `redqueen verify --suite series`.

Usage: python plot_limsup.py   (needs matplotlib; run inside the output directory)

Plots (1+k)^(b-1/2) sum_j gamma_j^k against k on log axes; boundedness of the
curve is the property under test.
"""
import matplotlib.pyplot as plt
import numpy as np

data = np.loadtxt("limsup.csv", delimiter=",", skiprows=1, ndmin=2)
k, scaled = data[:, 0], data[:, 1]
plt.loglog(k + 1, scaled)
plt.xlabel("1 + k")
plt.ylabel("scaled sum")
plt.tight_layout()
plt.show()
'''


# ---------------------------------------------------------------------------
# run directories


def write_run(out_dir, cfg, traj, dt, command="simulate"):
    """Write trajectory, snapshots, resolved config, plot script and manifest.

    ``dt`` is the resolved maximal step; it is pinned in ``resolved.ini`` so
    that rerunning from the manifest repeats the run exactly.
    """
    n = cfg.params.n
    os.makedirs(out_dir, exist_ok=True)
    files = []
    path = os.path.join(out_dir, TRAJECTORY)
    write_csv(path, trajectory_header(n), trajectory_rows(traj))
    files.append(TRAJECTORY)
    snaps = []
    for i, s in enumerate(traj.snapshots):
        name = os.path.join("snapshots", f"snapshot_{i:04d}.csv")
        write_csv(os.path.join(out_dir, name), snapshot_header(n), snapshot_rows(s))
        snaps.append({"file": name, "t": s.t, "offset": list(s.grid.offset)})
        files.append(name)
    resolved = render_config(cfg, dt=dt)
    write_text(os.path.join(out_dir, RESOLVED), resolved)
    files.append(RESOLVED)
    write_text(os.path.join(out_dir, "plot_trajectory.py"), TRAJECTORY_PLOT)
    files.append("plot_trajectory.py")
    config = cfg.as_dict()
    config["time"]["dt"] = dt
    manifest = {
        "format": FORMAT,
        "version": __version__,
        "command": command,
        "config": config,
        "config_ini": resolved,
        "grid": traj.grid.as_dict(),
        "dt": traj.dt,
        "steps": traj.steps,
        "frame_shift": list(traj.frame_shift),
        "snapshots": snaps,
        "final": {"t": traj.t[-1], "H": traj.H[-1], "P": traj.P[-1],
                  "xbar": list(traj.xbar[-1]), "ybar": list(traj.ybar[-1])},
        "files": [{"path": f, "sha256": sha256(os.path.join(out_dir, f))} for f in sorted(files)],
    }
    write_text(os.path.join(out_dir, MANIFEST), dump_json(manifest))
    return manifest


def read_manifest(run_dir):
    path = os.path.join(run_dir, MANIFEST)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{path}: manifest not found")
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != FORMAT:
        raise ConfigError(f"{path}: not a run manifest")
    return manifest


def config_from_manifest(manifest, path=None):
    return parse_config(manifest["config_ini"], path)


def load_run(run_dir):
    """Rebuild (config, Trajectory) from a run directory."""
    manifest = read_manifest(run_dir)
    cfg = config_from_manifest(manifest, os.path.join(run_dir, MANIFEST))
    n = manifest["grid"]["n"]
    tpath = os.path.join(run_dir, TRAJECTORY)
    if not os.path.isfile(tpath):
        raise FileNotFoundError(f"{tpath}: trajectory not found")
    header, data = read_csv(tpath)
    if header != trajectory_header(n):
        raise ConfigError(f"{tpath}: unexpected header {','.join(header)}")
    g = manifest["grid"]
    base = Grid(n, tuple(g["lo"]), tuple(g["hi"]), tuple(g["m"]), tuple(g["offset"]))
    snaps = []
    for s in manifest["snapshots"]:
        spath = os.path.join(run_dir, s["file"])
        if not os.path.isfile(spath):
            raise FileNotFoundError(f"{spath}: snapshot not found")
        _, sd = read_csv(spath)
        grid = base.shifted(s["offset"])
        shape = grid.shape
        snaps.append(SimState(float(s["t"]), Field(grid, sd[:, n].reshape(shape)),
                              Field(grid, sd[:, n + 1].reshape(shape))))
    traj = Trajectory(t=data[:, 0], H=data[:, 1], P=data[:, 2], xbar=data[:, 3:3 + n],
                      ybar=data[:, 3 + n:3 + 2 * n], snapshots=snaps, dt=manifest["dt"], grid=base,
                      frame_shift=tuple(manifest["frame_shift"]), steps=manifest["steps"])
    return cfg, traj, manifest
