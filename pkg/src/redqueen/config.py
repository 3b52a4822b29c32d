"""Experiment configuration files.

Configs are INI files (``configparser`` syntax, ``#`` comments). Sections
and keys::

    [model]        n, mu_H2, mu_P2, R_H, R_P, gamma_H, gamma_P, rho_max, theta,
                   alpha_H, alpha_P, beta, ell, u
    [grid]         m, half_width (number or "auto"), center
    [time]         t_end, dt (number or "auto"), snapshots, record_every
    [host]         mass, center, std
    [pathogen]     mass, center, std
    [frame]        mode ("fixed" or "comoving")
    [output]       dir
    [diagnostics]  window, linear_r2, profile_residual, circle_r2,
                   radius_drift, omega_drift, ring_score, min_displacement

Vectors are comma separated. Numbers are parsed with ``float``, which does
not depend on the locale. Every key is optional; missing keys take the
defaults below.
"""

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import Thresholds
from .errors import ConfigError, RedQueenError
from .model import ModelParams
from .pde import Grid

_MODEL_KEYS = {
    "n": "int", "mu_H2": "float", "mu_P2": "float", "R_H": "float", "R_P": "float",
    "gamma_H": "float", "gamma_P": "float", "rho_max": "float", "theta": "float",
    "alpha_H": "float", "alpha_P": "float", "beta": "float", "ell": "float", "u": "vector",
}

SCHEMA = {
    "model": _MODEL_KEYS,
    "grid": {"m": "int", "half_width": "float_or_auto", "center": "vector"},
    "time": {"t_end": "float", "dt": "float_or_auto", "snapshots": "floatlist",
             "record_every": "int"},
    "host": {"mass": "float", "center": "vector", "std": "float"},
    "pathogen": {"mass": "float", "center": "vector", "std": "float"},
    "frame": {"mode": ("fixed", "comoving")},
    "output": {"dir": "str"},
    "diagnostics": {"window": "float", "linear_r2": "float", "profile_residual": "float",
                    "circle_r2": "float", "radius_drift": "float", "omega_drift": "float",
                    "ring_score": "float", "min_displacement": "float"},
}


@dataclass(frozen=True)
class Blob:
    """Isotropic Gaussian initial datum."""

    mass: float
    center: tuple
    std: float


@dataclass(frozen=True)
class SimulationConfig:
    """Fully resolved description of one simulation run."""

    params: ModelParams = field(default_factory=ModelParams)
    m: int = 128
    half_width: float = None
    grid_center: tuple = None
    dt: float = None
    t_end: float = 20.0
    snapshots: tuple = ()
    record_every: int = 1
    host: Blob = None
    pathogen: Blob = None
    frame: str = "fixed"
    output: str = "runs/out"
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        n = self.params.n
        if self.host is None:
            object.__setattr__(self, "host", Blob(10.0, (0.5, 0.5)[:n] if n <= 2 else (0.5,) * n, 0.2))
        if self.pathogen is None:
            object.__setattr__(self, "pathogen", Blob(10.0, (0.7, 0.0)[:n], 0.2))
        if self.grid_center is None:
            object.__setattr__(self, "grid_center", (0.0,) * n)
        for name, b in (("host", self.host), ("pathogen", self.pathogen)):
            if len(b.center) != n:
                raise ConfigError(f"[{name}] center has {len(b.center)} components, expected {n}")
            if not b.std > 0 or b.mass < 0:
                raise ConfigError(f"[{name}] requires std > 0 and mass >= 0")
        if self.host.mass <= 0:
            raise ConfigError("[host] mass must be > 0")
        if len(self.grid_center) != n:
            raise ConfigError(f"[grid] center has {len(self.grid_center)} components, expected {n}")
        if self.t_end < 0:
            raise ConfigError("[time] t_end must be >= 0")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("[time] dt must be > 0")
        if self.frame not in ("fixed", "comoving"):
            raise ConfigError("[frame] mode must be fixed or comoving")
        if self.record_every < 1:
            raise ConfigError("[time] record_every must be >= 1")

    def auto_half_width(self):
        """Half-width covering the analytic Gaussians and the initial blobs."""
        p = self.params
        stds = []
        if p.beta > 0:
            stds.append(math.sqrt(p.mu_H / p.beta))
        elif p.alpha_H > 0:
            stds.append(math.sqrt(p.mu_H / p.alpha_H))
        if p.alpha_P > 0:
            stds.append(math.sqrt(p.mu_P / p.alpha_P))
        c = np.asarray(self.grid_center)
        blob = max(float(np.linalg.norm(np.asarray(b.center) - c)) + 6.0 * b.std
                   for b in (self.host, self.pathogen))
        return max([8.0 * s for s in stds] + [blob])

    def grid(self):
        hw = self.half_width if self.half_width is not None else self.auto_half_width()
        return Grid.box(self.params.n, hw, self.m, self.grid_center)

    def as_dict(self):
        return {
            "model": self.params.as_dict(),
            "grid": {"m": self.m, "half_width": self.grid().hi[0] - self.grid_center[0],
                     "center": list(self.grid_center)},
            "time": {"t_end": self.t_end, "dt": self.dt, "snapshots": list(self.snapshots),
                     "record_every": self.record_every},
            "host": {"mass": self.host.mass, "center": list(self.host.center), "std": self.host.std},
            "pathogen": {"mass": self.pathogen.mass, "center": list(self.pathogen.center),
                         "std": self.pathogen.std},
            "frame": {"mode": self.frame},
            "output": {"dir": self.output},
            "diagnostics": self.thresholds.as_dict(),
        }


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_config(cfg, dt=None):
    """Canonical INI text of a resolved config; ``dt`` pins an automatic step."""
    d = cfg.as_dict()
    if dt is not None:
        d["time"]["dt"] = dt
    if d["time"]["dt"] is None:
        d["time"]["dt"] = "auto"
    lines = []
    for section, values in d.items():
        lines.append(f"[{section}]")
        for key, v in values.items():
            if key == "snapshots" and not v:
                continue
            lines.append(f"{key} = {_fmt(v)}")
        lines.append("")
    return "\n".join(lines)


def _key_lines(text):
    """Map (section, key) -> 1-based line number, plus section header lines."""
    where = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where[(section, None)] = no
            continue
        for sep in ("=", ":"):
            if sep in line:
                where[(section, line.split(sep, 1)[0].strip())] = no
                break
    return where


def _parse_value(kind, raw):
    raw = raw.strip()
    if isinstance(kind, tuple):
        if raw not in kind:
            raise ValueError(f"expected one of {', '.join(kind)}, got '{raw}'")
        return raw
    if kind == "str":
        if not raw:
            raise ValueError("expected a non-empty string")
        return raw
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"expected an integer, got '{raw}'") from None
    if kind in ("float", "float_or_auto"):
        if kind == "float_or_auto" and raw.lower() == "auto":
            return None
        try:
            v = float(raw)
        except ValueError:
            raise ValueError(f"expected a number, got '{raw}'") from None
        if not math.isfinite(v):
            raise ValueError(f"expected a finite number, got '{raw}'")
        return v
    if kind in ("vector", "floatlist"):
        if not raw and kind == "floatlist":
            return ()
        try:
            vals = tuple(float(x) for x in raw.split(","))
        except ValueError:
            raise ValueError(f"expected comma-separated numbers, got '{raw}'") from None
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"expected finite numbers, got '{raw}'")
        return vals
    raise AssertionError(kind)


def parse_config(text, path=None):
    """Parse config text into a :class:`SimulationConfig`."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"syntax error: {exc.message if hasattr(exc, 'message') else exc}",
                          line, path) from None
    lines = _key_lines(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, None)), path)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]", lines.get((section, key)), path)
            try:
                values[(section, key)] = _parse_value(SCHEMA[section][key], raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}", lines.get((section, key)), path) from None

    def get(section, key, default=None):
        return values.get((section, key), default)

    try:
        model = {k: v for (s, k), v in values.items() if s == "model"}
        params = ModelParams(**model)
    except (RedQueenError, TypeError) as exc:
        bad = next((k for k in _MODEL_KEYS if k in str(exc)), None)
        raise ConfigError(f"[model] {exc}", lines.get(("model", bad)), path) from None

    n = params.n
    defaults = SimulationConfig(params=params)
    try:
        th = Thresholds(**{k: v for (s, k), v in values.items() if s == "diagnostics"})
        cfg = SimulationConfig(
            params=params,
            m=get("grid", "m", 128),
            half_width=get("grid", "half_width"),
            grid_center=get("grid", "center", (0.0,) * n),
            dt=get("time", "dt"),
            t_end=get("time", "t_end", 20.0),
            snapshots=tuple(sorted(get("time", "snapshots", ()))),
            record_every=get("time", "record_every", 1),
            host=Blob(get("host", "mass", defaults.host.mass),
                      get("host", "center", defaults.host.center),
                      get("host", "std", defaults.host.std)),
            pathogen=Blob(get("pathogen", "mass", defaults.pathogen.mass),
                          get("pathogen", "center", defaults.pathogen.center),
                          get("pathogen", "std", defaults.pathogen.std)),
            frame=get("frame", "mode", "fixed"),
            output=get("output", "dir", "runs/out"),
            thresholds=th,
        )
        cfg.grid()
    except ConfigError as exc:
        msg = str(exc)
        sec = msg[msg.find("[") + 1:msg.find("]")] if "[" in msg else None
        key = next((k for (s, k) in lines if s == sec and k and k in msg), None)
        raise ConfigError(msg, lines.get((sec, key), lines.get((sec, None))), path) from None
    except RedQueenError as exc:
        raise ConfigError(f"[grid] {exc}", lines.get(("grid", "m")), path) from None
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, path) from None
    return parse_config(text, path)
