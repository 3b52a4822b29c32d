import pathlib

import pytest

from redqueen.config import SimulationConfig, load_config, parse_config, render_config
from redqueen.errors import ConfigError

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg == SimulationConfig()
    assert cfg.host.center == (0.5, 0.5) and cfg.pathogen.center == (0.7, 0.0)


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.ini") if not p.name.startswith("sweep")))
def test_shipped_configs_parse(name):
    cfg = load_config(CONFIGS / name)
    assert cfg.t_end > 0


def test_render_round_trip():
    cfg = load_config(CONFIGS / "pursuit_rho002.ini")
    again = parse_config(render_config(cfg))
    assert again == cfg


@pytest.mark.parametrize("text,line,word", [
    ("[model]\nbeta = 1\nalpha_H = oops\n", 3, "alpha_H"),
    ("[model]\n\n# note\nbogus = 1\n", 4, "bogus"),
    ("[nosuch]\nx = 1\n", 1, "nosuch"),
    ("[grid]\nm = 4\n", 2, "grid"),
    ("[host]\ncenter = 1, 2, 3\n", 2, "center"),
    ("[frame]\nmode = sideways\n", 2, "mode"),
    ("[time]\nt_end = -1\n", 2, "t_end"),
    ("[model]\nmu_H2 = 0\n", 2, "mu_H2"),
])
def test_errors_carry_lines(text, line, word):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "x.ini")
    assert exc.value.line == line
    assert word in str(exc.value) and str(exc.value).startswith(f"x.ini:{line}:")


def test_numbers_are_locale_free():
    cfg = parse_config("[model]\nbeta = 1e-1\n[time]\nsnapshots = 2, 1\n")
    assert cfg.params.beta == 0.1 and cfg.snapshots == (1.0, 2.0)
    with pytest.raises(ConfigError):
        parse_config("[model]\nbeta = 0,5\n")


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/file.ini")
