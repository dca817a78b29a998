import numpy as np
import pytest

from netshare.config import SHIPPED_DIR, ConfigError, load_config, parse_config, resolve_config_path
from netshare.pointprocess import GppParams

BASE = """\
[experiment]
name = demo
kind = coverage, rates
theta_db = -4:4:2
realizations = 100
seed = 7

[scenario a]
sharing = spectrum
band_mode = selective
densities = 1, 2
"""


def test_parse_basic():
    cfg = parse_config(BASE)
    assert cfg.name == "demo" and cfg.kinds == ("coverage", "rates")
    assert cfg.thresholds_db.tolist() == [-4.0, -2.0, 0.0, 2.0, 4.0]
    (s,) = cfg.scenarios
    assert s.sharing == "spectrum" and s.band_mode == "selective" and s.densities == (1.0, 2.0)
    assert cfg.analytic and cfg.output_format == "csv" and cfg.workers == 1


def test_list_grid_and_overrides(tmp_path):
    cfg = parse_config(BASE.replace("-4:4:2", "-3, 0, 5"))
    assert cfg.thresholds_db.tolist() == [-3.0, 0.0, 5.0]
    cfg2 = cfg.with_overrides(seed=1, realizations=5, output_dir=tmp_path, workers=2)
    assert (cfg2.seed, cfg2.realizations, cfg2.output_dir, cfg2.workers) == (1, 5, tmp_path, 2)
    assert cfg.seed == 7


def test_gpp_relative_radius():
    text = BASE + "\n[scenario g]\ngeometry = gpp\ncluster_intensity = 1\npair_probability = 0.5\npair_radius_rel = 0.1\n"
    g = parse_config(text).scenarios[1]
    assert isinstance(g.geometry, GppParams)
    assert g.geometry.pair_radius == pytest.approx(0.1 * g.window.radius)


def _line_of(text, needle):
    return next(i for i, line in enumerate(text.splitlines(), 1) if needle in line)


@pytest.mark.parametrize("bad,needle", [
    ("sharing = spectrum", "sharing = partial"),
    ("densities = 1, 2", "densities = 1, -2"),
    ("band_mode = selective", "band_mode = wideband"),
    ("seed = 7", "seed = seven"),
    ("realizations = 100", "realizations = 0"),
    ("theta_db = -4:4:2", "theta_db = 4:-4:2"),
    ("kind = coverage, rates", "kind = coverage, outage"),
    ("densities = 1, 2", "colour = red"),
])
def test_errors_name_the_line(bad, needle):
    text = BASE.replace(bad, needle)
    with pytest.raises(ConfigError) as info:
        parse_config(text, "demo.cfg")
    assert info.value.line == _line_of(text, needle)
    assert str(info.value).startswith(f"demo.cfg:{info.value.line}: ")


def test_empty_scenarios():
    text = BASE.split("[scenario a]")[0]
    with pytest.raises(ConfigError, match="no \\[scenario"):
        parse_config(text)


def test_structure_errors():
    with pytest.raises(ConfigError, match="missing"):
        parse_config("[scenario a]\nsharing = none\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASE + "[extra]\nx = 1\n")
    with pytest.raises(ConfigError) as info:
        parse_config(BASE + "this line has no separator\n")
    assert info.value.line == len(BASE.splitlines()) + 1
    with pytest.raises(ConfigError, match="pair_radius_rel"):
        parse_config(BASE + "pair_radius_rel = 0.1\n")


def test_shipped_configs_parse():
    paths = sorted(SHIPPED_DIR.glob("*.cfg"))
    assert len(paths) >= 8
    for p in paths:
        cfg = load_config(p)
        assert cfg.scenarios and np.all(np.diff(cfg.thresholds_db) > 0)
    assert resolve_config_path("fig2a") == SHIPPED_DIR / "fig2a.cfg"


def test_unreadable(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")
