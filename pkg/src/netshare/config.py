"""Experiment configuration files.

An experiment is an INI file with one ``[experiment]`` section and one
``[scenario <name>]`` section per scenario::

    [experiment]
    name = fig2a
    kind = coverage            ; coverage, rates, or both comma-separated
    theta_db = -10:20:1        ; start:stop:step (inclusive) or a list
    realizations = 100000
    seed = 2016
    analytic = yes             ; write closed-form overlays where they exist
    output = out/fig2a
    format = csv               ; csv or csv+gnuplot

    [scenario infrastructure]
    sharing = infrastructure
    densities = 1, 1

Every problem is reported with the line it comes from.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import NoiseModel
from .channel import FadingModel
from .pointprocess import GppParams
from .simulator import PPPGeometry, Scenario

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "SHIPPED_DIR"]

SHIPPED_DIR = Path(__file__).parent / "configs"

EXPERIMENT_KEYS = {"name", "kind", "theta_db", "realizations", "seed", "analytic",
                   "output", "format", "workers"}
SCENARIO_KEYS = {"sharing", "band_mode", "fading", "m", "geometry", "densities",
                 "cluster_intensity", "pair_probability", "pair_radius",
                 "pair_radius_rel", "randomize_assignment", "alpha",
                 "coordination_radius", "noise", "served_operator", "band_width",
                 "window_radius"}
KINDS = ("coverage", "rates")
FORMATS = ("csv", "csv+gnuplot")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        self.message = message
        super().__init__(message)

    def __str__(self):
        where = self.path or ("<config>" if self.line else "")
        if self.line:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}" if where else self.message


@dataclass
class ExperimentConfig:
    name: str
    kinds: tuple
    thresholds_db: np.ndarray
    realizations: int
    seed: int
    analytic: bool
    output_dir: Path
    output_format: str
    scenarios: list
    workers: int = 1
    source_text: str = field(default="", repr=False)

    def with_overrides(self, seed=None, realizations=None, output_dir=None, workers=None):
        return replace(
            self,
            seed=self.seed if seed is None else int(seed),
            realizations=self.realizations if realizations is None else int(realizations),
            output_dir=self.output_dir if output_dir is None else Path(output_dir),
            workers=self.workers if workers is None else int(workers),
        )


class _Locator:
    """Maps (section, key) back to line numbers of the raw text."""

    def __init__(self, text: str):
        self.lines = {}
        section = None
        for no, raw in enumerate(text.splitlines(), 1):
            s = raw.strip()
            if not s or s[0] in "#;":
                continue
            m = re.match(r"\[(.+)\]$", s)
            if m:
                section = m.group(1).strip()
                self.lines[(section, None)] = no
                continue
            key = re.split(r"[=:]", s, 1)[0].strip().lower()
            self.lines.setdefault((section, key), no)

    def __call__(self, section, key=None):
        return self.lines.get((section, key)) or self.lines.get((section, None))


def _parse_grid(text: str) -> np.ndarray:
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0 or stop < start:
            raise ValueError("grid needs start <= stop and a positive step")
        n = int(round((stop - start) / step))
        grid = start + step * np.arange(n + 1)
        return np.round(grid, 10)
    return np.array([float(v) for v in re.split(r"[,\s]+", text) if v])


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in re.split(r"[,\s]+", text.strip()) if v)


_TRUE = {"1", "yes", "true", "on"}
_FALSE = {"0", "no", "false", "off"}


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"expected yes/no, got {text!r}")


def _build_scenario(name: str, sec, where) -> Scenario:
    get = sec.get
    geometry_kind = get("geometry", "ppp").strip().lower()
    if geometry_kind == "ppp":
        geometry = PPPGeometry(_floats(get("densities", "1, 1")))
    elif geometry_kind == "gpp":
        geometry = GppParams(
            cluster_intensity=float(get("cluster_intensity", "1")),
            pair_probability=float(get("pair_probability", "1")),
            pair_radius=float(get("pair_radius", "0")),
            randomize_assignment=_bool(get("randomize_assignment", "no")),
        )
    else:
        raise ConfigError(f"unknown geometry {geometry_kind!r} (ppp or gpp)", where("geometry"))
    fading = FadingModel(
        kind=get("fading", "rayleigh").strip().lower(),
        m=float(get("m", "1")),
        band_mode=get("band_mode", "flat").strip().lower(),
    )
    window_radius = get("window_radius")
    scenario = Scenario(
        sharing=get("sharing", "none").strip().lower(),
        fading=fading,
        geometry=geometry,
        coordination_radius=float(get("coordination_radius", "0")),
        noise=NoiseModel.from_power(float(get("noise", "0"))),
        served_operator=int(get("served_operator", "0")),
        alpha=float(get("alpha", "4")),
        band_width=float(get("band_width", "1")),
        window_radius=float(window_radius) if window_radius else None,
        name=name,
    )
    rel = get("pair_radius_rel")
    if rel is not None:
        if geometry_kind != "gpp":
            raise ConfigError("pair_radius_rel needs geometry = gpp", where("pair_radius_rel"))
        geo = replace(geometry, pair_radius=float(rel) * scenario.window.radius)
        scenario = replace(scenario, geometry=geo)
    return scenario


def parse_config(text: str, path: str | None = None, base_dir: Path | None = None) -> ExperimentConfig:
    where_any = _Locator(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=path or "<config>")
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"syntax error: {exc.errors[0][1].strip() if exc.errors else exc}", line, path) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None), path) from None

    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section", None, path)
    exp = parser["experiment"]
    ew = lambda key=None: where_any("experiment", key)
    for key in exp:
        if key not in EXPERIMENT_KEYS:
            raise ConfigError(f"unknown experiment key {key!r}", ew(key), path)

    def field_(key, conv, default):
        raw = exp.get(key)
        if raw is None:
            return default
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", ew(key), path) from None

    kinds = field_("kind", lambda s: tuple(k.strip().lower() for k in s.split(",") if k.strip()), ("coverage",))
    for k in kinds:
        if k not in KINDS:
            raise ConfigError(f"unknown kind {k!r} (expected {', '.join(KINDS)})", ew("kind"), path)
    grid = field_("theta_db", _parse_grid, np.arange(-10.0, 21.0, 1.0))
    if len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("theta_db must be a non-empty increasing grid", ew("theta_db"), path)
    realizations = field_("realizations", int, 100_000)
    if realizations < 1:
        raise ConfigError("realizations must be >= 1", ew("realizations"), path)
    workers = field_("workers", int, 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1", ew("workers"), path)
    fmt = field_("format", lambda s: s.strip().lower(), "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r} (expected {', '.join(FORMATS)})", ew("format"), path)
    name = exp.get("name", Path(path).stem if path else "experiment").strip()
    out = Path(exp.get("output", f"out/{name}").strip())
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out

    scenarios = []
    for section in parser.sections():
        if section == "experiment":
            continue
        m = re.match(r"scenario\s+(\S+)$", section)
        if not m:
            raise ConfigError(f"unknown section [{section}]", where_any(section), path)
        sname = m.group(1)
        sec = parser[section]
        sw = lambda key=None, _s=section: where_any(_s, key)
        for key in sec:
            if key not in SCENARIO_KEYS:
                raise ConfigError(f"scenario {sname!r}: unknown key {key!r}", sw(key), path)
        try:
            scenarios.append(_build_scenario(sname, sec, sw))
        except ConfigError as exc:
            exc.path = path
            raise
        except (ValueError, TypeError) as exc:
            key = _guess_key(str(exc), sec)
            raise ConfigError(f"scenario {sname!r}: {exc}", sw(key), path) from None
    if not scenarios:
        raise ConfigError("no [scenario ...] sections", ew(), path)
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique", ew(), path)

    return ExperimentConfig(
        name=name,
        kinds=kinds,
        thresholds_db=grid,
        realizations=realizations,
        seed=field_("seed", int, 0),
        analytic=field_("analytic", _bool, True),
        output_dir=out,
        output_format=fmt,
        scenarios=scenarios,
        workers=workers,
        source_text=text,
    )


def _guess_key(message: str, sec) -> str | None:
    """Pick the scenario key an error message most plausibly refers to."""
    hints = {
        "sharing": "sharing", "band mode": "band_mode", "fading kind": "fading",
        "nakagami": "m", "densit": "densities", "cluster intensity": "cluster_intensity",
        "pair probability": "pair_probability", "pair radius": "pair_radius",
        "pathloss": "alpha", "coordination": "coordination_radius", "noise": "noise",
        "served operator": "served_operator", "band width": "band_width",
        "window radius": "window_radius",
    }
    low = message.lower()
    for hint, key in hints.items():
        if hint in low and key in sec:
            return key
    for key in sec:
        if repr(sec[key]) in message or sec[key] in message:
            return key
    return None


def resolve_config_path(path) -> Path:
    """Return ``path`` itself, or a shipped config of that name."""
    p = Path(path)
    if p.exists():
        return p
    for candidate in (SHIPPED_DIR / p.name, SHIPPED_DIR / f"{p.name}.cfg"):
        if candidate.exists():
            return candidate
    return p


def load_config(path) -> ExperimentConfig:
    p = resolve_config_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(p))
