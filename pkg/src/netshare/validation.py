"""Monte-Carlo against closed-form cross-checks."""

from __future__ import annotations

import numpy as np

from . import analytic
from .analytic import OperatorSet
from .channel import FadingModel
from .simulator import PPPGeometry, Scenario, coverage_from_record, simulate

__all__ = ["has_closed_form", "analytic_curve", "analytic_mean_rate", "reference_scenarios",
           "run_validation", "DEFAULT_GRID_DB"]

DEFAULT_GRID_DB = np.arange(-10.0, 21.0, 1.0)


def has_closed_form(scenario: Scenario) -> bool:
    """True when the analytic expressions describe ``scenario`` exactly."""
    return (isinstance(scenario.geometry, PPPGeometry)
            and scenario.fading.kind == "rayleigh"
            and scenario.coordination_radius == 0
            and len(scenario.densities) <= analytic.MAX_OPERATORS)


def _ops(scenario: Scenario) -> OperatorSet:
    return OperatorSet(scenario.densities, scenario.band_width)


def analytic_curve(scenario: Scenario, thresholds_db) -> analytic.CoverageCurve:
    if not has_closed_form(scenario):
        raise ValueError(f"scenario {scenario.name!r} has no closed form")
    curve = analytic.coverage_curve(scenario.sharing, scenario.band_mode, thresholds_db, _ops(scenario),
                                    scenario.served_operator, scenario.alpha, scenario.noise)
    curve.meta["name"] = scenario.name
    return curve


def analytic_mean_rate(scenario: Scenario) -> float:
    if not has_closed_form(scenario):
        raise ValueError(f"scenario {scenario.name!r} has no closed form")
    return analytic.average_rate(
        scenario.sharing, _ops(scenario), scenario.served_operator, scenario.alpha,
        scenario.noise, scenario.band_mode)


def reference_scenarios(densities=(1.0, 1.0), alpha: float = 4.0) -> list:
    """The two-operator PPP set: every sharing mode, flat and selective."""
    out = []
    for sharing in ("none", "infrastructure", "spectrum", "full"):
        modes = ("flat", "selective") if sharing in ("spectrum", "full") else ("flat",)
        for mode in modes:
            name = sharing if sharing in ("none", "infrastructure") else f"{sharing}-{mode}"
            out.append(Scenario(sharing=sharing, fading=FadingModel(band_mode=mode),
                                geometry=PPPGeometry(tuple(densities)), alpha=alpha, name=name))
    return out


def run_validation(tolerance: float = 0.015, n_realizations: int = 100_000, master_seed: int = 0,
                   workers: int = 1, thresholds_db=DEFAULT_GRID_DB, scenarios=None) -> dict:
    """Compare MC and analytic coverage point by point.

    Returns a JSON-ready report; ``report["passed"]`` is False as soon as
    one scenario deviates by more than ``tolerance`` anywhere on the grid,
    and ``report["failed"]`` names those scenarios.
    """
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    scenarios = reference_scenarios() if scenarios is None else scenarios
    rows, failed = [], []
    for sc in scenarios:
        mc = coverage_from_record(simulate(sc, n_realizations, master_seed, workers), thresholds_db, sc)
        an = analytic_curve(sc, thresholds_db)
        dev = np.abs(mc.probabilities - an.probabilities)
        worst = float(dev.max())
        ok = bool(worst <= tolerance)
        if not ok:
            failed.append(sc.name)
        rows.append({
            "scenario": sc.name,
            "sharing": sc.sharing,
            "band_mode": sc.band_mode,
            "max_deviation": worst,
            "worst_theta_db": float(thresholds_db[int(dev.argmax())]),
            "passed": ok,
            "points": [
                {"theta_db": float(t), "mc": float(m), "std_err": float(s), "analytic": float(a),
                 "deviation": float(d)}
                for t, m, s, a, d in zip(thresholds_db, mc.probabilities, mc.std_errors,
                                         an.probabilities, dev)
            ],
        })
    return {
        "tolerance": tolerance,
        "n_realizations": n_realizations,
        "seed": master_seed,
        "passed": not failed,
        "failed": failed,
        "scenarios": rows,
    }
