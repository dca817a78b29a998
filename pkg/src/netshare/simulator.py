"""Monte-Carlo estimation of coverage and user rate for every sharing scenario.

Realisations are generated in fixed-size blocks. Block ``b`` draws all its
randomness from ``SeedSequence(master_seed, spawn_key=(b,))``, so outputs
depend only on the scenario, the seed and the number of realisations, never
on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .analytic import SHARING_KINDS, CoverageCurve, NoiseModel, db_to_linear
from .channel import FadingModel, sample_power_fade
from .pointprocess import (
    Deployment,
    GppParams,
    PointBlock,
    Window,
    apply_exclusion_zones,
    exclusion_mask_block,
    excluded_fraction,
    sample_gpp_block,
    sample_ppp_block,
)

__all__ = [
    "PPPGeometry",
    "Scenario",
    "RealizationResult",
    "RateStats",
    "SimulationRecord",
    "BLOCK_SIZE",
    "compute_sinr",
    "sample_deployment",
    "run_realization",
    "simulate",
    "coverage_from_record",
    "rate_stats_from_record",
    "estimate_coverage",
    "estimate_rate_stats",
]

BLOCK_SIZE = 1000
MAX_RESAMPLE = 100


@dataclass(frozen=True)
class PPPGeometry:
    densities: tuple = (1.0, 1.0)

    def __post_init__(self):
        dens = tuple(float(d) for d in np.atleast_1d(self.densities))
        object.__setattr__(self, "densities", dens)
        if not dens or any(not d > 0 for d in dens):
            raise ValueError(f"PPP densities must be strictly positive, got {dens}")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate one reference user.

    ``coordination_radius`` is the exclusion-zone radius (0 disables
    coordination). ``window_radius`` overrides the default window, which
    holds 500 expected points of the sparsest operator.
    """

    sharing: str = "none"
    fading: FadingModel = FadingModel()
    geometry: object = PPPGeometry()
    coordination_radius: float = 0.0
    noise: NoiseModel = NoiseModel()
    served_operator: int = 0
    alpha: float = 4.0
    band_width: float = 1.0
    window_radius: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.sharing not in SHARING_KINDS:
            raise ValueError(f"sharing must be one of {SHARING_KINDS}, got {self.sharing!r}")
        if not isinstance(self.geometry, (PPPGeometry, GppParams)):
            raise TypeError(f"geometry must be PPPGeometry or GppParams, got {type(self.geometry).__name__}")
        if not self.alpha > 2:
            raise ValueError(f"pathloss exponent must exceed 2, got {self.alpha}")
        if not self.coordination_radius >= 0:
            raise ValueError(f"coordination radius must be non-negative, got {self.coordination_radius}")
        if not 0 <= self.served_operator < self.n_operators:
            raise ValueError(f"served operator {self.served_operator} out of range")
        if not self.band_width > 0:
            raise ValueError(f"band width must be positive, got {self.band_width}")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError(f"window radius must be positive, got {self.window_radius}")

    @property
    def band_mode(self) -> str:
        return self.fading.band_mode

    @property
    def n_operators(self) -> int:
        return 2 if isinstance(self.geometry, GppParams) else len(self.geometry.densities)

    @property
    def densities(self) -> tuple:
        return self.geometry.densities

    @property
    def pooled(self) -> bool:
        return self.sharing in ("spectrum", "full")

    @property
    def window(self) -> Window:
        if self.window_radius is not None:
            return Window(self.window_radius)
        return Window.for_densities(self.densities)

    @property
    def fade_columns(self) -> int:
        return self.n_operators if self.pooled and self.band_mode == "selective" else 1

    def describe(self) -> dict:
        geo = self.geometry
        d = {
            "name": self.name,
            "sharing": self.sharing,
            "band_mode": self.band_mode,
            "fading": self.fading.kind,
            "alpha": self.alpha,
            "coordination_radius": self.coordination_radius,
            "noise_power": self.noise.power,
            "served_operator": self.served_operator,
            "window_radius": self.window.radius,
        }
        if self.fading.kind == "nakagami":
            d["m"] = self.fading.m
        if isinstance(geo, GppParams):
            d.update(geometry="gpp", cluster_intensity=geo.cluster_intensity,
                     pair_probability=geo.pair_probability, pair_radius=geo.pair_radius)
        else:
            d.update(geometry="ppp", densities=list(geo.densities))
        return d


@dataclass
class RealizationResult:
    sinr: np.ndarray
    serving_operator: int
    serving_distance: float

    @property
    def best_sinr(self) -> float:
        return float(np.max(self.sinr))

    def rate(self, band_width: float = 1.0) -> float:
        return float(band_width * np.sum(np.log2(1.0 + self.sinr)))


@dataclass
class RateStats:
    mean: float
    p5: float
    p50: float
    p95: float
    n_realizations: int
    std_error: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 <= self.p5 <= self.p50 <= self.p95):
            raise ValueError("rate percentiles must be ordered and non-negative")


@dataclass
class SimulationRecord:
    """Raw per-realisation output of :func:`simulate`."""

    sinr: np.ndarray
    serving_operator: np.ndarray
    serving_distance: np.ndarray
    resampled: int = 0
    excluded: int = 0
    exclusion_total: int = 0

    @property
    def best_sinr(self) -> np.ndarray:
        return self.sinr.max(axis=1)

    def rates(self, band_width: float = 1.0) -> np.ndarray:
        return band_width * np.log2(1.0 + self.sinr).sum(axis=1)

    @property
    def excluded_fraction(self) -> float:
        return self.excluded / self.exclusion_total if self.exclusion_total else 0.0


# --------------------------------------------------------------------------
# single realisation


def sample_deployment(scenario: Scenario, rng: np.random.Generator) -> Deployment:
    """Draw one deployment with exclusion zones applied."""
    block = _sample_block(scenario, 1, rng)
    dep = block.deployment(0, window=scenario.window)
    if scenario.pooled and scenario.coordination_radius > 0:
        dep = apply_exclusion_zones(dep, scenario.coordination_radius)
    return dep


def compute_sinr(deployment: Deployment, scenario: Scenario, fades) -> RealizationResult:
    """Per-band SINR at the origin for a given deployment and fade matrix.

    ``fades`` is ``(n_points, 1)`` or ``(n_points, n_bands)``, rows in the
    operator-major order of :meth:`Deployment.flatten`.
    """
    xy, op, mask = deployment.flatten()
    fades = np.asarray(fades, dtype=float).reshape(len(op), -1)
    if not scenario.pooled:
        mask = np.ones_like(mask)
    sinr, serving, dist = _kernels.block_sinr(
        np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]), op.astype(np.int64),
        np.array([0, len(op)], dtype=np.int64), mask, fades, scenario.served_operator,
        _kernels.SHARING_CODES[scenario.sharing], scenario.alpha, scenario.noise.power)
    if serving[0] < 0:
        raise ValueError("deployment has no transmitter the user may associate with")
    return RealizationResult(sinr[0], int(serving[0]), float(dist[0]))


def run_realization(scenario: Scenario, rng: np.random.Generator) -> RealizationResult:
    """Sample a deployment and fades, then evaluate the per-band SINR.

    Deployments without an eligible serving transmitter are redrawn.
    """
    for _ in range(MAX_RESAMPLE):
        dep = sample_deployment(scenario, rng)
        n_points = sum(len(p) for p in dep.points)
        fades = sample_power_fade(scenario.fading, n_points, scenario.fade_columns, rng)
        try:
            return compute_sinr(dep, scenario, fades)
        except ValueError:
            continue
    raise RuntimeError(f"no usable deployment after {MAX_RESAMPLE} draws")


# --------------------------------------------------------------------------
# blocks


def _sample_block(scenario: Scenario, n: int, rng: np.random.Generator) -> PointBlock:
    if isinstance(scenario.geometry, GppParams):
        return sample_gpp_block(scenario.geometry, scenario.window, n, rng)
    return sample_ppp_block(scenario.geometry.densities, scenario.window, n, rng)


def _block_rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def _run_block(scenario: Scenario, n: int, rng: np.random.Generator):
    block = _sample_block(scenario, n, rng)
    rs = scenario.coordination_radius if scenario.pooled else 0.0
    mask = exclusion_mask_block(block, rs)
    fades = sample_power_fade(scenario.fading, len(block.op), scenario.fade_columns, rng)
    sinr, serving, dist = _kernels.block_sinr(
        block.x, block.y, block.op, block.offsets, mask, fades, scenario.served_operator,
        _kernels.SHARING_CODES[scenario.sharing], scenario.alpha, scenario.noise.power)
    excl = excluded_fraction(block, mask, rs, scenario.window) if rs > 0 else (0, 0)
    return sinr, serving, dist, excl


def _simulate_block(scenario: Scenario, master_seed: int, index: int, n: int):
    sinr, serving, dist, (excl, excl_total) = _run_block(scenario, n, _block_rng(master_seed, index))
    resampled = 0
    for j in np.flatnonzero(serving < 0):
        for attempt in range(1, MAX_RESAMPLE + 1):
            resampled += 1
            s, v, d, _ = _run_block(scenario, 1, _block_rng(master_seed, index, int(j), attempt))
            if v[0] >= 0:
                sinr[j], serving[j], dist[j] = s[0], v[0], d[0]
                break
        else:
            raise RuntimeError(f"block {index}, realisation {j}: no usable deployment")
    return sinr, serving, dist, resampled, excl, excl_total


def simulate(scenario: Scenario, n_realizations: int, master_seed: int = 0,
             workers: int = 1, block_size: int = BLOCK_SIZE) -> SimulationRecord:
    """Run ``n_realizations`` independent realisations of ``scenario``."""
    if n_realizations < 1:
        raise ValueError("at least one realisation is required")
    sizes = [block_size] * (n_realizations // block_size)
    if n_realizations % block_size:
        sizes.append(n_realizations % block_size)

    def job(i):
        return _simulate_block(scenario, master_seed, i, sizes[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    return SimulationRecord(
        sinr=np.concatenate([p[0] for p in parts]),
        serving_operator=np.concatenate([p[1] for p in parts]),
        serving_distance=np.concatenate([p[2] for p in parts]),
        resampled=sum(p[3] for p in parts),
        excluded=sum(p[4] for p in parts),
        exclusion_total=sum(p[5] for p in parts),
    )


def coverage_from_record(record: SimulationRecord, thresholds_db, scenario: Scenario | None = None,
                         master_seed: int | None = None) -> CoverageCurve:
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    best = np.sort(record.best_sinr)
    n = len(best)
    theta = db_to_linear(thresholds_db)
    covered = n - np.searchsorted(best, theta, side="right")
    p = covered / n
    meta = {"source": "monte-carlo", "n_realizations": n, "resampled": record.resampled}
    if scenario is not None:
        meta.update(scenario.describe())
        if scenario.pooled and scenario.coordination_radius > 0:
            meta["excluded_fraction"] = record.excluded_fraction
    if master_seed is not None:
        meta["seed"] = master_seed
    return CoverageCurve(thresholds_db, p, np.sqrt(p * (1.0 - p) / n), meta)


def estimate_coverage(scenario: Scenario, theta_grid_db, n_realizations: int = 100_000,
                      master_seed: int = 0, workers: int = 1) -> CoverageCurve:
    """Empirical P(max_k SINR_k > theta) on a dB grid, with binomial standard errors."""
    record = simulate(scenario, n_realizations, master_seed, workers)
    return coverage_from_record(record, theta_grid_db, scenario, master_seed)


def rate_stats_from_record(record: SimulationRecord, scenario: Scenario) -> RateStats:
    rates = record.rates(scenario.band_width)
    p5, p50, p95 = np.percentile(rates, [5, 50, 95], method="linear")
    n = len(rates)
    meta = scenario.describe()
    meta["resampled"] = record.resampled
    if scenario.pooled and scenario.coordination_radius > 0:
        meta["excluded_fraction"] = record.excluded_fraction
    return RateStats(float(rates.mean()), float(p5), float(p50), float(p95), n,
                     float(rates.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf, meta)


def estimate_rate_stats(scenario: Scenario, n_realizations: int = 200_000, master_seed: int = 0,
                        workers: int = 1) -> RateStats:
    """Mean and 5/50/95th percentile of ``b * sum_k log2(1 + SINR_k)``."""
    record = simulate(scenario, n_realizations, master_seed, workers)
    return rate_stats_from_record(record, scenario)
