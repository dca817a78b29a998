"""Pathloss and small-scale power fading."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FadingModel", "PathLoss", "sample_power_fade", "received_power"]

FADING_KINDS = ("rayleigh", "nakagami")
BAND_MODES = ("flat", "selective")


@dataclass(frozen=True)
class FadingModel:
    """Unit-mean power fading.

    ``flat`` reuses one draw per link on every band; ``selective`` draws
    independently per (link, band). Nakagami-m is handled in the power
    domain as Gamma(shape=m, scale=1/m).
    """

    kind: str = "rayleigh"
    m: float = 1.0
    band_mode: str = "flat"

    def __post_init__(self):
        if self.kind not in FADING_KINDS:
            raise ValueError(f"fading kind must be one of {FADING_KINDS}, got {self.kind!r}")
        if self.band_mode not in BAND_MODES:
            raise ValueError(f"band mode must be one of {BAND_MODES}, got {self.band_mode!r}")
        if self.kind == "nakagami" and not self.m >= 0.5:
            raise ValueError(f"Nakagami shape must be >= 0.5, got {self.m}")


@dataclass(frozen=True)
class PathLoss:
    alpha: float = 4.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError(f"pathloss exponent must exceed 2, got {self.alpha}")

    def __call__(self, distance):
        return np.asarray(distance, dtype=float) ** (-self.alpha)


def sample_power_fade(model: FadingModel, n_links: int, n_bands: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw an ``(n_links, n_bands)`` matrix of power fades."""
    n_draw = 1 if model.band_mode == "flat" else n_bands
    if model.kind == "rayleigh":
        fades = rng.standard_exponential((n_links, n_draw))
    else:
        fades = rng.gamma(model.m, 1.0 / model.m, (n_links, n_draw))
    if n_draw != n_bands:
        fades = np.repeat(fades, n_bands, axis=1)
    return fades


def received_power(fade, distance, alpha, tx_power=1.0):
    """``tx_power * fade * distance**-alpha``; distances must be positive."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("received power is undefined at zero distance")
    out = tx_power * np.asarray(fade, dtype=float) * distance ** (-float(alpha))
    return out if out.ndim else float(out)
