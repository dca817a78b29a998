"""Coverage probability and average user rate of PPP multi-operator networks.

Every coverage expression is a (possibly signed) sum of terms of the form::

    pi * lam_s * int_0^inf exp(-theta * v**(alpha/2) * c_noise * W) * exp(-pi * v * C) dv

with ``v`` the squared serving distance, ``lam_s`` the density of the process
the serving transmitter is drawn from and ``C`` collecting the association
and interference exponents. Without noise each term collapses to
``lam_s / C``; those closed forms are coded separately from the quadrature
path so that the two can be checked against each other.

Noise handling: a transmitter that spreads its power over ``eta`` bands sees
its noise scaled by ``eta``; scenarios that pool spectrum use
``eta = len(densities)``. Under frequency-selective fading the k-th term of
the inclusion-exclusion sum carries ``k * eta * W``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import specfun
from .specfun import ConvergenceError

__all__ = [
    "OperatorSet",
    "NoiseModel",
    "CoverageCurve",
    "PrecisionLossError",
    "SHARING_KINDS",
    "db_to_linear",
    "linear_to_db",
    "association_probability",
    "coverage_baseline",
    "coverage_infrastructure",
    "coverage_spectrum_flat",
    "coverage_spectrum_selective",
    "coverage_full_flat",
    "coverage_full_selective",
    "coverage",
    "coverage_curve",
    "average_rate",
]

SHARING_KINDS = ("none", "infrastructure", "spectrum", "full")
MAX_OPERATORS = 8
# exp(-TAIL_T) is the neglected mass of every normalised radial integral
TAIL_T = 12.0 * math.log(10.0)
PRECISION_LIMIT = 1e-6


class PrecisionLossError(ArithmeticError):
    """An alternating sum lost more digits than the tolerance allows."""


@dataclass(frozen=True)
class OperatorSet:
    densities: tuple = (1.0,)
    band_width: float = 1.0

    def __post_init__(self):
        dens = tuple(float(d) for d in np.atleast_1d(self.densities))
        object.__setattr__(self, "densities", dens)
        if not dens:
            raise ValueError("at least one operator is required")
        if any(not d > 0 for d in dens):
            raise ValueError(f"densities must be strictly positive, got {dens}")
        if not self.band_width > 0:
            raise ValueError(f"band width must be positive, got {self.band_width}")

    @property
    def size(self) -> int:
        return len(self.densities)

    @property
    def total_density(self) -> float:
        return math.fsum(self.densities)

    def others(self, n: int) -> float:
        """Summed density of every operator except ``n``."""
        self.check_index(n)
        return math.fsum(d for j, d in enumerate(self.densities) if j != n)

    def check_index(self, n: int) -> None:
        if not 0 <= n < self.size:
            raise IndexError(f"operator index {n} out of range for {self.size} operators")


@dataclass(frozen=True)
class NoiseModel:
    mode: str = "interference_limited"
    W: float = 0.0

    def __post_init__(self):
        if self.mode not in ("interference_limited", "with_noise"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.W < 0:
            raise ValueError(f"noise power must be non-negative, got {self.W}")

    @property
    def power(self) -> float:
        return 0.0 if self.mode == "interference_limited" else float(self.W)

    @classmethod
    def from_power(cls, W: float) -> "NoiseModel":
        return cls("with_noise", W) if W > 0 else cls()


@dataclass
class CoverageCurve:
    """Coverage probability sampled on a threshold grid given in dB."""

    thresholds_db: np.ndarray
    probabilities: np.ndarray
    std_errors: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.thresholds_db = np.asarray(self.thresholds_db, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.std_errors is None:
            self.std_errors = np.zeros_like(self.probabilities)
        self.std_errors = np.asarray(self.std_errors, dtype=float)
        if self.thresholds_db.shape != self.probabilities.shape:
            raise ValueError("threshold and probability grids differ in shape")
        if np.any(np.diff(self.thresholds_db) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if np.any((self.probabilities < -1e-12) | (self.probabilities > 1 + 1e-12)):
            raise ValueError("coverage probabilities must lie in [0, 1]")

    def to_csv(self, target=None) -> str:
        """Write ``theta_db,value,std_err`` rows; returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theta_db", "value", "std_err"])
        for t, p, s in zip(self.thresholds_db, self.probabilities, self.std_errors):
            writer.writerow([f"{t:.6g}", f"{p:.6g}", f"{s:.6g}"])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def association_probability(ops: OperatorSet, operator_index: int) -> float:
    """Probability that the nearest transmitter overall belongs to ``operator_index``."""
    ops.check_index(operator_index)
    return ops.densities[operator_index] / ops.total_density


# --------------------------------------------------------------------------
# radial integral


def _radial_term(lam_s: float, C: float, noise_coeff: float, alpha: float):
    """pi*lam_s * int_0^inf exp(-noise_coeff * v**(alpha/2)) exp(-pi*C*v) dv.

    Integrated in ``t = pi*C*v`` over ``[0, TAIL_T]``; returns the value and an
    absolute error bound that includes the truncated tail.
    """
    scale = lam_s / C
    if noise_coeff == 0.0:
        f = lambda t: math.exp(-t)
    else:
        k = noise_coeff / (math.pi * C) ** (alpha / 2.0)
        f = lambda t: math.exp(-t - k * t ** (alpha / 2.0))
    val, err = integrate.quad(f, 0.0, TAIL_T, epsabs=1e-15, epsrel=1e-12, limit=200)
    if not err < 1e-9:
        raise ConvergenceError(
            f"radial integral did not converge: lam_s={lam_s}, C={C}, "
            f"noise_coeff={noise_coeff}, estimate={val}, error={err}"
        )
    return scale * val, scale * (err + math.exp(-TAIL_T))


def _use_closed(method: str, W: float) -> bool:
    if method == "auto":
        return W == 0.0
    if method == "closed":
        if W != 0.0:
            raise ValueError("closed forms exist only without noise")
        return True
    if method == "integral":
        return False
    raise ValueError(f"unknown method {method!r}")


def _noise_power(noise: NoiseModel | None) -> float:
    return 0.0 if noise is None else noise.power


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if theta < 0:
        raise ValueError(f"threshold must be non-negative, got {theta}")
    return theta


def _binomial_sum(weights_terms) -> float:
    """Compensated alternating sum with a loss-of-precision guard.

    ``weights_terms`` yields ``(weight, value, abs_err)``.
    """
    parts, bound, mag = [], 0.0, 0.0
    for w, v, e in weights_terms:
        parts.append(w * v)
        bound += abs(w) * e
        mag += abs(w * v)
    total = math.fsum(parts)
    bound += mag * np.finfo(float).eps
    if bound > PRECISION_LIMIT:
        raise PrecisionLossError(
            f"alternating sum error bound {bound:.3e} exceeds {PRECISION_LIMIT:g} "
            f"(sum {total:.6g}, magnitude of terms {mag:.3e})"
        )
    return total


def _check_cap(ops: OperatorSet, max_operators: int) -> None:
    if ops.size > max_operators:
        raise ValueError(
            f"{ops.size} operators exceed the cap of {max_operators} for the "
            "inclusion-exclusion expansion; use the Monte-Carlo estimator"
        )


def _diversity_sums(theta: float, alpha: float, k: int):
    """Alternating binomial sums of zeta_l and zeta0_l for l = 1..k."""
    a = [(-1) ** (l + 1) * math.comb(k, l) * specfun.zeta_l(theta, alpha, l) for l in range(1, k + 1)]
    b = [(-1) ** (l + 1) * math.comb(k, l) * specfun.zeta0_l(theta, alpha, l) for l in range(1, k + 1)]
    return math.fsum(a), math.fsum(b)


# --------------------------------------------------------------------------
# coverage per scenario


def coverage_baseline(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                      noise: NoiseModel | None = None, method: str = "auto") -> float:
    """Single operator, exclusive use of infrastructure and spectrum."""
    theta = _check_theta(theta)
    ops.check_index(operator_index)
    W = _noise_power(noise)
    lam = ops.densities[operator_index]
    z = specfun.zeta(theta, alpha)
    if _use_closed(method, W):
        return 1.0 / (1.0 + z)
    return _radial_term(lam, lam * (1.0 + z), theta * W, alpha)[0]


def coverage_infrastructure(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                            noise: NoiseModel | None = None, method: str = "auto") -> float:
    """Pooled infrastructure: attach to the nearest transmitter of any operator."""
    theta = _check_theta(theta)
    ops.check_index(operator_index)
    W = _noise_power(noise)
    z = specfun.zeta(theta, alpha)
    total = ops.total_density
    if _use_closed(method, W):
        return math.fsum(1.0 / (total / lam_i + z) for lam_i in ops.densities)
    return math.fsum(
        _radial_term(lam_i, total + lam_i * z, theta * W, alpha)[0] for lam_i in ops.densities
    )


def coverage_spectrum_flat(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                           noise: NoiseModel | None = None, method: str = "auto") -> float:
    """Pooled spectrum, own infrastructure, one fade shared by all bands."""
    theta = _check_theta(theta)
    ops.check_index(operator_index)
    W = _noise_power(noise)
    lam = ops.densities[operator_index]
    z = specfun.zeta(theta, alpha)
    z0 = specfun.zeta0(theta, alpha)
    others = ops.others(operator_index)
    if _use_closed(method, W):
        return 1.0 / (1.0 + z + z0 * others / lam)
    C = (1.0 + z) * lam + z0 * others
    return _radial_term(lam, C, theta * ops.size * W, alpha)[0]


def coverage_spectrum_selective(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                                noise: NoiseModel | None = None, method: str = "auto",
                                max_operators: int = MAX_OPERATORS) -> float:
    """Pooled spectrum with independent fades per band; covered if any band is."""
    theta = _check_theta(theta)
    ops.check_index(operator_index)
    _check_cap(ops, max_operators)
    W = _noise_power(noise)
    N = ops.size
    lam = ops.densities[operator_index]
    ratio = ops.others(operator_index) / lam
    closed = _use_closed(method, W)

    def terms():
        for k in range(1, N + 1):
            w = (-1) ** (k + 1) * math.comb(N, k)
            a_k, b_k = _diversity_sums(theta, alpha, k)
            if closed:
                yield w, 1.0 / (1.0 + a_k + ratio * b_k), 0.0
            else:
                C = lam * (1.0 + a_k) + lam * ratio * b_k
                yield (w, *_radial_term(lam, C, theta * k * N * W, alpha))

    return _binomial_sum(terms())


def coverage_full_flat(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                       noise: NoiseModel | None = None, method: str = "auto") -> float:
    """Pooled infrastructure and spectrum, flat fading across bands."""
    theta = _check_theta(theta)
    W = _noise_power(noise)
    z = specfun.zeta(theta, alpha)
    if _use_closed(method, W):
        return 1.0 / (1.0 + z)
    total = ops.total_density
    return _radial_term(total, total * (1.0 + z), theta * ops.size * W, alpha)[0]


def coverage_full_selective(theta, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                            noise: NoiseModel | None = None, method: str = "auto",
                            max_operators: int = MAX_OPERATORS) -> float:
    """Pooled infrastructure and spectrum, independent fades per band."""
    theta = _check_theta(theta)
    _check_cap(ops, max_operators)
    W = _noise_power(noise)
    N = ops.size
    total = ops.total_density
    closed = _use_closed(method, W)

    def terms():
        for k in range(1, N + 1):
            w = (-1) ** (k + 1) * math.comb(N, k)
            a_k, _ = _diversity_sums(theta, alpha, k)
            if closed:
                yield w, 1.0 / (1.0 + a_k), 0.0
            else:
                yield (w, *_radial_term(total, total * (1.0 + a_k), theta * k * N * W, alpha))

    return _binomial_sum(terms())


_DISPATCH = {
    ("none", "flat"): coverage_baseline,
    ("none", "selective"): coverage_baseline,
    ("infrastructure", "flat"): coverage_infrastructure,
    ("infrastructure", "selective"): coverage_infrastructure,
    ("spectrum", "flat"): coverage_spectrum_flat,
    ("spectrum", "selective"): coverage_spectrum_selective,
    ("full", "flat"): coverage_full_flat,
    ("full", "selective"): coverage_full_selective,
}


def coverage_function(sharing: str, band_mode: str = "flat") -> Callable:
    try:
        return _DISPATCH[(sharing, band_mode)]
    except KeyError:
        raise ValueError(f"no coverage expression for sharing={sharing!r}, band_mode={band_mode!r}") from None


def coverage(sharing: str, band_mode: str, theta, ops: OperatorSet, operator_index: int = 0,
             alpha: float = 4.0, noise: NoiseModel | None = None, method: str = "auto") -> float:
    return coverage_function(sharing, band_mode)(theta, ops, operator_index, alpha, noise, method)


def coverage_curve(sharing: str, band_mode: str, thresholds_db: Sequence[float], ops: OperatorSet,
                   operator_index: int = 0, alpha: float = 4.0, noise: NoiseModel | None = None,
                   method: str = "auto") -> CoverageCurve:
    fn = coverage_function(sharing, band_mode)
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    probs = [fn(t, ops, operator_index, alpha, noise, method) for t in db_to_linear(thresholds_db)]
    meta = {
        "source": "analytic",
        "sharing": sharing,
        "band_mode": band_mode,
        "densities": list(ops.densities),
        "operator_index": operator_index,
        "alpha": alpha,
        "noise_power": _noise_power(noise),
    }
    return CoverageCurve(thresholds_db, np.clip(probs, 0.0, 1.0), None, meta)


# --------------------------------------------------------------------------
# rate


def rate_bandwidth(sharing: str, ops: OperatorSet) -> float:
    """Aggregate bandwidth available to the user in a scenario."""
    if sharing in ("none", "infrastructure"):
        return ops.band_width
    if sharing in ("spectrum", "full"):
        return ops.size * ops.band_width
    raise ValueError(f"unknown sharing scenario {sharing!r}")


def average_rate(sharing: str, ops: OperatorSet, operator_index: int = 0, alpha: float = 4.0,
                 noise: NoiseModel | None = None, band_mode: str = "flat",
                 rel_cutoff: float = 1e-8, method: str = "auto") -> float:
    """Mean user rate, in bit/s when ``ops.band_width`` is in Hz.

    ``int_0^rho_max p(2**(rho/B) - 1) d rho`` with ``B`` the aggregate
    bandwidth; ``rho_max`` is the first doubling point at which the
    integrand falls below ``rel_cutoff`` times the integral accumulated so
    far. Under selective fading the per-band SINR marginals coincide with the
    flat case, so the rate (a sum of per-band rates) uses the flat-fading
    coverage.
    """
    if sharing not in SHARING_KINDS:
        raise ValueError(f"unknown sharing scenario {sharing!r}")
    fn = coverage_function(sharing, "flat")
    B = rate_bandwidth(sharing, ops)
    log2 = math.log(2.0)

    def integrand(rho):
        return fn(math.expm1(rho / B * log2), ops, operator_index, alpha, noise, method)

    lo, hi, total = 0.0, B, 0.0
    for _ in range(64):
        piece, err = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
        total += piece
        if integrand(hi) < rel_cutoff * total:
            return total
        lo, hi = hi, 2.0 * hi
    raise ConvergenceError(f"rate integral did not reach its cutoff (partial {total})")
