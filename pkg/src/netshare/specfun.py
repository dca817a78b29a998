"""Special functions and the interference functionals used by the coverage formulas.

``zeta`` and ``zeta_l`` describe interference from transmitters lying outside
the serving distance (a guard region of radius ``r``); ``zeta0`` and ``zeta0_l``
describe interference from transmitters that may lie arbitrarily close to the
user. The ``_l`` variants carry the diversity order ``l`` that appears when the
outage probability is raised to a power (independent fades per band).

All functionals are per unit ``pi * r**2 * density``: the Laplace transform of
the interference evaluated at ``theta * r**alpha`` is
``exp(-pi * r**2 * density * zeta(theta, alpha))``.
"""

from __future__ import annotations

import math

__all__ = [
    "ConvergenceError",
    "gauss_2f1",
    "zeta",
    "zeta_l",
    "zeta0",
    "zeta0_l",
    "log_beta",
]

MAX_TERMS = 10_000
TERM_TOL = 1e-14


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _gamma_ratio(num, den) -> float:
    """prod(Gamma(num)) / prod(Gamma(den)) evaluated through log-Gamma.

    Returns 0 when a denominator argument sits on a pole of Gamma.
    """
    sign = 1.0
    log_mag = 0.0
    for x in den:
        if _is_nonpositive_int(x):
            return 0.0
    for x in num:
        if _is_nonpositive_int(x):
            raise ValueError(f"Gamma pole at {x} in numerator")
        if x < 0 and math.floor(x) % 2 != 0:
            sign = -sign
        log_mag += math.lgamma(x)
    for x in den:
        if x < 0 and math.floor(x) % 2 != 0:
            sign = -sign
        log_mag -= math.lgamma(x)
    return sign * math.exp(log_mag)


def _series(a: float, b: float, c: float, w: float) -> float:
    """Plain hypergeometric power series, 0 <= w < 1."""
    total = 1.0
    term = 1.0
    # ratio of successive terms tends to w < 1 only once n exceeds the parameters
    n_settle = max(abs(a), abs(b), abs(c))
    for n in range(MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * w
        total += term
        if term == 0.0:
            return total
        if n > n_settle and abs(term) <= TERM_TOL * abs(total):
            return total
    raise ConvergenceError(
        f"2F1 series did not converge: a={a}, b={b}, c={c}, w={w}, "
        f"terms={MAX_TERMS}, last term={term:.3e}, partial sum={total:.17g}"
    )


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for z <= 0.

    For -1 <= z <= 0 the Pfaff transformation maps the argument to
    z/(z-1) in [0, 1/2]. For z < -1 the 1/z connection formula is applied
    first, which again lands in [-1, 0); if a - b is an integer the
    connection formula is singular and the Pfaff series is summed directly,
    with w = z/(z-1) closer to 1.
    """
    if _is_nonpositive_int(c):
        raise ValueError(f"c must not be a non-positive integer, got {c}")
    if z > 0:
        raise ValueError(f"only z <= 0 is supported, got {z}")
    if z == 0.0:
        return 1.0
    if z >= -1.0 or float(a - b).is_integer():
        return (1.0 - z) ** (-a) * _series(a, c - b, c, z / (z - 1.0))

    x = 1.0 / z
    first = _gamma_ratio((c, b - a), (b, c - a))
    second = _gamma_ratio((c, a - b), (a, c - b))
    total = 0.0
    if first != 0.0:
        total += first * (-z) ** (-a) * gauss_2f1(a, a - c + 1.0, a - b + 1.0, x)
    if second != 0.0:
        total += second * (-z) ** (-b) * gauss_2f1(b, b - c + 1.0, b - a + 1.0, x)
    return total


def _check(theta: float, alpha: float) -> None:
    if not alpha > 2:
        raise ValueError(f"pathloss exponent must exceed 2, got {alpha}")
    if theta < 0:
        raise ValueError(f"threshold must be non-negative, got {theta}")


def zeta(theta: float, alpha: float) -> float:
    """Interference functional for interferers beyond the serving distance.

    Equals ``sqrt(theta) * arctan(sqrt(theta))`` for ``alpha == 4``.
    """
    _check(theta, alpha)
    if theta == 0:
        return 0.0
    d = 2.0 / alpha
    return 2.0 * theta / (alpha - 2.0) * gauss_2f1(1.0, 1.0 - d, 2.0 - d, -theta)


def zeta_l(theta: float, alpha: float, l: int = 1) -> float:
    """Diversity-order-``l`` generalisation of :func:`zeta`.

    ``2 theta**l / (l alpha - 2) * 2F1(l, l - 2/alpha; l - 2/alpha + 1; -theta)``
    is the closed form of the guard-region integral of ``(1 + t/theta)**-l``.
    """
    _check(theta, alpha)
    if l < 1 or int(l) != l:
        raise ValueError(f"diversity order must be a positive integer, got {l}")
    if theta == 0:
        return 0.0
    d = 2.0 / alpha
    return (
        2.0 * theta**l / (l * alpha - 2.0)
        * gauss_2f1(float(l), l - d, l - d + 1.0, -theta)
    )


def zeta0(theta: float, alpha: float) -> float:
    """Interference functional for interferers with no guard region."""
    _check(theta, alpha)
    d = 2.0 / alpha
    return theta**d * math.gamma(1.0 + d) * math.gamma(1.0 - d)


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def zeta0_l(theta: float, alpha: float, l: int = 1) -> float:
    """Diversity-order-``l`` generalisation of :func:`zeta0`.

    Uses the exact Beta form ``(2 theta**(2/alpha) / alpha) * B(2/alpha, l - 2/alpha)``.
    The large-``l`` behaviour at alpha=4 is ``sqrt(pi * theta) / (2 sqrt(l))``.
    """
    _check(theta, alpha)
    d = 2.0 / alpha
    if not l > d:
        raise ValueError(f"diversity order must exceed 2/alpha, got {l}")
    if theta == 0:
        return 0.0
    return d * theta**d * math.exp(log_beta(d, l - d))
