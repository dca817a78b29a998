import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netshare import specfun
from netshare.specfun import ConvergenceError, gauss_2f1, zeta, zeta0, zeta0_l, zeta_l

mp.mp.dps = 30

THETAS = [0.01, 0.3, 1.0, 10.0, 100.0]
ALPHAS = [2.5, 3.0, 4.0, 5.0]
GRID = [(t, a) for t in THETAS for a in ALPHAS]

thetas = st.floats(1e-4, 1e4, allow_nan=False)
alphas = st.floats(2.05, 8.0, allow_nan=False)


def oracle_zeta(theta, alpha, l=1, lower=1):
    """Direct quadrature of the interference integral in normalised distance."""
    f = lambda x: (theta / (theta + x ** (mp.mpf(alpha) / 2))) ** l
    pts = [lower, 1, 10, 100, mp.inf] if lower == 0 else [1, 10, 100, mp.inf]
    return float(mp.quad(f, pts))


def euler_2f1(a, b, c, z):
    pref = mp.gamma(c) / (mp.gamma(b) * mp.gamma(c - b))
    return float(pref * mp.quad(lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - z * t) ** (-a), [0, 1]))


class TestGauss2F1:
    def test_zero_argument(self):
        assert gauss_2f1(1, 0.5, 1.5, 0.0) == 1.0

    def test_arctan_identity(self):
        assert gauss_2f1(1, 0.5, 1.5, -1.0) == pytest.approx(math.pi / 4, rel=1e-13)

    def test_euler_integral(self):
        assert gauss_2f1(2, 1.5, 2.5, -1.0) == pytest.approx(euler_2f1(2, 1.5, 2.5, -1), rel=1e-10)

    @pytest.mark.parametrize("z", [-1e-3, -0.5, -0.99, -1.0, -1.01, -3.7, -50.0, -1e4, -1e8])
    @pytest.mark.parametrize("abc", [(1, 0.5, 1.5), (1, 1 / 3, 4 / 3), (2, 1.5, 2.5), (3, 2.6, 3.6),
                                     (1, 0.6, 1.6), (4, 3.5, 4.5), (0.7, 0.2, 1.9)])
    def test_against_mpmath(self, abc, z):
        a, b, c = abc
        assert gauss_2f1(a, b, c, z) == pytest.approx(float(mp.hyp2f1(a, b, c, z)), rel=1e-10)

    def test_arctan_series(self):
        for x in np.logspace(-3, 3, 25):
            assert gauss_2f1(1, 0.5, 1.5, -x * x) == pytest.approx(math.atan(x) / x, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            gauss_2f1(1, 0.5, 1.5, 0.1)
        with pytest.raises(ValueError):
            gauss_2f1(1, 0.5, -2.0, -0.5)

    def test_convergence_failure_is_reported(self, monkeypatch):
        monkeypatch.setattr(specfun, "MAX_TERMS", 3)
        with pytest.raises(ConvergenceError, match="terms"):
            gauss_2f1(1, 0.5, 1.5, -0.9)


class TestZeta:
    def test_quarter_pi(self):
        assert zeta(1.0, 4.0) == pytest.approx(math.pi / 4, rel=1e-14)

    def test_zero_threshold(self):
        for alpha in ALPHAS:
            assert zeta(0.0, alpha) == 0.0
            assert zeta(1e-12, alpha) < 1e-6
        assert zeta_l(1e-12, 4.0, 3) < 1e-20

    def test_arctan_form(self):
        for t in np.logspace(-3, 3, 31):
            s = math.sqrt(t)
            assert zeta(t, 4.0) == pytest.approx(s * math.atan(s), rel=1e-9)

    def test_three_point_five(self):
        assert zeta(3.0, 3.5) == pytest.approx(oracle_zeta(3.0, 3.5), rel=1e-9)

    @pytest.mark.parametrize("theta,alpha", GRID)
    def test_quadrature_oracle(self, theta, alpha):
        assert zeta(theta, alpha) == pytest.approx(oracle_zeta(theta, alpha), rel=1e-7)

    @pytest.mark.parametrize("theta,alpha", GRID)
    @pytest.mark.parametrize("l", [2, 3, 5])
    def test_zeta_l_quadrature_oracle(self, theta, alpha, l):
        assert zeta_l(theta, alpha, l) == pytest.approx(oracle_zeta(theta, alpha, l), rel=1e-7)

    def test_zeta_l_example(self):
        assert zeta_l(1.0, 4.0, 1) == pytest.approx(math.pi / 4, rel=1e-14)
        assert zeta_l(1.0, 4.0, 2) == pytest.approx(oracle_zeta(1.0, 4.0, 2), rel=1e-10)

    @given(thetas, alphas)
    def test_zeta_l_reduces(self, theta, alpha):
        assert zeta_l(theta, alpha, 1) == pytest.approx(zeta(theta, alpha), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            zeta(1.0, 2.0)
        with pytest.raises(ValueError):
            zeta(-1.0, 4.0)
        with pytest.raises(ValueError):
            zeta_l(1.0, 4.0, 0)


class TestZeta0:
    def test_examples(self):
        assert zeta0(1.0, 4.0) == pytest.approx(math.pi / 2, rel=1e-12)
        assert zeta0(4.0, 4.0) == pytest.approx(math.pi, rel=1e-12)
        assert zeta0(0.0, 4.0) == 0.0
        assert zeta0(1e-12, 4.0) < 1e-5

    def test_l_examples(self):
        assert zeta0_l(1.0, 4.0, 1) == pytest.approx(math.pi / 2, rel=1e-12)
        assert zeta0_l(1.0, 4.0, 2) == pytest.approx(math.pi / 4, rel=1e-12)
        # (1/2) B(1/2, 7/2) = (1/2) * Gamma(1/2) Gamma(7/2) / Gamma(4) = 5 pi / 32
        assert zeta0_l(1.0, 4.0, 4) == pytest.approx(5 * math.pi / 32, rel=1e-12)

    def test_large_l_does_not_overflow(self):
        v = zeta0_l(2.0, 4.0, 400)
        exact = float(mp.sqrt(2) / 2 * mp.beta(0.5, 400 - 0.5))
        assert v == pytest.approx(exact, rel=1e-10)

    def test_large_l_asymptote(self):
        # exact value is sqrt(pi*theta)/(2*sqrt(l)) * (1 + 3/(8l) + ...)
        for l in (10, 100, 1000):
            approx = math.sqrt(math.pi) / (2 * math.sqrt(l))
            assert zeta0_l(1.0, 4.0, l) == pytest.approx(approx, rel=1.0 / (2 * l))

    @pytest.mark.parametrize("theta,alpha", GRID)
    @pytest.mark.parametrize("l", [1, 2, 4])
    def test_quadrature_oracle(self, theta, alpha, l):
        assert zeta0_l(theta, alpha, l) == pytest.approx(oracle_zeta(theta, alpha, l, lower=0), rel=1e-7)

    @given(thetas, alphas)
    def test_zeta0_l_reduces(self, theta, alpha):
        assert zeta0_l(theta, alpha, 1) == pytest.approx(zeta0(theta, alpha), rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            zeta0(1.0, 1.9)
        with pytest.raises(ValueError):
            zeta0_l(1.0, 4.0, 0)


@given(thetas, st.floats(1.01, 50.0), alphas, st.integers(1, 6))
def test_strictly_increasing(theta, factor, alpha, l):
    hi = theta * factor
    assert zeta(hi, alpha) > zeta(theta, alpha)
    assert zeta0(hi, alpha) > zeta0(theta, alpha)
    assert zeta_l(hi, alpha, l) > zeta_l(theta, alpha, l)
    assert zeta0_l(hi, alpha, l) > zeta0_l(theta, alpha, l)


@given(thetas, alphas, st.integers(1, 6))
def test_zeta0_dominates(theta, alpha, l):
    assert zeta0(theta, alpha) > zeta(theta, alpha)
    assert zeta0_l(theta, alpha, l) > zeta_l(theta, alpha, l)


def test_thread_safety():
    from concurrent.futures import ThreadPoolExecutor

    args = [(t, a) for t in np.logspace(-2, 2, 40) for a in (3.0, 4.0)]
    serial = [zeta(t, a) for t, a in args]
    with ThreadPoolExecutor(8) as pool:
        parallel = list(pool.map(lambda ta: zeta(*ta), args))
    assert parallel == serial
