from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhrisk.distributions import (CustomDist, Reflected, contaminate, make_empirical,
                                  make_parametric, make_two_point, point_mass,
                                  read_samples_csv)
from qhrisk.errors import DomainError

PARAMETRIC = [("uniform", 0, 1), ("exponential", 2.0), ("pareto", 3.0), ("normal", 1, 2),
              ("laplace", 0, 1), ("t", 4.0)]


def test_parametric_examples():
    assert make_parametric("uniform", 0, 1).left_inv(0.3) == pytest.approx(0.3)
    assert make_parametric("exponential", 1).left_inv(1 - math.exp(-2)) == pytest.approx(2.0)
    assert make_parametric("pareto", 3, 1).cdf(2.0) == pytest.approx(0.875)


@pytest.mark.parametrize("bad", [("exponential", -1.0), ("normal", 0, 0), ("pareto", 0.0),
                                 ("uniform", 1, 0), ("weibull", 1.0)])
def test_parametric_errors(bad):
    with pytest.raises(DomainError):
        make_parametric(*bad)


def test_empirical_examples():
    F = make_empirical([3, 1, 2])
    assert F.cdf(2) == pytest.approx(2 / 3)
    assert F.left_inv(0.5) == 2
    G = make_empirical([5])
    assert G.cdf(4.9) == 0 and G.cdf(5) == 1
    with pytest.raises(DomainError):
        make_empirical([])


def test_empirical_quantile_is_order_statistic(rng):
    x = rng.normal(size=37)
    F = make_empirical(x)
    s = np.sort(x)
    for t in np.linspace(0.01, 1.0, 57):
        assert F.left_inv(t) == s[math.ceil(37 * t - 1e-12) - 1]


def test_two_point():
    assert make_two_point(0.0).cdf(-0.5) == 0 and make_two_point(0.0).cdf(0) == 1
    assert make_two_point(1.0).cdf(-1) == 1
    T = make_two_point(0.3)
    assert T.cdf(-1) == pytest.approx(0.3) and T.cdf(0) == 1
    with pytest.raises(DomainError):
        make_two_point(1.5)


def test_contaminate():
    F0, G = make_parametric("uniform", 0, 1), point_mass(0.0)
    assert contaminate(F0, G, 0.0) is F0
    assert contaminate(F0, G, 1.0) is G
    assert contaminate(F0, G, 0.5).cdf(0.0) == pytest.approx(0.5)


@pytest.mark.parametrize("spec", PARAMETRIC, ids=lambda s: s[0])
def test_galois_property(spec, rng):
    F = make_parametric(*spec)
    s = rng.uniform(0.001, 0.999, 200)
    q = np.asarray(F.left_inv(s))
    x = q + rng.normal(scale=0.5, size=200)
    cdf = np.asarray(F.cdf(x))
    # F(x) >= s  <=>  x >= F^<-(s), away from ties at rounding level
    far = np.abs(x - q) > 1e-9 * (1 + np.abs(q))
    assert np.all((cdf[far] >= s[far]) == (x[far] >= q[far]))


@pytest.mark.parametrize("spec", PARAMETRIC, ids=lambda s: s[0])
def test_inverse_sandwich_and_monotone(spec):
    F = make_parametric(*spec)
    x = np.asarray(F.left_inv(np.linspace(0.01, 0.99, 99)))
    c = np.asarray(F.cdf(x))
    assert np.all(np.asarray(F.left_inv(c)) <= x + 1e-9 * (1 + abs(x)))
    assert np.all(np.asarray(F.right_inv(c)) >= x - 1e-9 * (1 + abs(x)))
    assert np.all(np.diff(np.asarray(F.cdf(np.linspace(-50, 50, 1001)))) >= 0)


@pytest.mark.parametrize("spec", PARAMETRIC, ids=lambda s: s[0])
def test_sampler_within_dkw_band(spec):
    F = make_parametric(*spec)
    n = 10_000
    x = np.sort(F.sample(np.random.default_rng(7), n))
    c = np.asarray(F.cdf(x))
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - c), np.max(c - (i - 1) / n))
    assert ks <= math.sqrt(math.log(2 / 0.01) / (2 * n))


@given(st.floats(0.01, 0.99), st.floats(-3, 3), st.floats(0.05, 0.95))
def test_mixture_galois(h, m, s):
    M = contaminate(make_parametric("normal", 0, 1), point_mass(m), h)
    q = float(M.left_inv(s))
    assert M.cdf(q) >= s - 1e-9
    assert M.cdf(q - 1e-6) < s + 1e-9


def test_reflected_and_sf_precision():
    R = Reflected(make_parametric("pareto", 3.0))
    assert R.cdf(-2.0) == pytest.approx(0.125)
    E = make_parametric("exponential", 1.0)
    assert E.sf(40.0) == pytest.approx(math.exp(-40), rel=1e-12)
    assert E.upper_quantile(1e-20) == pytest.approx(20 * math.log(10), rel=1e-12)


def test_custom_dist_declares_kink():
    # density 1.5 on [0, 1/2), 0.5 on [1/2, 1]
    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return np.where(x < 0.5, 1.5 * x, 0.5 + 0.5 * x)

    F = CustomDist(cdf, 0.0, 1.0, nonsmooth_points=(0.5,))
    assert F.nonsmooth_points == (0.5,)
    assert F.left_inv(0.75) == pytest.approx(0.5, abs=1e-10)
    assert F.left_inv(0.9) == pytest.approx(0.8, abs=1e-10)


def test_read_samples_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("value\n1\n2\n\n3\n")
    assert read_samples_csv(p).tolist() == [1.0, 2.0, 3.0]
    p.write_text("1\nabc\n")
    with pytest.raises(DomainError):
        read_samples_csv(p)
