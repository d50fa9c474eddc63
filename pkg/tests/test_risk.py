from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from _cases import COHERENT, coherence_gaps

from qhrisk.distortion import make_builtin
from qhrisk.distributions import Reflected, make_empirical, make_parametric, point_mass
from qhrisk.errors import DomainError, IntegrabilityError
from qhrisk.risk import (DistortionRisk, ExpectileRisk, HaezendonckRisk, KusuokaRisk,
                         OneSidedMomentRisk, PowerYoung, avatr, eval_distortion_risk,
                         eval_empirical_L, expectile_risk, g_rho_from_measure,
                         haezendonck_risk, kusuoka_sup, one_sided_moment_risk)

U = make_parametric("uniform", 0, 1)
E = make_parametric("exponential", 1.0)


@pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 1.0])
def test_avatr_uniform(alpha):
    assert eval_distortion_risk(make_builtin("avatr", alpha), U) == pytest.approx(-alpha / 2, abs=1e-10)


def test_identity_exponential():
    assert eval_distortion_risk(make_builtin("identity"), E) == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize("m", [-2.0, 0.0, 3.5])
def test_point_mass_cash(m):
    assert eval_distortion_risk(make_builtin("avatr", 0.2), point_mass(m)) == pytest.approx(-m)


def test_avatr_exponential_closed_form():
    a = 0.05
    # (1/a) int_0^a log(1 - s) ds, closed-form primitive
    closed = ((1 - a) * math.log(1 - a) + a) / a * -1
    numeric, _ = integrate.quad(lambda s: math.log1p(-s), 0, a)
    assert closed == pytest.approx(numeric / a, rel=1e-12)
    assert avatr(a, E) == pytest.approx(closed, rel=1e-9)
    for method in ("quantile", "x"):
        assert eval_distortion_risk(make_builtin("avatr", a), E, method=method) == \
            pytest.approx(closed, rel=1e-9)


def test_heavy_tail_paths_agree():
    g = make_builtin("avatr", 0.1)
    R = Reflected(make_parametric("pareto", 3.0))
    assert eval_distortion_risk(g, R) == pytest.approx(eval_distortion_risk(g, R, method="x"), rel=1e-8)
    # proportional hazard on Pareto(3): -(1/2) B(1/2, 2/3)
    ph = make_builtin("proportional_hazard", 0.5)
    assert eval_distortion_risk(ph, make_parametric("pareto", 3.0)) == \
        pytest.approx(-0.5 * math.gamma(0.5) * math.gamma(2 / 3) / math.gamma(0.5 + 2 / 3), rel=1e-8)


@pytest.mark.parametrize("spec", [("pareto", 1.0), ("t", 1.0)])
def test_divergence_detected(spec):
    with pytest.raises(IntegrabilityError):
        eval_distortion_risk(make_builtin("identity"), make_parametric(*spec))


def test_empirical_L_examples():
    x = [1, 2, 3]
    assert eval_empirical_L(make_builtin("identity"), x) == pytest.approx(-2)
    assert eval_empirical_L(make_builtin("avatr", 1 / 3), x) == pytest.approx(-1)
    assert eval_empirical_L(make_builtin("avatr", 1.0), x) == pytest.approx(-2)


def test_kusuoka_examples():
    g = make_builtin("avatr", 0.3)
    assert kusuoka_sup([g], U).value == pytest.approx(eval_distortion_risk(g, U))
    kv = kusuoka_sup([make_builtin("identity"), make_builtin("avatr", 0.5)], U)
    assert kv.value == pytest.approx(-0.25) and kv.active == (1,)
    kv = kusuoka_sup([g, g], U)
    assert kv.active == (0, 1)
    with pytest.raises(DomainError):
        kusuoka_sup([], U)


def test_kusuoka_names_diverging_member():
    with pytest.raises(IntegrabilityError, match="member 1"):
        kusuoka_sup([make_builtin("avatr", 0.5), make_builtin("identity")],
                    make_parametric("pareto", 1.0))


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=30))
def test_kusuoka_dominates_members(x):
    fam = [make_builtin("avatr", 0.2), make_builtin("proportional_hazard", 0.5),
           make_builtin("identity")]
    kv = kusuoka_sup(fam, np.asarray(x))
    assert all(kv.value >= v for v in kv.member_values)


def test_expectile_examples(rng):
    x = rng.normal(size=25)
    assert expectile_risk(0.5, x) == pytest.approx(-np.mean(x), abs=1e-12)
    assert expectile_risk(0.75, np.array([-1.0, 0.0])) == pytest.approx(0.75, abs=1e-12)
    assert expectile_risk(0.9, x) >= expectile_risk(0.6, x)

    # N(0,1): E(L - c)^+ = pdf(c) - c sf(c); root of the first-order condition
    def foc(c):
        up = stats.norm.pdf(c) - c * stats.norm.sf(c)
        return 0.75 * up - 0.25 * (up + c)

    oracle = optimize.brentq(foc, -3, 3, xtol=1e-15)
    assert expectile_risk(0.75, make_parametric("normal", 0, 1)) == pytest.approx(oracle, abs=1e-9)


def test_one_sided_moment_examples():
    assert one_sided_moment_risk(0.7, 3, np.full(5, 2.5)) == pytest.approx(-2.5)
    assert one_sided_moment_risk(1.0, 1.0, np.array([-1.0, 1.0])) == pytest.approx(0.5)
    # law version against the formula by quadrature for N(0,1), p=2
    val = one_sided_moment_risk(0.5, 2.0, make_parametric("normal", 0, 1))
    assert val == pytest.approx(0.5 * math.sqrt(0.5), rel=1e-8)


def test_g_rho_examples():
    for ev in (ExpectileRisk(0.75), OneSidedMomentRisk(0.5, 2), DistortionRisk(make_builtin("avatr", 0.3))):
        assert g_rho_from_measure(ev, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert g_rho_from_measure(ev, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert g_rho_from_measure(OneSidedMomentRisk(0.5, 2), 0.25) == pytest.approx(0.4375)
    assert g_rho_from_measure(ExpectileRisk(0.75), 0.5) == pytest.approx(0.75)


def test_g_rho_99_point_grid():
    t = np.arange(1, 100) / 100
    for ev in (ExpectileRisk(0.75), OneSidedMomentRisk(0.5, 2)):
        closed = ev.g_rho_closed()(t)
        got = np.array([g_rho_from_measure(ev, s) for s in t])
        assert np.max(np.abs(got - closed)) <= 1e-8


def test_haezendonck_examples(rng):
    lin = PowerYoung(1.0)
    assert haezendonck_risk(lin, 0.3, np.full(4, 1.7)) == pytest.approx(-1.7, abs=1e-9)
    x = rng.normal(size=40)
    # psi(u) = u: pi(x) = x + E[(-X - x)^+] / (1 - alpha) is convex piecewise
    # linear with kinks at the sample points; brute force over grid + kinks
    alpha = 0.3
    L = -x
    grid = np.concatenate((np.linspace(L.min() - 1, L.max(), 4001), L))
    vals = [c + np.maximum(L - c, 0).mean() / (1 - alpha) for c in grid]
    assert haezendonck_risk(lin, alpha, x) == pytest.approx(min(vals), abs=1e-9)
    q2 = PowerYoung(2.0)
    assert haezendonck_risk(q2, 0.2, 2 * x) == pytest.approx(2 * haezendonck_risk(q2, 0.2, x), rel=1e-9)


def test_haezendonck_is_avatr_for_linear_psi(rng):
    x = rng.normal(size=60)
    assert haezendonck_risk(PowerYoung(1.0), 0.7, x) == \
        pytest.approx(eval_empirical_L(make_builtin("avatr", 0.3), x), abs=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40))
def test_law_invariance(x):
    x = np.asarray(x)
    for ev in (DistortionRisk(make_builtin("avatr", 0.25)), ExpectileRisk(0.8),
               OneSidedMomentRisk(0.5, 2.0)):
        assert ev.sample_eval(x) == pytest.approx(ev.dist_eval(make_empirical(x)), rel=1e-9, abs=1e-9)


@given(st.integers(1, 60), st.integers(0, 2 ** 32 - 1), st.floats(-5, 5), st.floats(0.1, 10))
def test_coherence(size, seed, m, lam):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=size), r.standard_t(4, size=size)
    for name, ev in COHERENT:
        gaps = coherence_gaps(ev, x, y, m, lam)
        assert max(gaps.values()) <= 1e-9, (name, gaps)
