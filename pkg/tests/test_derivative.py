from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from qhrisk.derivative import (DerivativeConfig, asymptotic_variance_iid,
                               difference_quotient_check, is_distribution_function,
                               qh_derivative_family, qh_derivative_single,
                               quasi_lipschitz_check)
from qhrisk.directions import Direction, PowerWeight, bump
from qhrisk.distortion import make_builtin
from qhrisk.distributions import make_parametric
from qhrisk.errors import DomainError, PreconditionError
from qhrisk.risk import DistortionRisk

U = make_parametric("uniform", 0, 1)
E = make_parametric("exponential", 1.0)
ONE = Direction.step([0.0, 1.0], [1.0])
IDENT = make_builtin("identity")


def test_single_examples():
    for a in (0.1, 0.5, 1.0):
        assert qh_derivative_single(make_builtin("avatr", a), U, ONE) == pytest.approx(1.0, abs=1e-10)
    assert qh_derivative_single(IDENT, U, Direction.zero()) == 0.0
    v = Direction.piecewise([0, 1], [[0, 1]])
    assert qh_derivative_single(IDENT, U, v) == pytest.approx(0.5, abs=1e-12)


def test_single_matches_quadrature_oracle():
    g = make_builtin("avatr", 0.3)
    v = bump(0.0, 2.0, 1.0)
    q = -math.log(0.7)
    oracle, _ = integrate.quad(lambda x: float(v(x)) / 0.3, 0, q, epsabs=1e-13)
    assert qh_derivative_single(g, E, v) == pytest.approx(oracle, abs=1e-10)


def test_family_examples():
    fam = [IDENT, make_builtin("avatr", 0.5)]
    fd = qh_derivative_family(fam, U, ONE)
    assert fd.value == pytest.approx(1.0, abs=1e-10)
    assert fd.maximizers == (1,) and fd.active == (1,) and fd.stabilized
    g = make_builtin("avatr", 0.2)
    fd = qh_derivative_family([g, g], U, ONE)
    assert fd.active == (0, 1)
    v = bump(0.1, 0.9)
    assert qh_derivative_family([g], U, v).value == qh_derivative_single(g, U, v)


def test_family_sweep_monotone_in_eps():
    fam = [make_builtin("avatr", a) for a in (0.2, 0.25, 0.5)] + [IDENT]
    v = bump(0.0, 1.0, 0.3)
    cfg = DerivativeConfig(eps_schedule=(1.0, 0.1, 0.03, 1e-3, 1e-6))
    fd = qh_derivative_family(fam, U, v, cfg)
    vals = [s["value"] for s in fd.sweep]  # eps decreasing
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert fd.maximizers == (0,) and fd.stabilized


def test_config_validation():
    with pytest.raises(DomainError):
        DerivativeConfig(h_schedule=(1e-2, 1e-1))
    with pytest.raises(DomainError):
        DerivativeConfig(eps_active=0.0)


def test_quotient_identity_is_exact():
    v = bump(0.2, 0.8, 0.2)
    claimed = qh_derivative_single(IDENT, U, v)
    integral, _ = integrate.quad(lambda x: float(v(x)), 0.2, 0.8, epsabs=1e-14)
    assert claimed == pytest.approx(integral, abs=1e-12)
    rep = difference_quotient_check(DistortionRisk(IDENT), U, v, claimed)
    for row in rep.rows:
        assert row["quotient"] == pytest.approx(integral, abs=1e-9)
    assert rep.verdict in ("exact", "converging")


def test_quotient_zero_direction():
    rep = difference_quotient_check(DistortionRisk(IDENT), U, Direction.zero(), 0.0)
    assert rep.verdict == "exact"


def test_quotient_invalid_direction():
    v = bump(0.2, 0.8, 1e6)
    assert not is_distribution_function(U, v, 1e-4)
    with pytest.raises(DomainError, match="smaller"):
        difference_quotient_check(DistortionRisk(IDENT), U, v, 0.0)


def test_quotient_skips_invalid_h():
    v = bump(0.0, 2.0, 5.0)
    g = make_builtin("avatr", 0.1)
    rep = difference_quotient_check(DistortionRisk(g), E, v, qh_derivative_single(g, E, v))
    assert rep.notes and rep.rows[0]["h"] < 0.1


def test_avatr_quotient_converges():
    g = make_builtin("avatr", 0.1)
    v = bump(0.0, 2.0, 1.0)
    claimed = qh_derivative_single(g, E, v)
    rep = difference_quotient_check(DistortionRisk(g), E, v, claimed)
    errs = [r["error"] for r in rep.rows]
    assert len(errs) == 4 and errs[-1] <= 1e-3 and errs[0] > errs[-1]
    assert rep.verdict == "converging"


def test_quasi_lipschitz():
    u = bump(0.1, 0.9, 0.3)
    scales = [1e-1, 1e-2, 1e-3, 1e-4]
    rep = quasi_lipschitz_check(DistortionRisk(IDENT), U, [u], scales)
    ratios = [r["ratio"] for r in rep.rows]
    assert max(ratios) - min(ratios) <= 1e-8 and rep.verdict == "bounded"
    rep = quasi_lipschitz_check(DistortionRisk(make_builtin("avatr", 0.2)), U, [u], scales)
    assert rep.verdict == "bounded"
    with pytest.raises(PreconditionError):
        quasi_lipschitz_check(DistortionRisk(IDENT), U, [Direction.zero()], scales)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.0, 1.0), st.floats(0.1, 1.5),
       st.floats(0.05, 0.95))
def test_linearity(a, b, lo, width, alpha):
    g = make_builtin("avatr", alpha)
    v1 = bump(lo, lo + width, 1.0)
    v2 = Direction.piecewise([0.2, 1.3], [[0.5, -1.0, 0.3]])
    lhs = qh_derivative_single(g, E, v1.scale(a) + v2.scale(b))
    rhs = a * qh_derivative_single(g, E, v1) + b * qh_derivative_single(g, E, v2)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("F0,var", [(U, 1 / 12), (E, 1.0), (make_parametric("normal", 1, 2), 4.0)])
def test_variance_identity_is_var(F0, var):
    assert asymptotic_variance_iid(IDENT, F0) == pytest.approx(var, abs=1e-4)


def test_variance_avatr_one():
    assert asymptotic_variance_iid(make_builtin("avatr", 1.0), U) == pytest.approx(1 / 12, abs=1e-10)


def test_variance_uniform_2d_grid_oracle():
    m = 1000
    x = (np.arange(m) + 0.5) / m
    G = np.minimum.outer(x, x) * (1 - np.maximum.outer(x, x))
    assert G.mean() == pytest.approx(asymptotic_variance_iid(IDENT, U), abs=1e-6)


def test_variance_avatr_moment_oracle():
    # sigma^2 = Var((q - X)^+) / alpha^2 for AV@R at a continuous law
    a = 0.05
    q = -math.log(1 - a)
    m1, _ = integrate.quad(lambda x: (q - x) * math.exp(-x), 0, q)
    m2, _ = integrate.quad(lambda x: (q - x) ** 2 * math.exp(-x), 0, q)
    oracle = (m2 - m1 ** 2) / a ** 2
    assert asymptotic_variance_iid(make_builtin("avatr", a), E) == pytest.approx(oracle, rel=1e-8)
