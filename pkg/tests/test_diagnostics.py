from __future__ import annotations

import json

import numpy as np
import pytest
from _cases import EXPECTILE, MATRIX, NUMERIC_OF, OSM

from qhrisk.diagnostics import (TailClass, check_A22a, check_A22b_symbolic,
                                check_clt_weight, check_hg_sufficient,
                                check_strong_law_weight, delta_scan, diagnose,
                                distortion_beta, probe_integrability, summary_line,
                                tail_class)
from qhrisk.directions import PowerWeight
from qhrisk.distortion import make_builtin
from qhrisk.distributions import (CustomDist, Exponential, Normal, Pareto, Reflected, Tail,
                                  Uniform, make_empirical)
from qhrisk.errors import DomainError
from qhrisk.risk import ExpectileRisk, PowerYoung


def test_bounded_support_always_holds():
    for lam in (0.0, 0.5, 3.0):
        for beta in (0.2, 1.0):
            tc = TailClass(Tail("bounded"), Tail("bounded"), beta)
            assert check_A22b_symbolic(tc, lam).status == "holds"


@pytest.mark.parametrize("lam,status", [(0.5, "fails"), (1.0, "fails"), (1.01, "holds"), (3.0, "holds")])
def test_expectile_reduces_to_integrable_weight(lam, status):
    # beta = 1: the condition is int 1/phi < inf, i.e. lam > 1
    v = check_A22b_symbolic(TailClass(Tail("power", 3.0), Tail("power", 3.0), 1.0), lam)
    assert v.status == status


def test_osm_reduction_exponent():
    # int F0^{-(p-1)/p} / phi on a left power tail kappa: lam - kappa (1 - 1/p) > 1
    tc = TailClass(Tail("power", 2.0), Tail("bounded"), 0.5)
    assert check_A22b_symbolic(tc, 2.01).status == "holds"
    assert check_A22b_symbolic(tc, 2.0).status == "fails"


def test_avatr_matches_expectile_reduction():
    for F0 in (Reflected(Pareto(3.0)), Exponential(), Normal()):
        for lam in (0.5, 2.0):
            a = check_A22b_symbolic(tail_class(F0, distortion_beta(make_builtin("avatr", 0.1))), lam)
            e = check_A22b_symbolic(tail_class(F0, distortion_beta(EXPECTILE)), lam)
            assert a.status == e.status


def test_unknown_tail_is_undecidable():
    tc = TailClass(Tail("gaussian"), Tail("gaussian"), 1.0)
    assert check_A22b_symbolic(tc, 2.0).status == "undecidable"


def test_tail_class_validation():
    with pytest.raises(DomainError):
        TailClass(Tail("power", -1.0), Tail("bounded"), 1.0)
    with pytest.raises(DomainError):
        TailClass(Tail("bounded"), Tail("bounded"), 0.0)


def test_probe_examples():
    ident = make_builtin("identity")
    R = Reflected(Exponential())
    assert probe_integrability(make_builtin("avatr", 0.3), Uniform(), PowerWeight(0)).status == "converging"
    bad = probe_integrability(ident, R, PowerWeight(0))
    assert bad.status == "diverging-or-slow" and len(bad.trace) > 10
    assert probe_integrability(ident, R, PowerWeight(2)).status == "converging"
    with pytest.raises(DomainError):
        probe_integrability(ident, R, PowerWeight(2), gamma=1.0)


@pytest.mark.parametrize("label,F0,g,lam,expected", MATRIX, ids=[m[0] for m in MATRIX])
def test_symbolic_numeric_agree(label, F0, g, lam, expected):
    sym = check_A22b_symbolic(tail_class(F0, distortion_beta(g)), lam)
    num = probe_integrability(g, F0, PowerWeight(lam))
    assert sym.status == expected
    assert num.status == NUMERIC_OF[expected]


def test_clt_weight_examples():
    assert check_clt_weight(Pareto(1.5), PowerWeight(0)).status == "holds"
    assert check_clt_weight(Pareto(1.5), PowerWeight(1)).status == "fails"
    assert check_clt_weight(Exponential(), PowerWeight(1)).status == "holds"


def test_clt_weight_numeric_fallback():
    F = CustomDist(lambda x: 1 - (1 + x) ** -4.0, 0.0, float("inf"))
    assert check_clt_weight(F, PowerWeight(1)).status in ("holds", "converging")


def test_strong_law_weight_examples():
    assert check_strong_law_weight(Normal(), PowerWeight(0), 0.0).status == "holds"
    assert check_strong_law_weight(Exponential(), PowerWeight(1), 0.25).status == "holds"
    assert check_strong_law_weight(Pareto(2.0), PowerWeight(3), 0.25).status == "fails"
    with pytest.raises(DomainError):
        check_strong_law_weight(Normal(), PowerWeight(0), 0.5)


def test_A22a_examples():
    v = check_A22a(Uniform())
    assert v.status == "holds" and v.details["D"] == []
    assert check_A22a(make_empirical([1.0, 2.0, 3.0])).status == "fails"

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return np.where(x < 0.5, 1.5 * x, 0.5 + 0.5 * x)

    def dens(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0) & (x <= 1), np.where(x < 0.5, 1.5, 0.5), 0.0)

    K = CustomDist(cdf, 0.0, 1.0, density=dens, nonsmooth_points=(0.5,))
    v = check_A22a(K)
    assert v.status == "holds" and v.details["D"] == [0.5]


def test_hg_sufficient_only():
    v = check_hg_sufficient(PowerYoung(2.0), Exponential(), 2.0)
    assert v.status == "holds" and v.details["sufficient_condition_only"]
    assert "sufficient-condition-only" in v.reason
    assert check_hg_sufficient(PowerYoung(2.0), Exponential(), 0.5).status == "undecidable"


def test_delta_scan():
    assert delta_scan(make_builtin("identity"), Normal()).status == "holds"
    assert delta_scan(make_builtin("identity"), Reflected(Pareto(1.0))).status == "diverging-or-slow"


def test_verdict_json_has_trace():
    v = probe_integrability(OSM, Reflected(Pareto(2.0)), PowerWeight(4))
    d = json.loads(v.to_json())
    assert d["status"] == "converging" and d["trace"]


def test_diagnose_summary_line():
    lines = [summary_line(v) for v in diagnose(ExpectileRisk(0.75), Exponential(), PowerWeight(2))]
    assert "A2.2(b): holds (λ>1)" in lines
