"""
Diagnostics for the integrability and regularity conditions behind the
derivative and limit theorems.

Symbolic checks decide by exponent comparison on declared tail classes and
are authoritative where they apply. Numeric probes integrate over doubling
truncations; they can confirm convergence but never prove divergence, so
their negative verdict is ``diverging-or-slow``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .directions import PowerWeight, WeightFn
from .distortion import DistortionFn
from .distributions import Dist, Mixture, Tail
from .errors import DomainError, NumericError
from .quadrature import integrate_line, integrate_unit
from .risk import (DistortionRisk, ExpectileRisk, HaezendonckRisk, KusuokaRisk,
                   OneSidedMomentRisk, PowerYoung, RiskEvaluator, YoungFn)

__all__ = [
    "TailClass",
    "Verdict",
    "distortion_beta",
    "tail_class",
    "g_rho_of",
    "check_A22b_symbolic",
    "probe_integrability",
    "check_clt_weight",
    "check_strong_law_weight",
    "check_A22a",
    "check_hg_sufficient",
    "delta_scan",
    "diagnose",
    "summary_line",
    "DELTAS",
]

DELTAS = (0.9, 0.5, 0.1)
HOLDS, FAILS, UNDECIDABLE = "holds", "fails", "undecidable"


@dataclass(frozen=True)
class TailClass:
    """Declared tails of ``F0`` plus the small-``t`` exponent ``beta`` of
    ``g_rho`` (``g_rho(t) ~ t^beta``)."""

    left: Tail
    right: Tail
    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta={self.beta!r} outside (0, 1]")
        for side in (self.left, self.right):
            if side.kind in ("power", "exponential") and not (side.rate or 0) > 0:
                raise DomainError(f"{side.kind} tail needs a positive rate")


@dataclass
class Verdict:
    name: str
    status: str
    reason: str
    trace: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_json_default, sort_keys=True)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


# -------------------------------------------------------------- classifiers

def distortion_beta(g: DistortionFn) -> float:
    """Exponent ``beta`` with ``g(t) / t^beta`` tending to a value in (0, inf)."""
    if g.kind == "one_sided_moment":
        return 1.0 / g.params[1]
    if g.kind == "proportional_hazard":
        return g.params[0]
    return 1.0


def tail_class(F0: Dist, beta: float) -> TailClass:
    left = Tail("bounded") if math.isfinite(F0.lower) else F0.left_tail
    right = Tail("bounded") if math.isfinite(F0.upper) else F0.right_tail
    return TailClass(left, right, beta)


def g_rho_of(ev: RiskEvaluator):
    """``(g_rho, beta)`` for an evaluator; ``beta`` is None when unknown."""
    if isinstance(ev, DistortionRisk):
        return ev.g, distortion_beta(ev.g)
    if isinstance(ev, (OneSidedMomentRisk, ExpectileRisk)):
        g = ev.g_rho_closed()
        return g, distortion_beta(g)
    if isinstance(ev, KusuokaRisk):
        fam = ev.family

        def sup_g(t):
            return np.max([np.asarray(g(t)) for g in fam], axis=0)
        return sup_g, min(distortion_beta(g) for g in fam)
    if isinstance(ev, HaezendonckRisk):
        return ev.g_rho, _hg_beta(ev.psi)
    raise DomainError(f"no g_rho available for {ev!r}")


# ----------------------------------------------------------------- symbolic

def check_A22b_symbolic(tails: TailClass, lam: float) -> Verdict:
    """Decide ``int F0^{-(1-beta)} / phi_lam < inf`` over the support.

    Left power tail ``F0 ~ |x|^-kappa``: integrand ``~ |x|^{kappa(1-beta) - lam}``,
    so the left end converges iff ``lam - kappa (1 - beta) > 1``. Left
    exponential tail: the factor ``e^{rate (1-beta) |x|}`` forces ``beta = 1``
    and then ``lam > 1``. Any unbounded right tail gives ``F0 -> 1`` and needs
    ``lam > 1``. A finite end always converges.
    """
    beta = tails.beta
    reasons, conds = [], []
    status = HOLDS
    left, right = tails.left, tails.right
    if left.kind == "bounded":
        reasons.append("left end finite")
    elif left.kind == "power":
        e = lam - left.rate * (1.0 - beta)
        ok = e > 1.0
        conds.append("λ-κ(1-β)>1" if beta < 1.0 else "λ>1")
        reasons.append(f"left power tail: lam - kappa(1-beta) = {e:g} "
                       f"{'>' if ok else '<='} 1")
        status = status if ok else FAILS
    elif left.kind == "exponential":
        ok = beta == 1.0 and lam > 1.0
        conds.append("β=1, λ>1")
        if beta < 1.0:
            reasons.append("left exponential tail with beta < 1: integrand grows exponentially")
        else:
            reasons.append(f"left exponential tail, beta = 1: needs lam > 1 (lam = {lam:g})")
        status = status if ok else FAILS
    else:
        return Verdict("A2.2(b)", UNDECIDABLE,
                       f"left tail class '{left.kind}' is not supported")
    if right.kind == "bounded":
        reasons.append("right end finite")
    else:
        ok = lam > 1.0
        conds.append("λ>1")
        reasons.append(f"unbounded right tail: needs lam > 1 (lam = {lam:g})")
        status = status if ok else FAILS
    conds = list(dict.fromkeys(conds)) or ["compact support"]
    return Verdict("A2.2(b)", status, "; ".join(reasons),
                   details={"beta": beta, "lam": lam, "conditions": conds,
                            "left": asdict(left), "right": asdict(right)})


# ------------------------------------------------------------------ numeric

def probe_integrability(g_rho, F0: Dist, phi: WeightFn, gamma: float = 0.5, *,
                        tol: float = 1e-10) -> Verdict:
    """Integrate ``g_rho(gamma F0) / (F0 phi)`` over the support by doubling
    truncations. ``converging`` or ``diverging-or-slow``."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma={gamma!r} outside (0, 1)")
    g = g_rho
    slope0 = float(g.rderiv(0.0)) if isinstance(g, DistortionFn) else math.nan

    def f(x):
        F = float(F0.cdf(x))
        w = float(phi(x))
        if F <= 0.0:
            # cdf underflow far out in the left tail: use the t -> 0 limit
            return gamma * slope0 / w
        return float(g(gamma * F)) / (F * w)

    pts = list(F0.atoms) + list(F0.nonsmooth_points)
    center = float(F0.left_inv(0.5))
    try:
        res = integrate_line(f, F0.lower, F0.upper, pts, center=center, tol=tol)
    except NumericError as exc:
        return Verdict("A2.2(b) probe", "diverging-or-slow",
                       f"quadrature broke down: {exc}")
    status = "converging" if res.converged else "diverging-or-slow"
    trace = [list(t) for t in res.trace]
    return Verdict("A2.2(b) probe", status,
                   f"truncated integral {res.value:.6g} after {len(trace)} pieces",
                   trace=trace, details={"value": res.value, "gamma": gamma})


def _power_moment_verdict(name, F0: Dist, exponent: float, lam: float) -> Verdict | None:
    """``E[(1 + |X|)^{lam * exponent}] < inf`` from declared tails."""
    need = lam * exponent
    reasons = []
    status = HOLDS
    for side, lim in (("left", F0.lower), ("right", F0.upper)):
        tail = getattr(F0, f"{side}_tail")
        if math.isfinite(lim) or tail.kind in ("bounded", "exponential", "gaussian"):
            reasons.append(f"{side}: all polynomial moments finite")
        elif tail.kind == "power":
            ok = need < tail.rate
            reasons.append(f"{side}: power tail {tail.rate:g} "
                           f"{'>' if ok else '<='} moment order {need:g}")
            status = status if ok else FAILS
        else:
            return None
    return Verdict(name, status, "; ".join(reasons), details={"order": need})


def _numeric_moment(name, F0: Dist, fn) -> Verdict:
    def f(t):
        return float(fn(float(F0.left_inv(t))))

    def f_up(u):
        return float(fn(float(F0.upper_quantile(u))))
    try:
        res = integrate_unit(f, f_up, breaks=F0.quantile_breaks)
    except NumericError as exc:
        return Verdict(name, FAILS, f"quadrature broke down: {exc}")
    status = HOLDS if res.converged else FAILS
    return Verdict(name, status, f"quantile-domain integral {res.value:.6g} "
                   f"({'settled' if res.converged else 'did not settle'})",
                   trace=[list(t) for t in res.trace], details={"value": res.value})


def check_clt_weight(F0: Dist, phi: WeightFn) -> Verdict:
    """``int phi^2 dF0 < inf``."""
    if phi.is_constant:
        return Verdict("CLT weight", HOLDS, "phi is constant: integral equals 1")
    if isinstance(phi, PowerWeight):
        v = _power_moment_verdict("CLT weight", F0, 2.0, phi.lam)
        if v is not None:
            return v
    return _numeric_moment("CLT weight", F0, lambda x: float(phi(x)) ** 2)


def check_strong_law_weight(F0: Dist, phi: WeightFn, r: float) -> Verdict:
    """``int phi^{1/(1-r)} dF0 < inf`` for rates ``n^r``, ``r`` in [0, 1/2)."""
    if not 0.0 <= r < 0.5:
        raise DomainError(f"rate exponent r={r!r} outside [0, 1/2)")
    if phi.is_constant:
        return Verdict("strong-law weight", HOLDS, "phi is constant: integral equals 1")
    if isinstance(phi, PowerWeight):
        v = _power_moment_verdict("strong-law weight", F0, 1.0 / (1.0 - r), phi.lam)
        if v is not None:
            return v
    return _numeric_moment("strong-law weight", F0,
                           lambda x: float(phi(x)) ** (1.0 / (1.0 - r)))


def _density_of(F0: Dist):
    try:
        F0.density(0.0)
        return F0.density
    except DomainError:
        pass
    if isinstance(F0, Mixture):
        parts = []
        for w, comp in ((1.0 - F0.h, F0.base), (F0.h, F0.other)):
            if comp.is_discrete:
                continue
            d = _density_of(comp)
            if d is None:
                return None
            parts.append((w, d))
        return lambda x: sum(w * np.asarray(d(x)) for w, d in parts)
    return None


def check_A22a(F0: Dist) -> Verdict:
    """``F0`` is C^1 with positive derivative on the open support off a finite set."""
    if F0.is_discrete:
        return Verdict("A2.2(a)", FAILS, "step function: derivative vanishes off the atoms")
    dens = _density_of(F0)
    if dens is None:
        return Verdict("A2.2(a)", UNDECIDABLE, "no density declared")
    exc = sorted(set(F0.atoms) | set(F0.nonsmooth_points))
    levels = (np.arange(1, 1000) - 0.5) / 999
    x = np.asarray(F0.left_inv(levels), dtype=float)
    x = x[np.isfinite(x) & (x > F0.lower) & (x < F0.upper)]
    if exc:
        x = x[np.min(np.abs(x[:, None] - np.asarray(exc)[None, :]), axis=1) > 1e-9]
    d = np.asarray(dens(x), dtype=float)
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        bad = x[(~np.isfinite(d)) | (d <= 0)]
        return Verdict("A2.2(a)", FAILS,
                       f"density not positive and finite at {bad[:5].tolist()}")
    return Verdict("A2.2(a)", HOLDS,
                   f"positive density off D(F0) = {exc}", details={"D": exc})


# -------------------------------------------------------- Haezendonck & delta

def _hg_beta(psi: YoungFn) -> float | None:
    if isinstance(psi, PowerYoung):
        return 1.0 / psi.q
    x = 2.0 ** np.arange(4, 60)
    with np.errstate(over="ignore", invalid="ignore"):
        px = np.asarray(psi(x), dtype=float)
    for beta in (1.0, 0.5, 1.0 / 3.0, 0.25, 0.1):
        r = px / x ** (1.0 / beta)
        if np.all(np.isfinite(r)) and np.all(np.diff(r[-10:]) <= 1e-12 * r[-10:-1]):
            return beta
    return None


def check_hg_sufficient(psi: YoungFn, F0: Dist, lam: float) -> Verdict:
    """Sufficient condition only: ``limsup psi(x) / x^{1/beta} < inf`` gives
    ``g_rho(t) <= C t^beta``; then the symbolic test with that ``beta``."""
    beta = _hg_beta(psi)
    if beta is None:
        return Verdict("A2.2(b) HG", UNDECIDABLE, "no beta found with psi(x) = O(x^{1/beta})")
    sym = check_A22b_symbolic(tail_class(F0, beta), lam)
    status = HOLDS if sym.status == HOLDS else UNDECIDABLE
    return Verdict("A2.2(b) HG", status,
                   f"sufficient-condition-only (beta = {beta:g}): {sym.reason}",
                   details={"beta": beta, "sufficient_condition_only": True})


def delta_scan(g_rho, F0: Dist, deltas=DELTAS) -> Verdict:
    """Look for ``delta`` with ``int_{-inf}^0 g_rho(delta F0(x)) dx < inf``."""
    hi = min(0.0, F0.upper)
    trace = []
    for d in deltas:
        try:
            res = integrate_line(lambda x: float(g_rho(d * float(F0.cdf(x)))),
                                 F0.lower, hi, F0.atoms, center=hi)
        except NumericError:
            trace.append([d, "quadrature broke down"])
            continue
        trace.append([d, res.value, res.converged])
        if res.converged:
            return Verdict("delta scan", HOLDS, f"integral finite for delta = {d:g}",
                           trace=trace, details={"delta": d, "value": res.value})
    return Verdict("delta scan", "diverging-or-slow",
                   f"no delta in {list(deltas)} gave a settled integral", trace=trace)


# ---------------------------------------------------------------- bundles

def _lam(phi: WeightFn) -> float | None:
    return phi.lam if isinstance(phi, PowerWeight) or phi.is_constant else None


def diagnose(ev: RiskEvaluator, F0: Dist, phi: WeightFn) -> list[Verdict]:
    """A2.2(a), A2.2(b) and the CLT weight condition for ``(ev, F0, phi)``.

    A2.2(b) is decided symbolically when the tail classes and ``beta`` are
    known, and otherwise by the numeric probe.
    """
    out = [check_A22a(F0)]
    lam = _lam(phi)
    if isinstance(ev, HaezendonckRisk):
        out.append(check_hg_sufficient(ev.psi, F0, lam) if lam is not None else
                   Verdict("A2.2(b) HG", UNDECIDABLE, "weight is not a power weight"))
    else:
        g, beta = g_rho_of(ev)
        sym = None
        if lam is not None and beta is not None:
            sym = check_A22b_symbolic(tail_class(F0, beta), lam)
        if sym is None or sym.status == UNDECIDABLE:
            if isinstance(g, DistortionFn):
                out.append(probe_integrability(g, F0, phi))
            elif sym is not None:
                out.append(sym)
        else:
            out.append(sym)
    out.append(check_clt_weight(F0, phi))
    return out


def summary_line(v: Verdict) -> str:
    """``"A2.2(b): holds (λ>1)"``-style one-liner."""
    conds = v.details.get("conditions")
    tail = f" ({', '.join(conds)})" if conds else ""
    return f"{v.name}: {v.status}{tail}"
