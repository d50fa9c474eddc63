"""
Quasi-Hadamard derivatives of risk functionals and numerical verifiers.

For a distortion ``g`` the derivative at ``F0`` in direction ``v`` is::

    R'_g(v) = int g'(F0(x)) v(x) dx

over the support of ``F0``. Since ``R_g(F) = int (g(F(x)) - 1[x >= 0]) dx``,
increasing ``F`` (moving mass to the left) increases the risk, so the sign
is positive. For a finite Kusuoka family the derivative is the supremum of
the member derivatives over the near-maximising members, with the
tolerance driven to zero along a schedule.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .directions import Direction, PowerWeight, WeightFn, weighted_sup_norm
from .distortion import DistortionFn
from .distributions import Dist, PerturbedDist
from .errors import DomainError, NumericError, PreconditionError
from .quadrature import integrate_line
from .risk import DistortionRisk, KusuokaRisk, RiskEvaluator, eval_distortion_risk

__all__ = [
    "DerivativeConfig",
    "FamilyDerivative",
    "QuotientReport",
    "LipschitzReport",
    "qh_derivative_single",
    "qh_derivative_family",
    "difference_quotient_check",
    "quasi_lipschitz_check",
    "asymptotic_variance_iid",
    "is_distribution_function",
]


@dataclass(frozen=True)
class DerivativeConfig:
    eps_active: float = 1e-9
    eps_schedule: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)
    quad_tol: float = 1e-10
    h_schedule: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    tolerance: float = 1e-3

    def __post_init__(self):
        if not (self.eps_active > 0 and self.quad_tol > 0 and self.tolerance > 0):
            raise DomainError("derivative tolerances must be strictly positive")
        for name in ("eps_schedule", "h_schedule"):
            sched = np.asarray(getattr(self, name), dtype=float)
            if sched.size == 0 or np.any(sched <= 0) or np.any(np.diff(sched) >= 0):
                raise DomainError(f"{name} must be positive and strictly decreasing")


# ------------------------------------------------------------------ single g

def _x_points(g: DistortionFn, F0: Dist, v: Direction | None = None):
    pts = list(F0.atoms) + list(F0.nonsmooth_points)
    for k in g.kinks:
        x = float(F0.left_inv(k))
        if math.isfinite(x):
            pts.append(x)
    if v is not None:
        pts.extend(v.finite_breaks())
    return sorted(set(pts))


def _gprime_F(g: DistortionFn, F0: Dist, x: float) -> float:
    return float(g.rderiv(float(F0.cdf(x))))


def qh_derivative_single(g: DistortionFn, F0: Dist, v: Direction, *,
                         tol: float = 1e-10) -> float:
    """``int g'(F0(x)) v(x) dx`` over the support of ``F0``.

    The integral is split at the breakpoints of ``v``, the exceptional points
    of ``F0`` and the ``x`` where ``F0`` crosses a kink of ``g``; unbounded
    pieces use doubling truncations. Integrable endpoint singularities of
    ``g'(F0(x))`` (``g'(0) = inf``) are left to the adaptive rule, which
    extrapolates them.

    Raises:
        NumericError: the tail contributions do not settle.
    """
    wlo, whi = v.window()
    if wlo == math.inf:
        return 0.0
    lo, hi = max(wlo, F0.lower), min(whi, F0.upper)
    if not lo < hi:
        return 0.0

    def f(x):
        vx = float(v(x))
        if vx == 0.0:
            return 0.0
        return _gprime_F(g, F0, x) * vx

    center = min(max(float(F0.left_inv(0.5)), lo), hi)
    res = integrate_line(f, lo, hi, _x_points(g, F0, v), center=center, tol=tol)
    if not res.converged:
        raise NumericError(f"derivative integral for {g.label} does not settle",
                           estimate=res.value, bound=abs(res.trace[-1][-1]))
    return res.value


# ------------------------------------------------------------------- family

@dataclass
class FamilyDerivative:
    value: float
    active: tuple[int, ...]
    maximizers: tuple[int, ...]
    stabilized: bool
    member_risks: tuple[float, ...]
    sweep: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def qh_derivative_family(family, F0: Dist, v: Direction,
                         cfg: DerivativeConfig | None = None) -> FamilyDerivative:
    """Derivative of ``max_g R_g`` via a sweep over ``cfg.eps_schedule``.

    For each ``eps`` the members with ``R_g(F0) >= max - eps`` are active and
    the sup of their derivatives is recorded. The reported value belongs to
    the smallest ``eps``; ``stabilized`` is set when the active set no longer
    changed over the last two schedule values and equals the set of exact
    maximisers (within ``cfg.eps_active``).
    """
    cfg = cfg or DerivativeConfig()
    family = list(family)
    if not family:
        raise DomainError("Kusuoka family is empty")
    risks = [eval_distortion_risk(g, F0) for g in family]
    top = max(risks)
    maximizers = tuple(i for i, r in enumerate(risks) if r >= top - cfg.eps_active)
    derivs: dict[int, float] = {}
    sweep = []
    prev = None
    unchanged = 0
    for eps in cfg.eps_schedule:
        active = tuple(i for i, r in enumerate(risks) if r >= top - eps)
        if not active:
            raise RuntimeError("empty active set for a nonempty family")
        for i in active:
            if i not in derivs:
                derivs[i] = qh_derivative_single(family[i], F0, v, tol=cfg.quad_tol)
        val = max(derivs[i] for i in active)
        sweep.append({"eps": eps, "active": list(active), "value": val})
        unchanged = unchanged + 1 if active == prev else 0
        prev = active
    stabilized = unchanged >= 1 and prev == maximizers
    return FamilyDerivative(sweep[-1]["value"], prev, maximizers, stabilized,
                            tuple(risks), sweep)


# ----------------------------------------------------------------- verifiers

def _validation_grid(F0: Dist, v: Direction) -> np.ndarray:
    lo, hi = v.window()
    pts = [np.asarray(v.finite_breaks(), dtype=float)]
    levels = (np.arange(1, 2048) - 0.5) / 2047
    q = np.asarray(F0.left_inv(levels), dtype=float)
    pts.append(q[np.isfinite(q)])
    a = max(lo, F0.lower) if math.isfinite(max(lo, F0.lower)) else float(np.nanmin(q))
    b = min(hi, F0.upper) if math.isfinite(min(hi, F0.upper)) else float(np.nanmax(q))
    if a < b:
        pts.append(np.linspace(a, b, 4097))
    return np.unique(np.concatenate(pts))


def is_distribution_function(F0: Dist, v: Direction, h: float, *,
                             tol: float = 1e-12) -> bool:
    """Grid check that ``F0 + h v`` is nondecreasing with values in [0, 1]."""
    x = _validation_grid(F0, v)
    val = np.asarray(F0.cdf(x)) + h * np.asarray(v(x))
    left = np.asarray(F0.cdf(np.nextafter(x, -np.inf))) + h * np.asarray(v.left_limit(x))
    seq = np.empty(2 * x.size)
    seq[0::2], seq[1::2] = left, val
    if np.any(seq < -tol) or np.any(seq > 1 + tol):
        return False
    return bool(np.all(np.diff(seq) >= -tol))


def _window_integral(g: DistortionFn, F0: Dist, v: Direction, h: float, tol) -> float:
    """``int [g(F0 + h v) - g(F0)] dx``: exact change of ``R_g``."""
    wlo, whi = v.window()
    lo, hi = max(wlo, F0.lower), min(whi, F0.upper)
    if not lo < hi:
        return 0.0

    def f(x):
        vx = float(v(x))
        if vx == 0.0:
            return 0.0
        F = float(F0.cdf(x))
        return float(g(F + h * vx)) - float(g(F))

    pts = _x_points(g, F0, v)
    # kinks of g crossed by the perturbed cdf move with h; add them as well
    center = min(max(float(F0.left_inv(0.5)), lo), hi)
    res = integrate_line(f, lo, hi, pts, center=center, tol=tol)
    if not res.converged:
        raise NumericError("perturbed distortion integral does not settle",
                           estimate=res.value)
    return res.value


def _risk_change(ev: RiskEvaluator, F0: Dist, v: Direction, h: float, base, tol):
    if isinstance(ev, DistortionRisk):
        return _window_integral(ev.g, F0, v, h, tol)
    if isinstance(ev, KusuokaRisk):
        members, top = base
        new = [r + _window_integral(g, F0, v, h, tol) for g, r in zip(ev.family, members)]
        return max(new) - top
    return ev.dist_eval(PerturbedDist(F0, v, h)) - base


def _base_value(ev: RiskEvaluator, F0: Dist):
    if isinstance(ev, DistortionRisk):
        return None
    if isinstance(ev, KusuokaRisk):
        members = [eval_distortion_risk(g, F0) for g in ev.family]
        return members, max(members)
    return ev.dist_eval(F0)


@dataclass
class QuotientReport:
    rows: list          # dicts with h, quotient, error
    claimed: float
    verdict: str        # converging | not-converging | exact
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def difference_quotient_check(ev: RiskEvaluator, F0: Dist, v: Direction,
                              claimed: float, cfg: DerivativeConfig | None = None
                              ) -> QuotientReport:
    """Compare ``(R(F0 + h v) - R(F0)) / h`` with ``claimed`` along
    ``cfg.h_schedule``.

    Steps for which ``F0 + h v`` is not a distribution function are skipped
    with a note. The verdict is ``converging`` when the errors decrease over
    the last three steps (or are all below ``1e-12``) and the final error is
    below ``cfg.tolerance``.

    Raises:
        DomainError: no step in the schedule yields a distribution function.
    """
    cfg = cfg or DerivativeConfig()
    notes = []
    hs = []
    for h in cfg.h_schedule:
        if is_distribution_function(F0, v, h):
            hs.append(h)
        else:
            notes.append(f"h={h:g} skipped: F0 + h v is not a distribution function")
    if not hs:
        raise DomainError("F0 + h v is not a distribution function for any h; "
                          "use a smaller direction")
    base = _base_value(ev, F0)
    rows = []
    for h in hs:
        q = _risk_change(ev, F0, v, h, base, cfg.quad_tol) / h
        rows.append({"h": h, "quotient": q, "error": abs(q - claimed)})
    err = np.array([r["error"] for r in rows])
    if np.all(err <= 1e-12):
        verdict = "exact"
    else:
        tail = err[-3:]
        decreasing = bool(np.all(np.diff(tail) <= 1e-12))
        verdict = "converging" if decreasing and err[-1] <= cfg.tolerance else "not-converging"
    return QuotientReport(rows, claimed, verdict, notes)


@dataclass
class LipschitzReport:
    rows: list          # dicts with direction, s, ratio
    max_ratio: float
    verdict: str        # bounded | growing
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def quasi_lipschitz_check(ev: RiskEvaluator, F0: Dist, directions, scales,
                          phi: WeightFn | None = None, *, growth_tol: float = 0.1,
                          quad_tol: float = 1e-10) -> LipschitzReport:
    """Ratios ``|R(F0 + s u) - R(F0)| / ||s u||_phi`` for decreasing ``s``.

    ``bounded`` when, per direction, no ratio exceeds the larger of the
    first two by more than ``growth_tol`` (relative).
    """
    phi = phi or PowerWeight(0.0)
    scales = np.asarray(scales, dtype=float)
    if scales.size == 0 or np.any(np.diff(scales) >= 0) or np.any(scales <= 0):
        raise DomainError("scales must be positive and strictly decreasing")
    base = _base_value(ev, F0)
    rows, notes = [], []
    verdict = "bounded"
    for k, u in enumerate(directions):
        norm_u = weighted_sup_norm(u, phi)
        if norm_u == 0.0:
            raise PreconditionError(f"direction {k} has zero norm")
        ratios = []
        for s in scales:
            if not is_distribution_function(F0, u, s):
                raise DomainError(f"F0 + {s:g} u_{k} is not a distribution function")
            r = abs(_risk_change(ev, F0, u, s, base, quad_tol)) / (s * norm_u)
            ratios.append(r)
            rows.append({"direction": k, "s": float(s), "ratio": r})
        ref = max(ratios[:2])
        if max(ratios) > (1.0 + growth_tol) * ref + 1e-12:
            verdict = "growing"
            notes.append(f"direction {k}: ratios grow as s decreases")
    return LipschitzReport(rows, max(r["ratio"] for r in rows), verdict, notes)


# ------------------------------------------------------------------ variance

def asymptotic_variance_iid(g: DistortionFn, F0: Dist, *, tol: float = 1e-10) -> float:
    """Variance of ``int g'(F0(x)) B(x) dx`` for an ``F0``-Brownian bridge ``B``.

    Uses the symmetry of ``F0(x ^ y)(1 - F0(x v y))``::

        sigma^2 = 2 int g'(F0(y)) (1 - F0(y)) A(y) dy,
        A(y)    = int_{-inf}^y g'(F0(x)) F0(x) dx,

    with ``A`` accumulated from the nearest point already computed.

    Raises:
        NumericError: an integral does not settle.
    """
    pts = _x_points(g, F0)
    lo, hi = F0.lower, F0.upper
    if g.slope_support < 1.0:
        # g' vanishes beyond slope_support: nothing to integrate past it
        hi = min(hi, float(F0.right_inv(g.slope_support)))
    center = float(F0.left_inv(0.5))
    center = min(max(center, lo), hi)

    def inner(x):
        F = float(F0.cdf(x))
        return 0.0 if F == 0.0 else float(g.rderiv(F)) * F

    cache_y: list[float] = []
    cache_a: list[float] = []

    def A(y):
        k = bisect.bisect_right(cache_y, y)
        if k:
            y0, a0 = cache_y[k - 1], cache_a[k - 1]
            res = integrate_line(inner, y0, y, pts, center=y0, tol=tol)
        else:
            y0, a0 = lo, 0.0
            res = integrate_line(inner, lo, y, pts, center=min(y, center), tol=tol)
        if not res.converged:
            raise NumericError("inner variance integral does not settle",
                               estimate=res.value)
        val = a0 + res.value
        cache_y.insert(k, y)
        cache_a.insert(k, val)
        return val

    def outer(y):
        F = float(F0.cdf(y))
        if F == 0.0 or F == 1.0:
            return 0.0
        d = float(g.rderiv(F))
        if d == 0.0:
            return 0.0
        return d * (1.0 - F) * A(y)

    res = integrate_line(outer, lo, hi, pts, center=center, tol=tol)
    if not res.converged:
        raise NumericError("variance integral does not settle", estimate=res.value)
    return 2.0 * res.value
