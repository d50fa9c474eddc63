"""
Law-invariant coherent risk measures on distributions and on samples.

Sign convention: a position ``X`` is a profit-and-loss, so losses are
negative values of ``X`` and ``rho(X)`` is large when losses are large. For a
distortion ``g``::

    rho_g(X) = int_{-inf}^0 g(F(x)) dx - int_0^inf (1 - g(F(x))) dx
             = - int_0^1 F^<-(t) dg(t)

The second (quantile) form is the default evaluation path; the first is kept
as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .distortion import DistortionFn, make_builtin
from .distributions import Dist, Discrete, make_empirical, make_two_point
from .errors import DomainError, IntegrabilityError, NumericError
from .quadrature import integrate_line, integrate_unit

__all__ = [
    "RiskEvaluator",
    "DistortionRisk",
    "KusuokaRisk",
    "OneSidedMomentRisk",
    "ExpectileRisk",
    "HaezendonckRisk",
    "YoungFn",
    "PowerYoung",
    "KusuokaValue",
    "eval_distortion_risk",
    "eval_empirical_L",
    "avatr",
    "kusuoka_sup",
    "expectile_risk",
    "one_sided_moment_risk",
    "haezendonck_risk",
    "g_rho_from_measure",
]

EPS_ACTIVE = 1e-9


# ------------------------------------------------------------ distortion path

def eval_empirical_L(g: DistortionFn, samples) -> float:
    """Exact L-statistic ``-sum X_(i) [g(i/n) - g((i-1)/n)]``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("empty sample")
    w = np.diff(np.asarray(g(np.arange(x.size + 1) / x.size)))
    return float(-np.dot(x, w))


def _distortion_quantile(g: DistortionFn, F: Dist) -> float:
    if F.is_discrete:
        cum = np.concatenate(([0.0], F.cum))
        return float(-np.dot(F.locs, np.diff(np.asarray(g(cum)))))

    def f(t):
        d = g.rderiv(t)
        return 0.0 if d == 0.0 else float(F.left_inv(t)) * d

    def f_upper(u):
        d = g.rderiv(1.0 - u)
        return 0.0 if d == 0.0 else float(F.upper_quantile(u)) * d

    res = integrate_unit(f, f_upper, breaks=g.kinks + F.quantile_breaks)
    if not res.converged:
        raise IntegrabilityError(
            f"distortion integral for {g.label} under {F!r} does not settle "
            f"after doubling truncation (partial value {-res.value:.6g})")
    return -res.value


def _distortion_x(g: DistortionFn, F: Dist) -> float:
    if F.is_discrete:
        pts = np.unique(np.concatenate((F.locs, [0.0])))
        vals = np.asarray(g(np.asarray(F.cdf(pts[:-1])))) - (pts[:-1] >= 0)
        return float(np.dot(vals, np.diff(pts)))

    def f(x):
        if x < 0:
            return float(g(F.cdf(x)))
        return -float(g.co(F.sf(x)))

    kink_x = [float(F.left_inv(k)) for k in g.kinks]
    points = [0.0, *F.atoms, *F.nonsmooth_points, *kink_x]
    center = float(F.left_inv(0.5))
    res = integrate_line(f, min(F.lower, 0.0), max(F.upper, 0.0), points,
                         center=center)
    if not res.converged:
        raise IntegrabilityError(
            f"x-domain distortion integral for {g.label} under {F!r} does "
            f"not settle (partial value {res.value:.6g})")
    return res.value


def eval_distortion_risk(g: DistortionFn, F: Dist, *, method: str = "quantile") -> float:
    """Distortion risk ``rho_g`` of the law ``F``.

    Args:
        method: ``"quantile"`` (default) integrates ``-F^<-(t) g'(t)`` over
            dyadic pieces of (0, 1); ``"x"`` integrates the defining
            ``g(F(x)) - 1[x >= 0]`` over doubling truncations of the line.
            Finitely supported laws are summed exactly on either path.

    Raises:
        IntegrabilityError: a tail contribution does not settle.
    """
    if method == "quantile":
        return _distortion_quantile(g, F)
    if method == "x":
        return _distortion_x(g, F)
    raise DomainError(f"unknown evaluation method {method!r}")


def avatr(alpha: float, F: Dist) -> float:
    """Average value at risk ``(1/alpha) int_0^alpha V@R_s ds``."""
    return eval_distortion_risk(make_builtin("avatr", alpha), F)


@dataclass(frozen=True)
class KusuokaValue:
    value: float
    member_values: tuple[float, ...]
    active: tuple[int, ...]


def kusuoka_sup(family, F, *, eps_active: float = EPS_ACTIVE) -> KusuokaValue:
    """``max_g rho_g`` over a finite family, with the near-argmax set.

    ``F`` may be a :class:`Dist` or a sample array.
    """
    family = list(family)
    if not family:
        raise DomainError("Kusuoka family is empty")
    vals = []
    for i, g in enumerate(family):
        try:
            if isinstance(F, Dist):
                vals.append(eval_distortion_risk(g, F))
            else:
                vals.append(eval_empirical_L(g, F))
        except IntegrabilityError as exc:
            raise IntegrabilityError(f"member {i} ({g.label}): {exc}") from exc
    best = max(vals)
    active = tuple(i for i, v in enumerate(vals) if v >= best - eps_active)
    return KusuokaValue(best, tuple(vals), active)


# ------------------------------------------------------------ moment helpers

def _as_atoms(F) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(F, Dist):
        if not F.is_discrete:
            raise DomainError(f"{F!r} is not finitely supported")
        return F.locs, F.probs
    x = np.asarray(F, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    return x, np.full(x.size, 1.0 / x.size)


def _mean(F: Dist) -> float:
    if F.is_discrete:
        return float(np.dot(F.locs, F.probs))
    neg = integrate_line(lambda y: float(F.cdf(y)), F.lower, min(0.0, F.upper),
                         F.atoms, center=min(0.0, F.upper))
    pos = integrate_line(lambda y: float(F.sf(y)), max(0.0, F.lower),
                         F.upper, F.atoms, center=max(0.0, F.lower))
    if not (neg.converged and pos.converged):
        raise IntegrabilityError(f"{F!r} has no finite mean (tail does not settle)")
    return pos.value - neg.value


def _lower_partial(F: Dist, c: float, p: float = 1.0) -> float:
    """``E[((c - X)^+)^p] = int_{-inf}^c p (c - y)^{p-1} F(y) dy``."""
    if p == 1.0:
        def f(y):
            return float(F.cdf(y))
    else:
        def f(y):
            return p * (c - y) ** (p - 1.0) * float(F.cdf(y))
    res = integrate_line(f, F.lower, c, F.atoms + F.nonsmooth_points, center=c)
    if not res.converged:
        raise IntegrabilityError(f"lower partial moment of order {p} diverges for {F!r}")
    return res.value


def _upper_partial(F: Dist, c: float) -> float:
    """``E[(X - c)^+] = int_c^inf (1 - F(y)) dy``."""
    res = integrate_line(lambda y: float(F.sf(y)), c, F.upper,
                         F.atoms + F.nonsmooth_points, center=c)
    if not res.converged:
        raise IntegrabilityError(f"upper partial moment diverges for {F!r}")
    return res.value


# -------------------------------------------------------------- expectile

def _expectile_atoms(losses, w, alpha):
    order = np.argsort(losses, kind="stable")
    L, w = losses[order], w[order]
    if L[0] == L[-1]:
        return float(L[0])
    wl = np.cumsum(w)
    sl = np.cumsum(w * L)
    W, S = wl[-1], sl[-1]
    # h(x) = alpha E(L-x)^+ - (1-alpha) E(x-L)^+ at every atom
    h = alpha * ((S - sl) - (W - wl) * L) - (1 - alpha) * (wl * L - sl)
    k = int(np.nonzero(h >= 0)[0][-1])
    if h[k] == 0.0 or k == L.size - 1:
        return float(L[k])
    w_up, s_up = W - wl[k], S - sl[k]
    x = (alpha * s_up + (1 - alpha) * sl[k]) / (alpha * w_up + (1 - alpha) * wl[k])
    return float(min(max(x, L[k]), L[k + 1]))


def expectile_risk(alpha: float, F, *, maxiter: int = 200) -> float:
    """Expectile-based risk: the minimiser ``x`` of the asymmetric squared loss
    of ``-X - x``, i.e. the root of ``alpha E(-X-x)^+ = (1-alpha) E(-X-x)^-``.

    Finitely supported laws and samples are solved exactly on the linear
    piece containing the root; other laws by Brent's method.
    """
    if not 0.5 <= alpha < 1.0:
        raise DomainError(f"alpha={alpha!r} outside [1/2, 1)")
    if not isinstance(F, Dist) or F.is_discrete:
        locs, w = _as_atoms(F)
        return _expectile_atoms(-locs, w, alpha) + 0.0

    # in c = -x: phi(c) = alpha E(c-X)^+ - (1-alpha) E(X-c)^+ is increasing
    def phi(c):
        return alpha * _lower_partial(F, c) - (1 - alpha) * _upper_partial(F, c)

    m = _mean(F)
    spread = max(1.0, abs(float(F.left_inv(0.75)) - float(F.left_inv(0.25))))
    lo, hi = m - spread, m + spread
    for _ in range(100):
        if phi(lo) <= 0:
            break
        lo -= spread
        spread *= 2
    for _ in range(100):
        if phi(hi) >= 0:
            break
        hi += spread
        spread *= 2
    try:
        c, info = optimize.brentq(phi, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps,
                                  maxiter=maxiter, full_output=True)
    except (ValueError, RuntimeError) as exc:
        raise NumericError(f"expectile root-find failed: {exc}") from exc
    if not info.converged:
        raise NumericError("expectile root-find did not converge",
                           estimate=-c, bound=abs(phi(c)))
    return -c


# --------------------------------------------------------- one-sided moment

def one_sided_moment_risk(a: float, p: float, F) -> float:
    """``-E[X] + a || (X - E[X])^- ||_p``."""
    if not 0.0 < a <= 1.0:
        raise DomainError(f"a={a!r} outside (0, 1]")
    if not p >= 1.0:
        raise DomainError(f"p={p!r} outside [1, inf)")
    if not isinstance(F, Dist) or F.is_discrete:
        x, w = _as_atoms(F)
        m = float(np.dot(w, x))
        dev = np.maximum(m - x, 0.0)
        scale = dev.max()
        if scale == 0.0:
            return -m
        # factor out the largest deviation to avoid overflow for large p
        return float(-m + a * scale * np.dot(w, (dev / scale) ** p) ** (1.0 / p))
    m = _mean(F)
    return -m + a * _lower_partial(F, m, p) ** (1.0 / p)


# ------------------------------------------------------ Haezendonck-Goovaerts

class YoungFn:
    """Strictly increasing continuous Young function with ``psi(1) = 1``."""

    def __init__(self, psi, name: str = "psi"):
        if abs(float(psi(np.float64(1.0))) - 1.0) > 1e-12:
            raise DomainError("Young function must satisfy psi(1) = 1")
        self.psi = psi
        self.name = name

    def __call__(self, u):
        return self.psi(np.asarray(u, dtype=float))

    def premium_scale(self, y, w, level) -> float:
        """Unique ``k > 0`` with ``sum w psi(y / k) = level``; ``y >= 0``, not all 0."""
        def G(logk):
            return float(np.dot(w, self.psi(y / math.exp(logk)))) - level

        lo = hi = math.log(y.max())
        for _ in range(400):
            if G(lo) > 0:
                break
            lo -= 1.0
        else:
            raise NumericError("Orlicz premium not bracketed from below")
        for _ in range(400):
            if G(hi) < 0:
                break
            hi += 1.0
        else:
            raise NumericError("Orlicz premium not bracketed from above")
        logk = optimize.brentq(G, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        return math.exp(logk)


class PowerYoung(YoungFn):
    """``psi(u) = u^q`` with q >= 1; the premium has a closed form."""

    def __init__(self, q: float):
        if not q >= 1.0:
            raise DomainError(f"power Young function needs q >= 1, got {q!r}")
        self.q = float(q)
        super().__init__(lambda u: u ** self.q, name=f"u^{self.q:g}")

    def premium_scale(self, y, w, level) -> float:
        ymax = y.max()
        return ymax * (float(np.dot(w, (y / ymax) ** self.q)) / level) ** (1.0 / self.q)


def _hg_atoms(L, w, psi: YoungFn, alpha: float, tol: float) -> tuple[float, float]:
    lmin, lmax = float(L.min()), float(L.max())
    if lmin == lmax:
        return lmax, lmax
    level = 1.0 - alpha

    def f(x):
        if x >= lmax:
            return lmax
        return x + psi.premium_scale(np.maximum(L - x, 0.0), w, level)

    width = lmax - lmin
    lo = lmin - width
    for _ in range(200):
        grid = np.linspace(lo, lmax, 64)
        vals = np.array([f(x) for x in grid])
        j = int(np.argmin(vals))
        if j > 0:
            break
        lo -= 2.0 * (lmax - lo)
    else:
        raise NumericError("Haezendonck outer minimisation is not bracketed")
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    # golden-section search on the (convex) premium over the bracketing cell
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    xtol = tol * max(1.0, abs(lmax), abs(lmin))
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    cands = [(vals[j], grid[j]), (fc, c), (fd, d), (f(a), a), (f(b), b)]
    best_val, best_x = min(cands)
    return float(best_val), float(best_x)


def haezendonck_risk(psi: YoungFn, alpha: float, F, *, tol: float = 1e-13,
                     return_argmin: bool = False):
    """Haezendonck-Goovaerts risk ``inf_x pi(-X, x)`` of a finitely supported law.

    For each ``x`` with ``P[-X > x] > 0`` the Orlicz premium ``pi > x``
    solves ``E psi((-X - x)^+ / (pi - x)) = 1 - alpha``; the outer infimum
    is located on a 64-point grid (widened to the left while the minimum
    sits at the edge) and refined by golden-section search.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha!r} outside (0, 1)")
    locs, w = _as_atoms(F)
    val, x = _hg_atoms(-locs, w, psi, alpha, tol)
    return (val, x) if return_argmin else val


# --------------------------------------------------------------- evaluators

class RiskEvaluator:
    """A law-invariant coherent risk measure.

    ``dist_eval`` acts on a :class:`Dist`, ``sample_eval`` on a sample; the
    two agree on empirical laws.
    """

    kind = "abstract"
    label = "abstract"

    def dist_eval(self, F: Dist) -> float:
        raise NotImplementedError

    def sample_eval(self, samples) -> float:
        return self.dist_eval(make_empirical(samples))

    def g_rho(self, t: float) -> float:
        return g_rho_from_measure(self, t)

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class DistortionRisk(RiskEvaluator):
    kind = "distortion"

    def __init__(self, g: DistortionFn, method: str = "quantile"):
        self.g = g
        self.method = method
        self.label = g.label

    def dist_eval(self, F):
        return eval_distortion_risk(self.g, F, method=self.method)

    def sample_eval(self, samples):
        return eval_empirical_L(self.g, samples)


class KusuokaRisk(RiskEvaluator):
    kind = "kusuoka_sup"

    def __init__(self, family):
        self.family = tuple(family)
        if not self.family:
            raise DomainError("Kusuoka family is empty")
        self.label = "sup(" + ";".join(g.label for g in self.family) + ")"

    def dist_eval(self, F):
        return kusuoka_sup(self.family, F).value

    def sample_eval(self, samples):
        return kusuoka_sup(self.family, np.asarray(samples, dtype=float)).value


class OneSidedMomentRisk(RiskEvaluator):
    kind = "one_sided_moment"

    def __init__(self, a: float, p: float):
        make_builtin("one_sided_moment", a, p)  # range checks
        self.a, self.p = float(a), float(p)
        self.label = f"osm:{a:g},{p:g}"

    def dist_eval(self, F):
        return one_sided_moment_risk(self.a, self.p, F)

    def sample_eval(self, samples):
        return one_sided_moment_risk(self.a, self.p, samples)

    def g_rho_closed(self) -> DistortionFn:
        return make_builtin("one_sided_moment", self.a, self.p)


class ExpectileRisk(RiskEvaluator):
    kind = "expectile"

    def __init__(self, alpha: float):
        make_builtin("expectile", alpha)
        self.alpha = float(alpha)
        self.label = f"expectile:{alpha:g}"

    def dist_eval(self, F):
        return expectile_risk(self.alpha, F)

    def sample_eval(self, samples):
        return expectile_risk(self.alpha, samples)

    def g_rho_closed(self) -> DistortionFn:
        return make_builtin("expectile", self.alpha)


class HaezendonckRisk(RiskEvaluator):
    kind = "haezendonck"

    def __init__(self, psi: YoungFn, alpha: float):
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha={alpha!r} outside (0, 1)")
        self.psi, self.alpha = psi, float(alpha)
        self.label = f"hg:{psi.name},{alpha:g}"

    def dist_eval(self, F):
        return haezendonck_risk(self.psi, self.alpha, F)

    def sample_eval(self, samples):
        return haezendonck_risk(self.psi, self.alpha, samples)


def g_rho_from_measure(ev: RiskEvaluator, t: float) -> float:
    """``g_rho(t) = rho(-B)`` with ``B ~ Bernoulli(t)``, evaluated exactly."""
    return ev.dist_eval(make_two_point(t))
