"""
Distribution functions with both generalised inverses and seeded samplers.

``left_inv`` is ``F^<-(s) = inf{x : F(x) >= s}`` and ``right_inv`` is
``F^->(s) = inf{x : F(x) > s}``. ``lower``/``upper`` are ``F^->(0)`` and
``F^<-(1)``. Closed forms are used where they exist; everything else falls
back to vectorised bisection on the cdf.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special, stats

from .errors import DomainError

__all__ = [
    "Tail",
    "Dist",
    "Uniform",
    "Exponential",
    "Pareto",
    "Normal",
    "Laplace",
    "StudentT",
    "Reflected",
    "Discrete",
    "EmpiricalDist",
    "Mixture",
    "CustomDist",
    "PerturbedDist",
    "make_parametric",
    "make_empirical",
    "make_two_point",
    "point_mass",
    "contaminate",
    "read_samples_csv",
]

BISECT_TOL = 1e-12


@dataclass(frozen=True)
class Tail:
    """Tail behaviour on one side of the support.

    kind is ``bounded``, ``power`` (``F ~ c |x|^-rate``), ``exponential``
    (``F ~ c e^{-rate |x|}``), ``gaussian`` or ``unknown``.
    """

    kind: str
    rate: float | None = None


class Dist:
    """Base class. Subclasses provide ``cdf`` and may override the rest."""

    lower: float = -math.inf
    upper: float = math.inf
    nonsmooth_points: tuple[float, ...] = ()
    atoms: tuple[float, ...] = ()
    left_tail = Tail("unknown")
    right_tail = Tail("unknown")
    has_density = False

    def cdf(self, x):
        raise NotImplementedError

    def density(self, x):
        raise DomainError(f"{self!r} has no Lebesgue density")

    def left_inv(self, s):
        return _bisect_inverse(self, s, strict=False)

    def right_inv(self, s):
        return _bisect_inverse(self, s, strict=True)

    def sf(self, x):
        """Survival function ``1 - F(x)``."""
        return _scalar_or_array(1.0 - np.asarray(self.cdf(x), dtype=float))

    def upper_quantile(self, u):
        """``F^<-(1 - u)`` resolved through the survival function, so small
        ``u`` keep full relative precision."""
        return _bisect_upper(self, u)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        # u in [0, 1); F^<- is undefined at 0
        return np.asarray(self.left_inv(np.where(u > 0, u, 0.5)), dtype=float)

    @property
    def is_discrete(self) -> bool:
        return False

    @property
    def quantile_breaks(self) -> tuple[float, ...]:
        """Probability levels in (0, 1) where ``left_inv`` may jump or kink."""
        levels = []
        for a in self.atoms + self.nonsmooth_points:
            levels.append(float(self.cdf(a)))
            levels.append(float(self.cdf(np.nextafter(a, -np.inf))))
        return tuple(sorted({s for s in levels if 0.0 < s < 1.0}))


def _scalar_or_array(out):
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def _bisect_inverse(dist: Dist, s, *, strict: bool):
    """Vectorised bisection for F^<- (strict=False) or F^-> (strict=True)."""
    s = np.asarray(s, dtype=float)
    flat = np.atleast_1d(s).ravel()
    out = np.full_like(flat, math.nan)
    if strict:
        out[flat >= 1.0] = math.inf
        todo = (flat >= 0.0) & (flat < 1.0)
    else:
        out[flat <= 0.0] = -math.inf
        out[flat == 1.0] = dist.upper
        todo = (flat > 0.0) & (flat < 1.0)
    if not np.isfinite(dist.upper) and not strict:
        todo |= flat == 1.0

    def above(x, target):
        v = np.asarray(dist.cdf(x), dtype=float)
        return v > target if strict else v >= target

    tgt = flat[todo]
    if tgt.size:
        lo = np.full_like(tgt, dist.lower if np.isfinite(dist.lower) else -1.0)
        hi = np.full_like(tgt, dist.upper if np.isfinite(dist.upper) else 1.0)
        # widen until cdf(lo) misses the target and cdf(hi) reaches it
        step = np.maximum(1.0, np.abs(lo))
        for _ in range(1100):
            bad = above(lo, tgt)
            if not bad.any():
                break
            lo = np.where(bad, lo - step, lo)
            step = np.where(bad, step * 2.0, step)
        step = np.maximum(1.0, np.abs(hi))
        for _ in range(1100):
            bad = ~above(hi, tgt)
            if not bad.any():
                break
            hi = np.where(bad, hi + step, hi)
            step = np.where(bad, step * 2.0, step)
        for _ in range(400):
            width = hi - lo
            if np.all(width <= BISECT_TOL * np.maximum(1.0, np.abs(hi))):
                break
            mid = lo + 0.5 * width
            up = above(mid, tgt)
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        out[todo] = hi
    return _scalar_or_array(out.reshape(s.shape))


def _bisect_upper(dist: Dist, u):
    """Smallest ``x`` with ``sf(x) <= u`` by vectorised bisection."""
    u = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u).ravel()
    out = np.full_like(flat, math.nan)
    out[flat <= 0.0] = dist.upper
    out[flat >= 1.0] = -math.inf
    todo = (flat > 0.0) & (flat < 1.0)
    tgt = flat[todo]
    if tgt.size:
        def ok(x):
            return np.asarray(dist.sf(x), dtype=float) <= tgt
        lo = np.full_like(tgt, dist.lower if np.isfinite(dist.lower) else -1.0)
        hi = np.full_like(tgt, dist.upper if np.isfinite(dist.upper) else 1.0)
        step = np.maximum(1.0, np.abs(hi))
        for _ in range(1100):
            bad = ~ok(hi)
            if not bad.any():
                break
            hi = np.where(bad, hi + step, hi)
            step = np.where(bad, step * 2.0, step)
        step = np.maximum(1.0, np.abs(lo))
        for _ in range(1100):
            bad = ok(lo) & (lo > dist.lower)
            if not bad.any():
                break
            lo = np.where(bad, lo - step, lo)
            step = np.where(bad, step * 2.0, step)
        for _ in range(400):
            width = hi - lo
            if np.all(width <= BISECT_TOL * np.maximum(1.0, np.abs(hi))):
                break
            mid = lo + 0.5 * width
            good = ok(mid)
            hi = np.where(good, mid, hi)
            lo = np.where(good, lo, mid)
        out[todo] = hi
    return _scalar_or_array(out.reshape(u.shape))


# --------------------------------------------------------------- parametric

class Uniform(Dist):
    has_density = True
    left_tail = Tail("bounded")
    right_tail = Tail("bounded")

    def __init__(self, a: float = 0.0, b: float = 1.0):
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise DomainError(f"uniform needs finite a < b, got ({a}, {b})")
        self.a, self.b = float(a), float(b)
        self.lower, self.upper = self.a, self.b

    def __repr__(self):
        return f"Uniform({self.a:g}, {self.b:g})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.clip((x - self.a) / (self.b - self.a), 0, 1))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return _scalar_or_array(np.where(inside, 1.0 / (self.b - self.a), 0.0))

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where(s <= 0, -np.inf, self.a + np.clip(s, 0, 1) * (self.b - self.a))
        return _scalar_or_array(out)

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where(s >= 1, np.inf, self.a + np.clip(s, 0, 1) * (self.b - self.a))
        return _scalar_or_array(out)

    def upper_quantile(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0, 1)
        return _scalar_or_array(self.b - u * (self.b - self.a))

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)


class Exponential(Dist):
    has_density = True
    left_tail = Tail("bounded")
    lower = 0.0

    def __init__(self, rate: float = 1.0):
        if not (np.isfinite(rate) and rate > 0):
            raise DomainError(f"exponential rate={rate!r} must be > 0")
        self.rate = float(rate)
        self.right_tail = Tail("exponential", self.rate)

    def __repr__(self):
        return f"Exponential({self.rate:g})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0)), 0.0))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0)), 0.0))

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(s <= 0, -np.inf, -np.log1p(-np.clip(s, 0, 1)) / self.rate)
        return _scalar_or_array(out)

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            out = -np.log1p(-np.clip(s, 0, 1)) / self.rate
        return _scalar_or_array(out)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.exp(-self.rate * np.maximum(x, 0.0)))

    def upper_quantile(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0, 1)
        with np.errstate(divide="ignore"):
            return _scalar_or_array(-np.log(u) / self.rate)

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)


class Pareto(Dist):
    """Pareto type I: ``F(x) = 1 - (scale / x)^shape`` for ``x >= scale``."""

    has_density = True
    left_tail = Tail("bounded")

    def __init__(self, shape: float, scale: float = 1.0):
        if not (np.isfinite(shape) and shape > 0):
            raise DomainError(f"pareto shape={shape!r} must be > 0")
        if not (np.isfinite(scale) and scale > 0):
            raise DomainError(f"pareto scale={scale!r} must be > 0")
        self.shape, self.scale = float(shape), float(scale)
        self.lower = self.scale
        self.right_tail = Tail("power", self.shape)

    def __repr__(self):
        return f"Pareto({self.shape:g}, {self.scale:g})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        safe = np.maximum(x, self.scale)
        return _scalar_or_array(np.where(x >= self.scale, 1.0 - (self.scale / safe) ** self.shape, 0.0))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        safe = np.maximum(x, self.scale)
        return _scalar_or_array(np.where(
            x >= self.scale, self.shape * self.scale ** self.shape / safe ** (self.shape + 1), 0.0))

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            q = self.scale * (1.0 - np.clip(s, 0, 1)) ** (-1.0 / self.shape)
        return _scalar_or_array(np.where(s <= 0, -np.inf, q))

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            q = self.scale * (1.0 - np.clip(s, 0, 1)) ** (-1.0 / self.shape)
        return _scalar_or_array(q)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array((self.scale / np.maximum(x, self.scale)) ** self.shape)

    def upper_quantile(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0, 1)
        with np.errstate(divide="ignore"):
            return _scalar_or_array(self.scale * u ** (-1.0 / self.shape))

    def sample(self, rng, size):
        return self.scale * (1.0 + rng.pareto(self.shape, size))


class _ScipyContinuous(Dist):
    """Continuous law on the whole line backed by a frozen scipy distribution."""

    has_density = True
    _frozen = None

    def cdf(self, x):
        return _scalar_or_array(self._frozen.cdf(x))

    def density(self, x):
        return _scalar_or_array(self._frozen.pdf(x))

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(np.where(s <= 0, -np.inf, self._frozen.ppf(np.clip(s, 0, 1))))

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(np.where(s >= 1, np.inf, self._frozen.ppf(np.clip(s, 0, 1))))

    def sf(self, x):
        return _scalar_or_array(self._frozen.sf(x))

    def upper_quantile(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar_or_array(np.where(u <= 0, np.inf, self._frozen.isf(np.clip(u, 0, 1))))

    def sample(self, rng, size):
        return np.asarray(self._frozen.rvs(size=size, random_state=rng), dtype=float)


class Normal(_ScipyContinuous):
    left_tail = Tail("gaussian")
    right_tail = Tail("gaussian")

    def __init__(self, mu: float = 0.0, sd: float = 1.0):
        if not (np.isfinite(sd) and sd > 0):
            raise DomainError(f"normal sd={sd!r} must be > 0")
        self.mu, self.sd = float(mu), float(sd)
        self._frozen = stats.norm(self.mu, self.sd)

    def __repr__(self):
        return f"Normal({self.mu:g}, {self.sd:g})"

    def cdf(self, x):
        return _scalar_or_array(special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sd))

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sd, size)


class Laplace(_ScipyContinuous):
    def __init__(self, mu: float = 0.0, b: float = 1.0):
        if not (np.isfinite(b) and b > 0):
            raise DomainError(f"laplace scale b={b!r} must be > 0")
        self.mu, self.b = float(mu), float(b)
        self._frozen = stats.laplace(self.mu, self.b)
        self.left_tail = self.right_tail = Tail("exponential", 1.0 / self.b)

    def __repr__(self):
        return f"Laplace({self.mu:g}, {self.b:g})"


class StudentT(_ScipyContinuous):
    def __init__(self, df: float, loc: float = 0.0, scale: float = 1.0):
        if not (np.isfinite(df) and df > 0):
            raise DomainError(f"student t df={df!r} must be > 0")
        if not scale > 0:
            raise DomainError(f"student t scale={scale!r} must be > 0")
        self.df = float(df)
        self._frozen = stats.t(self.df, loc, scale)
        self.left_tail = self.right_tail = Tail("power", self.df)

    def __repr__(self):
        return f"StudentT({self.df:g})"


class Reflected(Dist):
    """Law of ``-X`` for a continuous ``X``."""

    def __init__(self, base: Dist):
        if base.atoms:
            raise DomainError("reflection is only supported for atomless laws")
        self.base = base
        self.lower, self.upper = -base.upper, -base.lower
        self.left_tail, self.right_tail = base.right_tail, base.left_tail
        self.nonsmooth_points = tuple(sorted(-p for p in base.nonsmooth_points))
        self.has_density = base.has_density

    def __repr__(self):
        return f"Reflected({self.base!r})"

    def cdf(self, x):
        return self.base.sf(-np.asarray(x, dtype=float))

    def density(self, x):
        return self.base.density(-np.asarray(x, dtype=float))

    def left_inv(self, s):
        # the base is atomless, so F^->(1 - s) = F^<-(1 - s) up to flat parts
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(np.where(s <= 0, -np.inf, -np.asarray(self.base.upper_quantile(s))))

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(np.where(s >= 1, np.inf, -np.asarray(self.base.left_inv(1.0 - s))))

    def sf(self, x):
        return self.base.cdf(-np.asarray(x, dtype=float))

    def upper_quantile(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar_or_array(np.where(u <= 0, self.upper, -np.asarray(self.base.left_inv(u))))

    def sample(self, rng, size):
        return -self.base.sample(rng, size)


# ----------------------------------------------------------------- discrete

class Discrete(Dist):
    """Finitely supported law with atoms ``locs`` and masses ``probs``."""

    left_tail = Tail("bounded")
    right_tail = Tail("bounded")

    def __init__(self, locs, probs):
        locs = np.asarray(locs, dtype=float).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        if locs.size == 0 or locs.shape != probs.shape:
            raise DomainError("discrete law needs matching nonempty locs/probs")
        if not np.all(np.isfinite(locs)):
            raise DomainError("discrete atoms must be finite")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError("discrete masses must be nonnegative and sum to 1")
        keep = probs > 0
        locs, probs = locs[keep], probs[keep]
        order = np.argsort(locs, kind="stable")
        locs, probs = locs[order], probs[order]
        uniq, inverse = np.unique(locs, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, probs)
        self.locs = uniq
        self.probs = merged
        self.cum = np.cumsum(merged)
        self.cum[-1] = 1.0
        self.lower, self.upper = float(uniq[0]), float(uniq[-1])
        self.atoms = tuple(float(v) for v in uniq)

    def __repr__(self):
        return f"Discrete(n_atoms={self.locs.size})"

    @property
    def is_discrete(self) -> bool:
        return True

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.locs, x, side="right")
        cum = np.concatenate(([0.0], self.cum))
        return _scalar_or_array(cum[k])

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        k = np.searchsorted(self.cum, np.clip(s, 0, 1), side="left")
        out = self.locs[np.minimum(k, self.locs.size - 1)]
        out = np.where(s <= 0, -np.inf, out)
        return _scalar_or_array(out)

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        k = np.searchsorted(self.cum, np.clip(s, 0, 1), side="right")
        out = np.where(s >= 1, np.inf, self.locs[np.minimum(k, self.locs.size - 1)])
        return _scalar_or_array(out)

    def upper_quantile(self, u):
        return self.left_inv(1.0 - np.asarray(u, dtype=float))

    def sample(self, rng, size):
        return self.locs[np.searchsorted(self.cum, rng.random(size), side="right")]


class EmpiricalDist(Discrete):
    """Empirical law ``(1/n) sum 1[X_i, inf)`` of a finite sample."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise DomainError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise DomainError("samples must be finite")
        self.sorted_samples = x
        self.n = x.size
        super().__init__(x, np.full(x.size, 1.0 / x.size))

    def __repr__(self):
        return f"EmpiricalDist(n={self.n})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.searchsorted(self.sorted_samples, x, side="right") / self.n)

    def left_inv(self, s):
        s = np.asarray(s, dtype=float)
        # ceil(n s)-th order statistic, guarding against n*s rounding up
        ns = np.clip(s, 0, 1) * self.n
        k = np.ceil(ns * (1.0 - 4.0 * np.finfo(float).eps))
        k = np.clip(k.astype(int), 1, self.n)
        out = np.where(s <= 0, -np.inf, self.sorted_samples[k - 1])
        return _scalar_or_array(out)

    def right_inv(self, s):
        s = np.asarray(s, dtype=float)
        k = np.floor(np.clip(s, 0, 1) * self.n).astype(int)
        out = np.where(s >= 1, np.inf, self.sorted_samples[np.minimum(k, self.n - 1)])
        return _scalar_or_array(out)

    def sample(self, rng, size):
        return self.sorted_samples[rng.integers(0, self.n, size)]


# ------------------------------------------------------------ constructed laws

class Mixture(Dist):
    """Convex combination ``(1 - h) F0 + h G``."""

    def __init__(self, base: Dist, other: Dist, h: float):
        self.base, self.other, self.h = base, other, float(h)
        self.lower = min(base.lower, other.lower)
        self.upper = max(base.upper, other.upper)
        self.atoms = tuple(sorted(set(base.atoms) | set(other.atoms)))
        self.nonsmooth_points = tuple(sorted(
            set(base.nonsmooth_points) | set(other.nonsmooth_points)))
        self.has_density = base.has_density and other.has_density
        self.left_tail = _heavier(base.left_tail, other.left_tail)
        self.right_tail = _heavier(base.right_tail, other.right_tail)

    def __repr__(self):
        return f"Mixture({self.base!r}, {self.other!r}, h={self.h:g})"

    def cdf(self, x):
        return _scalar_or_array((1.0 - self.h) * np.asarray(self.base.cdf(x))
                                + self.h * np.asarray(self.other.cdf(x)))

    def density(self, x):
        if not self.has_density:
            return super().density(x)
        return _scalar_or_array((1.0 - self.h) * np.asarray(self.base.density(x))
                                + self.h * np.asarray(self.other.density(x)))

    def sf(self, x):
        return _scalar_or_array((1.0 - self.h) * np.asarray(self.base.sf(x))
                                + self.h * np.asarray(self.other.sf(x)))

    def sample(self, rng, size):
        pick = rng.random(size) < self.h
        a = self.base.sample(rng, size)
        b = self.other.sample(rng, size)
        return np.where(pick, b, a)


def _heavier(a: Tail, b: Tail) -> Tail:
    order = {"bounded": 0, "gaussian": 1, "exponential": 2, "power": 3, "unknown": 4}
    if a.kind == b.kind == "power":
        return Tail("power", min(a.rate, b.rate))
    if a.kind == b.kind == "exponential":
        return Tail("exponential", min(a.rate, b.rate))
    return a if order[a.kind] >= order[b.kind] else b


class CustomDist(Dist):
    """User-declared distribution function with optional density.

    ``nonsmooth_points`` declares the finite exceptional set where the cdf
    need not be continuously differentiable.
    """

    def __init__(self, cdf, lower=-math.inf, upper=math.inf, *, density=None,
                 nonsmooth_points=(), atoms=(), left_tail=Tail("unknown"),
                 right_tail=Tail("unknown"), name="custom"):
        self._cdf = cdf
        self._density = density
        self.lower, self.upper = float(lower), float(upper)
        self.nonsmooth_points = tuple(sorted(float(p) for p in nonsmooth_points))
        self.atoms = tuple(sorted(float(p) for p in atoms))
        self.has_density = density is not None and not self.atoms
        self.left_tail, self.right_tail = left_tail, right_tail
        self.name = name

    def __repr__(self):
        return f"CustomDist({self.name})"

    def cdf(self, x):
        return _scalar_or_array(self._cdf(np.asarray(x, dtype=float)))

    def density(self, x):
        if self._density is None:
            return super().density(x)
        return _scalar_or_array(self._density(np.asarray(x, dtype=float)))


class PerturbedDist(Dist):
    """``F0 + h v`` for a direction ``v``; validity is checked by the caller."""

    def __init__(self, base: Dist, direction, h: float):
        self.base, self.direction, self.h = base, direction, float(h)
        self.lower, self.upper = base.lower, base.upper
        jumps = tuple(loc for loc, _ in direction.jumps())
        self.atoms = tuple(sorted(set(base.atoms) | set(jumps)))
        self.nonsmooth_points = tuple(sorted(
            set(base.nonsmooth_points) | set(direction.finite_breaks())))
        self.left_tail, self.right_tail = base.left_tail, base.right_tail

    def __repr__(self):
        return f"PerturbedDist({self.base!r}, h={self.h:g})"

    def cdf(self, x):
        return _scalar_or_array(np.asarray(self.base.cdf(x))
                                + self.h * np.asarray(self.direction(x)))

    def sf(self, x):
        return _scalar_or_array(np.asarray(self.base.sf(x))
                                - self.h * np.asarray(self.direction(x)))


# ------------------------------------------------------------------ factories

_PARAMETRIC = {
    "uniform": (Uniform, (0.0, 1.0)),
    "exponential": (Exponential, (1.0,)),
    "pareto": (Pareto, None),
    "normal": (Normal, (0.0, 1.0)),
    "laplace": (Laplace, (0.0, 1.0)),
    "t": (StudentT, None),
}


def make_parametric(family: str, *params: float) -> Dist:
    """Closed-form family by name.

    ``uniform(a, b)``, ``exponential(rate)``, ``pareto(shape, scale=1)``,
    ``normal(mu, sd)``, ``laplace(mu, b)``, ``t(df)``.
    """
    if family not in _PARAMETRIC:
        raise DomainError(f"unknown parametric family {family!r}")
    cls, default = _PARAMETRIC[family]
    if not params and default is None:
        raise DomainError(f"{family} requires parameters")
    try:
        return cls(*(params or default))
    except TypeError as exc:
        raise DomainError(f"bad parameters for {family}: {params}") from exc


def make_empirical(samples) -> EmpiricalDist:
    return EmpiricalDist(samples)


def point_mass(m: float) -> Discrete:
    return Discrete([m], [1.0])


def make_two_point(t: float) -> Discrete:
    """Law of ``-B`` with ``B ~ Bernoulli(t)``: mass ``t`` at -1, ``1-t`` at 0."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t!r} outside [0, 1]")
    return Discrete([-1.0, 0.0], [t, 1.0 - t])


def contaminate(base: Dist, other: Dist, h: float) -> Dist:
    """``(1 - h) F0 + h G``; returns the endpoint laws themselves at h = 0, 1."""
    if not 0.0 <= h <= 1.0:
        raise DomainError(f"h={h!r} outside [0, 1]")
    if h == 0.0:
        return base
    if h == 1.0:
        return other
    return Mixture(base, other, h)


def read_samples_csv(path) -> np.ndarray:
    """One value per line; a non-numeric first line is taken as a header."""
    path = Path(path)
    values = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1 and not values:
                    continue
                raise DomainError(f"{path}:{lineno}: not a number: {row[0]!r}")
    if not values:
        raise DomainError(f"{path}: no samples")
    return np.asarray(values)
