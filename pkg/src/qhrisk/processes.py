"""
Data-generating processes and the Gaussian limit objects of their
empirical distribution functions.

Regimes: i.i.d. draws, AR(1), GARCH(1,1) (strictly stationary, hence
alpha-mixing) and a long-memory linear process ``X_t = sum_s a_s e_{t-s}``
with ``a_0 = 1``, ``a_s = s^-beta`` truncated at lag ``M``.

Seeds: every sampler is a pure function of its spec. Replication streams
are derived with :func:`substream`, i.e. ``SeedSequence(root, spawn_key=key)``,
so a replication's draws do not depend on how work is scheduled.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, signal

from .distortion import DistortionFn
from .distributions import Dist, Normal, make_parametric
from .errors import DomainError

__all__ = [
    "ProcessSpec",
    "BridgeSpec",
    "substream",
    "sample_process",
    "long_memory_coefs",
    "long_memory_marginal",
    "c1_beta",
    "long_memory_scale",
    "long_memory_linear_sd",
    "sample_bridge",
    "bridge_grid",
    "bridge_functional_weights",
    "degenerate_limit",
    "export_csv",
    "REGIMES",
    "BURN_IN",
]

REGIMES = ("iid", "ar1", "garch11", "long_memory")
BURN_IN = 1000
DEFAULT_TRUNCATION = 10_000


def substream(root_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` (e.g. ``(n_index, replication)``)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=root_seed, spawn_key=key))


@dataclass(frozen=True)
class ProcessSpec:
    """``regime`` with its parameters.

    ``innovation`` names a parametric law as ``(family, *params)``; for the
    ``iid`` regime it is the law of the observations themselves.
    ``params``: ar1 ``(coef,)``; garch11 ``(omega, a, b)``; long_memory
    ``(beta,)`` or ``(beta, M)``.
    """

    regime: str
    n: int
    seed: int = 0
    params: tuple = ()
    innovation: tuple = ("normal", 0.0, 1.0)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DomainError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"n={self.n!r} must be a positive integer")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "innovation", tuple(self.innovation))
        if self.regime == "ar1":
            if len(p) != 1 or not abs(p[0]) < 1:
                raise DomainError("ar1 needs one coefficient with |coef| < 1")
        elif self.regime == "garch11":
            if len(p) != 3:
                raise DomainError("garch11 needs (omega, a, b)")
            omega, a, b = p
            if not (omega > 0 and a >= 0 and b >= 0 and a + b < 1):
                raise DomainError("garch11 needs omega > 0, a, b >= 0 and a + b < 1")
        elif self.regime == "long_memory":
            if len(p) not in (1, 2):
                raise DomainError("long_memory needs (beta,) or (beta, M)")
            if not 0.5 < p[0] < 1.0:
                raise DomainError(f"long-memory beta={p[0]!r} outside (1/2, 1)")
            if len(p) == 2 and not (p[1] >= 1 and float(p[1]).is_integer()):
                raise DomainError("truncation M must be an integer >= 1")
        elif p:
            raise DomainError("iid takes no parameters")

    @property
    def truncation(self) -> int:
        return int(self.params[1]) if len(self.params) == 2 else DEFAULT_TRUNCATION

    def innovation_dist(self) -> Dist:
        fam, *par = self.innovation
        return make_parametric(fam, *par)

    def to_dict(self):
        return asdict(self)


def long_memory_coefs(beta: float, M: int) -> np.ndarray:
    """``a_0 = 1`` and ``a_s = s^-beta`` for ``s = 1..M``."""
    a = np.empty(M + 1)
    a[0] = 1.0
    a[1:] = np.arange(1, M + 1, dtype=float) ** (-beta)
    return a


def long_memory_marginal(spec: ProcessSpec) -> Dist:
    """Law of ``X_t`` for Gaussian innovations (normal with summed variance)."""
    fam, *par = spec.innovation
    if fam != "normal":
        raise DomainError("marginal law is only available for normal innovations")
    sd = par[1] if len(par) > 1 else 1.0
    a = long_memory_coefs(spec.params[0], spec.truncation)
    return Normal(0.0, sd * math.sqrt(float(np.dot(a, a))))


def sample_process(spec: ProcessSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Length-``n`` path; bitwise reproducible from ``spec.seed`` (or ``rng``)."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    eps = spec.innovation_dist()
    n = spec.n
    if spec.regime == "iid":
        return eps.sample(rng, n)
    if spec.regime == "ar1":
        e = eps.sample(rng, n + BURN_IN)
        coef = spec.params[0]
        if coef == 0.0:
            return e[BURN_IN:].copy()
        # x_t = coef x_{t-1} + e_t as a linear filter
        x = signal.lfilter([1.0], [1.0, -coef], e)
        return x[BURN_IN:]
    if spec.regime == "garch11":
        omega, a, b = spec.params
        z = eps.sample(rng, n + BURN_IN)
        x = np.empty_like(z)
        s2 = omega / (1.0 - a - b)
        prev = 0.0
        for t in range(z.size):
            s2 = omega + a * prev * prev + b * s2
            prev = math.sqrt(s2) * z[t]
            x[t] = prev
        return x[BURN_IN:]
    beta, M = spec.params[0], spec.truncation
    e = eps.sample(rng, n + M)
    return signal.fftconvolve(e, long_memory_coefs(beta, M), mode="valid")


# ------------------------------------------------------------------ limits

def c1_beta(beta: float, var_eps: float = 1.0) -> float:
    """``{var_eps (3/2 - beta)(2 - 2 beta) / int_0^inf (x + x^2)^-beta dx}^{1/2}``.

    The integral is split at 1; both pieces use the algebraic-weight rule,
    ``x^-beta`` at 0 and, after ``x = 1/y``, ``y^{2 beta - 2}`` at 0.
    """
    if not 0.5 < beta < 1.0:
        raise DomainError(f"beta={beta!r} outside (1/2, 1)")
    if not var_eps > 0:
        raise DomainError(f"innovation variance {var_eps!r} must be > 0")
    head, e1 = integrate.quad(lambda x: (1.0 + x) ** -beta, 0.0, 1.0,
                              weight="alg", wvar=(-beta, 0.0), epsabs=1e-15, epsrel=1e-13)
    tail, e2 = integrate.quad(lambda y: (1.0 + y) ** -beta, 0.0, 1.0,
                              weight="alg", wvar=(2.0 * beta - 2.0, 0.0),
                              epsabs=1e-15, epsrel=1e-13)
    denom = head + tail
    return math.sqrt(var_eps * (1.0 - (beta - 0.5)) * (1.0 - (2.0 * beta - 1.0)) / denom)


def long_memory_scale(beta: float, var_eps: float = 1.0) -> float:
    """Limit standard deviation of ``n^(beta-1/2) mean(X_1..X_n)``, i.e.
    ``{var_eps int_0^inf (x + x^2)^-beta dx / ((3/2 - beta)(2 - 2 beta))}^{1/2}``.

    This is the partial-sum constant with the integral in the numerator; it
    equals ``var_eps / c1_beta(beta, var_eps)``.
    """
    return var_eps / c1_beta(beta, var_eps)


def long_memory_linear_sd(beta: float, M: int, n: int, var_eps: float = 1.0) -> float:
    """Exact standard deviation of ``n^(beta-1/2) mean(X_1..X_n)`` for the
    process truncated at lag ``M``."""
    if not 0.5 < beta < 1.0:
        raise DomainError(f"beta={beta!r} outside (1/2, 1)")
    c = signal.fftconvolve(long_memory_coefs(beta, M), np.ones(n))
    return float(math.sqrt(var_eps * np.dot(c, c)) * n ** (beta - 1.5))


@dataclass(frozen=True)
class BridgeSpec:
    F0: Dist
    grid: np.ndarray
    seed: int = 0

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) <= 0):
            raise DomainError("bridge grid must be a strictly increasing 1-D array")
        if g[0] < self.F0.lower or g[-1] > self.F0.upper:
            raise DomainError(f"bridge grid leaves the support [{self.F0.lower:g}, "
                              f"{self.F0.upper:g}]")
        object.__setattr__(self, "grid", g)


def _bridge_on_levels(t: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard Brownian bridge at nondecreasing levels ``t``: Brownian motion
    from cumulative increments, tied down with ``W(1)``."""
    dt = np.diff(t, prepend=0.0)
    z = rng.standard_normal((size, t.size + 1))
    w = np.cumsum(np.sqrt(dt) * z[:, :-1], axis=1)
    w1 = w[:, -1] + math.sqrt(max(1.0 - t[-1], 0.0)) * z[:, -1]
    return w - t * w1[:, None]


def sample_bridge(spec: BridgeSpec, size: int = 1,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """``size`` draws of ``B(x) = W(F0(x))`` on ``spec.grid``, shape ``(size, m)``.

    Covariance ``F0(x ^ y)(1 - F0(x v y))``; zero wherever ``F0`` is 0 or 1.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    t = np.asarray(spec.F0.cdf(spec.grid), dtype=float)
    return _bridge_on_levels(t, rng, size)


def bridge_grid(F0: Dist, t_max: float = 1.0, size: int = 2048) -> np.ndarray:
    """Support points ``F0^<-(t)`` at uniform levels in (0, t_max) plus
    dyadic levels towards both ends."""
    k = np.arange(1, 48)
    lv = np.concatenate(((np.arange(1, size) / size) * t_max, 2.0 ** -k * t_max))
    lv = lv[(lv > 0) & (lv < 1)]
    x = [np.asarray(F0.left_inv(lv), dtype=float)]
    if t_max >= 1.0:
        x.append(np.asarray(F0.upper_quantile(2.0 ** -k), dtype=float))
    else:
        x.append(np.asarray([float(F0.right_inv(t_max))]))
    for end in (F0.lower, F0.upper):
        if math.isfinite(end):
            x.append(np.array([end]))
    x = np.unique(np.concatenate(x))
    return x[np.isfinite(x)]


def bridge_functional_weights(g: DistortionFn, F0: Dist, grid: np.ndarray) -> np.ndarray:
    """Trapezoid weights ``w`` with ``int g'(F0(x)) B(x) dx ~ B(grid) @ w``."""
    d = np.asarray(g.rderiv(np.asarray(F0.cdf(grid), dtype=float)), dtype=float)
    d = np.where(np.isfinite(d), d, 0.0)
    dx = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w * d


def degenerate_limit(F0: Dist, beta: float, var_eps: float, grid):
    """Sampler of ``c_{1,beta} f0(x) Z`` on ``grid``: ``draw(rng, size)``."""
    if not F0.has_density:
        raise DomainError(f"{F0!r} has no density; the degenerate limit needs f0")
    c = c1_beta(beta, var_eps)
    shape = c * np.asarray(F0.density(np.asarray(grid, dtype=float)), dtype=float)

    def draw(rng: np.random.Generator, size: int = 1) -> np.ndarray:
        z = rng.standard_normal(size)
        return z[:, None] * shape[None, :]

    draw.shape = shape
    draw.c1 = c
    return draw


def export_csv(path, values, spec: ProcessSpec | dict) -> Path:
    """One column of values; the process parameters are echoed as JSON in a comment line."""
    path = Path(path)
    meta = spec.to_dict() if hasattr(spec, "to_dict") else dict(spec)
    try:
        with path.open("w", newline="") as fh:
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["x"])
            for v in np.asarray(values, dtype=float):
                w.writerow([repr(float(v))])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
