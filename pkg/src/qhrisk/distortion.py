"""
Concave distortion functions and their right-sided derivatives.

A distortion is a concave, nondecreasing map ``g: [0, 1] -> [0, 1]`` with
``g(0) = 0`` and ``g(1) = 1``. Every object here is immutable and evaluates
vectorised over numpy arrays.

Built-in families::

    avatr               g(t) = min(t / alpha, 1)
    identity            g(t) = t
    one_sided_moment    g(t) = t + a (1 - t) t^(1/p)
    expectile           g(t) = alpha t / (1 - alpha + t (2 alpha - 1))
    proportional_hazard g(t) = t^beta
    tabulated           piecewise linear through user breakpoints
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "DistortionFn",
    "make_builtin",
    "rderiv_at",
    "tabulated",
    "check_distortion_bound",
    "BoundReport",
    "KINDS",
]

KINDS = (
    "avatr",
    "identity",
    "one_sided_moment",
    "expectile",
    "proportional_hazard",
    "tabulated",
)


@dataclass(frozen=True)
class DistortionFn:
    """A concave distortion with closed-form evaluation and right derivative.

    Use :func:`make_builtin` or :func:`tabulated` rather than constructing
    this directly.
    """

    kind: str
    params: tuple[float, ...] = ()
    # breakpoints/values for the tabulated kind only
    knots: tuple[tuple[float, ...], tuple[float, ...]] | None = field(
        default=None, repr=False)

    @property
    def label(self) -> str:
        if self.kind == "tabulated":
            return f"tabulated[{len(self.knots[0])}]"
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(f"{p:g}" for p in self.params)

    @property
    def kinks(self) -> tuple[float, ...]:
        """Interior points of (0, 1) where the derivative jumps."""
        if self.kind == "avatr":
            a = self.params[0]
            return (a,) if a < 1.0 else ()
        if self.kind == "tabulated":
            return tuple(self.knots[0][1:-1])
        return ()

    @property
    def slope_support(self) -> float:
        """Smallest ``t`` beyond which the right derivative vanishes."""
        if self.kind == "avatr":
            return self.params[0]
        if self.kind == "tabulated":
            t, g = (np.asarray(k) for k in self.knots)
            slopes = np.diff(g) / np.diff(t)
            pos = np.nonzero(slopes > 0)[0]
            return float(t[pos[-1] + 1]) if pos.size else 0.0
        return 1.0

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        kind, p = self.kind, self.params
        if kind == "avatr":
            out = np.minimum(t / p[0], 1.0)
        elif kind == "identity":
            out = t.copy()
        elif kind == "one_sided_moment":
            a, q = p
            out = t + a * (1.0 - t) * t ** (1.0 / q)
        elif kind == "expectile":
            al = p[0]
            out = al * t / (1.0 - al + t * (2.0 * al - 1.0))
        elif kind == "proportional_hazard":
            out = t ** p[0]
        else:
            out = np.interp(t, self.knots[0], self.knots[1])
        return out if out.ndim else float(out)

    def co(self, s):
        """``1 - g(1 - s)``, evaluated without cancellation for small ``s``."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        kind, p = self.kind, self.params
        if kind == "avatr":
            out = np.maximum(s - (1.0 - p[0]), 0.0) / p[0]
        elif kind == "identity":
            out = s.copy()
        elif kind == "one_sided_moment":
            a, q = p
            out = s * (1.0 - a * (1.0 - s) ** (1.0 / q))
        elif kind == "expectile":
            al = p[0]
            out = s * (1.0 - al) / (al - s * (2.0 * al - 1.0))
        elif kind == "proportional_hazard":
            with np.errstate(divide="ignore"):
                out = -np.expm1(p[0] * np.log1p(-s))
        else:
            t, g = (np.asarray(k) for k in self.knots)
            out = np.interp(s, 1.0 - t[::-1], 1.0 - g[::-1])
        return out if out.ndim else float(out)

    def rderiv(self, t):
        """Right-sided derivative; may be ``inf`` at ``t = 0``."""
        t = np.asarray(t, dtype=float)
        kind, p = self.kind, self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if kind == "avatr":
                out = np.where(t < p[0], 1.0 / p[0], 0.0)
            elif kind == "identity":
                out = np.ones_like(t)
            elif kind == "one_sided_moment":
                a, q = p
                if q == 1.0:
                    out = 1.0 + a * (1.0 - 2.0 * t)
                else:
                    tq = t ** (1.0 / q)
                    out = np.where(
                        t > 0,
                        1.0 + a * (-tq + (1.0 - t) * tq / (q * t)),
                        np.inf,
                    )
            elif kind == "expectile":
                al = p[0]
                out = al * (1.0 - al) / (1.0 - al + t * (2.0 * al - 1.0)) ** 2
            elif kind == "proportional_hazard":
                b = p[0]
                out = np.where(t > 0, b * t ** (b - 1.0), np.inf) if b < 1 \
                    else np.ones_like(t)
            else:
                knots_t, knots_g = (np.asarray(k) for k in self.knots)
                slopes = np.diff(knots_g) / np.diff(knots_t)
                idx = np.searchsorted(knots_t, t, side="right") - 1
                idx = np.clip(idx, 0, slopes.size - 1)
                out = slopes[idx]
        return out if out.ndim else float(out)


def _check_open_unit(name, value, *, closed_right=False):
    ok = 0.0 < value <= 1.0 if closed_right else 0.0 < value < 1.0
    if not ok:
        rng = "(0, 1]" if closed_right else "(0, 1)"
        raise DomainError(f"{name}={value!r} outside {rng}")


def make_builtin(kind: str, *params: float) -> DistortionFn:
    """Build one of the closed-form distortion families.

    Args:
        kind: Family tag, one of ``KINDS`` except ``"tabulated"``.
        *params: ``avatr``: alpha in (0, 1]. ``one_sided_moment``: a in (0, 1]
            and p >= 1. ``expectile``: alpha in [1/2, 1).
            ``proportional_hazard``: beta in (0, 1]. ``identity``: none.

    Raises:
        DomainError: unknown kind, wrong parameter count, or a parameter out
            of range (the message names the parameter).
    """
    params = tuple(float(p) for p in params)
    expected = {"avatr": 1, "identity": 0, "one_sided_moment": 2,
                "expectile": 1, "proportional_hazard": 1}
    if kind not in expected:
        raise DomainError(f"unknown distortion kind {kind!r}")
    if len(params) != expected[kind]:
        raise DomainError(
            f"{kind} takes {expected[kind]} parameter(s), got {len(params)}")
    if kind == "avatr":
        _check_open_unit("alpha", params[0], closed_right=True)
    elif kind == "one_sided_moment":
        _check_open_unit("a", params[0], closed_right=True)
        if not params[1] >= 1.0 or not np.isfinite(params[1]):
            raise DomainError(f"p={params[1]!r} outside [1, inf)")
    elif kind == "expectile":
        if not 0.5 <= params[0] < 1.0:
            raise DomainError(f"alpha={params[0]!r} outside [1/2, 1)")
    elif kind == "proportional_hazard":
        _check_open_unit("beta", params[0], closed_right=True)
    return DistortionFn(kind, params)


def tabulated(t, g, *, tol: float = 1e-12) -> DistortionFn:
    """Piecewise-linear distortion through ``(t[i], g[i])``.

    The breakpoints must start at 0 and end at 1 with ``g(0) = 0``,
    ``g(1) = 1``; the slopes must be nonnegative and nonincreasing
    (concavity). Violations raise :class:`DomainError`.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    if t.ndim != 1 or t.shape != g.shape or t.size < 2:
        raise DomainError("t and g must be 1-D arrays of equal length >= 2")
    if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise DomainError("breakpoints must increase strictly from 0 to 1")
    if abs(g[0]) > tol or abs(g[-1] - 1.0) > tol:
        raise DomainError("tabulated distortion needs g(0)=0 and g(1)=1")
    slopes = np.diff(g) / np.diff(t)
    if np.any(slopes < -tol):
        raise DomainError("tabulated distortion is not nondecreasing")
    if np.any(np.diff(slopes) > tol * max(1.0, slopes.max())):
        raise DomainError("tabulated distortion is not concave")
    return DistortionFn("tabulated", (), (tuple(t), tuple(g)))


def rderiv_at(g: DistortionFn, t: float) -> float:
    """Right derivative of ``g`` at a single point ``t`` in [0, 1)."""
    if not 0.0 <= t < 1.0:
        raise DomainError(f"right derivative needs t in [0, 1), got {t!r}")
    return float(g.rderiv(t))


@dataclass(frozen=True)
class BoundReport:
    """Outcome of :func:`check_distortion_bound`."""

    max_violation: float
    worst_t: float
    sup_gap: float | None
    ok: bool


def check_distortion_bound(family, g_rho: DistortionFn, gamma: float, grid,
                           *, exhaustive: bool = False,
                           tol: float = 1e-12) -> BoundReport:
    """Check ``sup_g g'(t) <= g_rho(gamma t) / (gamma t)`` on a grid.

    When ``exhaustive`` is set the family is taken to be the full Kusuoka
    set, and ``max |sup_g g(t) - g_rho(t)|`` is reported as well.
    """
    family = list(family)
    if not family:
        raise DomainError("distortion family is empty")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma={gamma!r} outside (0, 1)")
    grid = np.asarray(grid, dtype=float)
    if np.any((grid <= 0) | (grid >= 1)):
        raise DomainError("grid must lie in the open interval (0, 1)")
    lhs = np.max([np.asarray(g.rderiv(grid)) for g in family], axis=0)
    rhs = np.asarray(g_rho(gamma * grid)) / (gamma * grid)
    diff = lhs - rhs
    worst = int(np.argmax(diff))
    gap = None
    if exhaustive:
        sup_g = np.max([np.asarray(g(grid)) for g in family], axis=0)
        gap = float(np.max(np.abs(sup_g - np.asarray(g_rho(grid)))))
    ok = diff[worst] <= tol and (gap is None or gap <= tol)
    return BoundReport(float(diff[worst]), float(grid[worst]), gap, bool(ok))
