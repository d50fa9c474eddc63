"""
Adaptive quadrature on intervals, half-lines and the unit interval.

All routines wrap :func:`scipy.integrate.quad`. Improper integrals are
computed as sums over doubling truncations. Once every break point has been
passed, a tail is accepted when two consecutive pieces are negligible, or
when the last pieces decay geometrically with a stable ratio (the remaining
geometric series is then added). It is flagged after ``max_doublings``
pieces otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import NumericError

EPSABS = 1e-14
EPSREL = 1e-12
TAIL_TOL = 1e-10
MAX_DOUBLINGS = 60
GEOM_RATIO_MAX = 0.9
GEOM_RATIO_SPREAD = 1e-3
GEOM_TAIL_TOL = 1e-7
# a ratio this stable is a pure power law; its series is summed exactly
GEOM_EXACT_SPREAD = 1e-6
BREAK_FLOOR = 1e-12


def _tail_verdict(pieces, small, tol, scale):
    """Return ``(accepted, remainder)`` for the pieces seen so far."""
    if small >= 2:
        return True, 0.0
    if len(pieces) < 4:
        return False, 0.0
    a = np.abs(np.asarray(pieces[-4:]))
    if np.any(a == 0.0) or np.any(np.sign(pieces[-4:]) != np.sign(pieces[-1])):
        return False, 0.0
    r = a[1:] / a[:-1]
    if r.max() > GEOM_RATIO_MAX or r.max() - r.min() > GEOM_RATIO_SPREAD * r.max():
        return False, 0.0
    rem = pieces[-1] * r[-1] / (1.0 - r[-1])
    exact = r.max() - r.min() <= GEOM_EXACT_SPREAD * r.max()
    if exact or abs(rem) < GEOM_TAIL_TOL * scale:
        return True, float(rem)
    return False, 0.0


@dataclass
class TruncatedIntegral:
    """Value of an improper integral plus the per-piece trace."""

    value: float
    converged: bool
    trace: list = field(default_factory=list)


def quad_interval(f, a: float, b: float, points=(), *, epsabs=EPSABS,
                  epsrel=EPSREL, limit=200) -> tuple[float, float]:
    """Integrate ``f`` over the finite interval [a, b], split at ``points``."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("quad_interval needs finite limits")
    if b <= a:
        return 0.0, 0.0
    cuts = sorted({a, b, *(p for p in points if a < p < b)})
    total = err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, e, info = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel,
                                      limit=limit, full_output=1)[:3]
        if not math.isfinite(val):
            raise NumericError(f"non-finite integral on [{lo:g}, {hi:g}]",
                               estimate=val, bound=e)
        total += val
        err += e
    if err > 1e-6 * max(1.0, abs(total)):
        raise NumericError(
            f"quadrature on [{a:g}, {b:g}] did not converge "
            f"(estimate {total:.6g}, error bound {err:.3g})",
            estimate=total, bound=err)
    return total, err


def _tail(f, start: float, direction: int, stop: float, points, tol,
          max_doublings) -> TruncatedIntegral:
    """Sum ``f`` over [start, start + d*1], [.. + d*1, .. + d*3], ... up to ``stop``."""
    total = 0.0
    trace = []
    pieces = []
    small = 0
    width = 1.0
    edge = start
    ahead = [p for p in points if (p - start) * direction > 0]
    last_point = max(ahead, key=lambda p: (p - start) * direction) if ahead else start
    for k in range(max_doublings):
        nxt = edge + direction * width
        last = False
        if (direction > 0 and nxt >= stop) or (direction < 0 and nxt <= stop):
            nxt, last = stop, True
        lo, hi = (edge, nxt) if direction > 0 else (nxt, edge)
        piece, _ = quad_interval(f, lo, hi, points)
        total += piece
        trace.append((k, float(nxt), float(piece)))
        if last:
            return TruncatedIntegral(total, True, trace)
        if not math.isfinite(piece):
            return TruncatedIntegral(total, False, trace)
        if (nxt - last_point) * direction >= 0:
            pieces.append(piece)
            scale = max(1.0, abs(total))
            small = small + 1 if abs(piece) < tol * scale else 0
            done, rem = _tail_verdict(pieces, small, tol, scale)
            if done:
                trace.append(("geometric-remainder", float(nxt), rem))
                return TruncatedIntegral(total + rem, True, trace)
        edge = nxt
        width *= 2.0
    return TruncatedIntegral(total, False, trace)


def integrate_line(f, lower: float = -math.inf, upper: float = math.inf,
                   points=(), *, center: float | None = None, tol=TAIL_TOL,
                   max_doublings=MAX_DOUBLINGS) -> TruncatedIntegral:
    """Integrate over (lower, upper), either end possibly infinite.

    Finite ends are integrated directly; each infinite end is covered by
    pieces of doubling width starting at ``center``.
    """
    if upper <= lower:
        return TruncatedIntegral(0.0, True, [])
    if math.isfinite(lower) and math.isfinite(upper):
        val, _ = quad_interval(f, lower, upper, points)
        return TruncatedIntegral(val, True, [("finite", float(upper), val)])
    if center is None:
        if math.isfinite(lower):
            center = lower
        elif math.isfinite(upper):
            center = upper
        else:
            center = 0.0
    center = min(max(center, lower), upper)
    left = _tail(f, center, -1, lower, points, tol, max_doublings) \
        if center > lower else TruncatedIntegral(0.0, True, [])
    right = _tail(f, center, +1, upper, points, tol, max_doublings) \
        if center < upper else TruncatedIntegral(0.0, True, [])
    trace = [("left",) + t for t in left.trace] + [("right",) + t for t in right.trace]
    return TruncatedIntegral(left.value + right.value,
                             left.converged and right.converged, trace)


def integrate_unit(f, f_upper=None, breaks=(), *, tol=TAIL_TOL,
                   max_doublings=MAX_DOUBLINGS) -> TruncatedIntegral:
    """Integrate ``f`` over (0, 1) with dyadic refinement towards both ends.

    ``f_upper(u)`` must equal ``f(1 - u)``; supplying it keeps resolution
    near ``t = 1`` below double-precision spacing.
    """
    if f_upper is None:
        def f_upper(u):
            return f(1.0 - u)
    breaks = sorted(b for b in breaks if 0.0 < b < 1.0)
    mid, _ = quad_interval(f, 0.25, 0.75, breaks)
    total = mid
    trace = [("mid", 0.75, mid)]
    converged = True
    for side, fn, pts in (("low", f, breaks),
                          ("high", f_upper, [1.0 - b for b in breaks])):
        # pieces only count towards convergence below every break point;
        # levels under BREAK_FLOOR carry negligible mass and are not waited for
        counted = [b for b in pts if b >= BREAK_FLOOR]
        first = min(counted) if counted else 1.0
        small = 0
        side_total = 0.0
        pieces = []
        ok = False
        for k in range(2, max_doublings + 2):
            lo, hi = 2.0 ** -(k + 1), 2.0 ** -k
            piece, _ = quad_interval(fn, lo, hi, pts)
            side_total += piece
            trace.append((side, k, float(piece)))
            if not math.isfinite(piece):
                break
            if hi > first:
                continue
            pieces.append(piece)
            scale = max(1.0, abs(mid), abs(side_total))
            small = small + 1 if abs(piece) < tol * scale else 0
            ok, rem = _tail_verdict(pieces, small, tol, scale)
            if ok:
                side_total += rem
                if rem:
                    trace.append((side, "geometric-remainder", rem))
                break
        total += side_total
        converged &= ok
    return TruncatedIntegral(total, converged, trace)


def trapezoid(y, x, axis=-1):
    return np.trapezoid(y, x, axis=axis) if hasattr(np, "trapezoid") \
        else np.trapz(y, x, axis=axis)
