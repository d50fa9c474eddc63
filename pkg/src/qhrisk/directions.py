"""
Weight functions, cadlag directions and the weighted sup-norm.

A :class:`Direction` is a right-continuous function built from

* a piecewise polynomial part (degree <= 3) on ordered breakpoints, each
  segment stored in the local basis ``(x - origin)``; the first and last
  segments may be unbounded, and
* a finite list of "smooth terms" ``scale * f(x) * 1[lo <= x < hi]``, used
  for the ``-r_n F0`` part of empirical directions.

The function vanishes outside the union of the polynomial segments and the
term windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from .distributions import Dist, EmpiricalDist
from .errors import DomainError

__all__ = [
    "WeightFn",
    "PowerWeight",
    "Direction",
    "weighted_sup_norm",
    "membership_C",
    "empirical_direction",
    "bump",
    "NORM_DENSITY",
]

NORM_DENSITY = 256
_CHUNK = 1 << 20


class WeightFn:
    """Weight ``phi: R -> [1, inf)``, nonincreasing on (-inf, 0] and
    nondecreasing on [0, inf), i.e. growing into both tails."""

    def __init__(self, fn, name: str = "phi", lam: float | None = None):
        self.fn = fn
        self.name = name
        self.lam = lam

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    @property
    def is_constant(self) -> bool:
        return self.lam == 0.0

    def check(self, grid) -> list[str]:
        """Problems found on ``grid`` (empty when the weight is admissible)."""
        grid = np.sort(np.asarray(grid, dtype=float))
        w = np.asarray(self(grid))
        out = []
        if np.any(w < 1.0):
            out.append("weight takes values below 1")
        left, right = w[grid <= 0], w[grid >= 0]
        if np.any(np.diff(left) > 1e-12 * np.maximum(1.0, left[1:])):
            out.append("weight increases towards 0 on the negative axis")
        if np.any(np.diff(right) < -1e-12 * np.maximum(1.0, right[:-1])):
            out.append("weight decreases away from 0 on the positive axis")
        return out

    def __repr__(self):
        return f"WeightFn({self.name})"


class PowerWeight(WeightFn):
    """``phi_lambda(x) = (1 + |x|)^lambda``."""

    def __init__(self, lam: float):
        if not lam >= 0.0 or not math.isfinite(lam):
            raise DomainError(f"weight exponent lambda={lam!r} must be >= 0")
        lam = float(lam)
        super().__init__(lambda x: (1.0 + np.abs(x)) ** lam, f"phi:{lam:g}", lam)

    def __repr__(self):
        return f"PowerWeight({self.lam:g})"


def _recenter(c, shift):
    """Coefficients of ``p(y + shift)`` in ``y`` for ``p`` with ascending ``c``."""
    c = np.asarray(c, dtype=float)
    out = np.zeros(4)
    d = c.copy()
    fact = 1.0
    for k in range(4):
        if k:
            d = P.polyder(d) if d.size > 1 else np.zeros(1)
            fact *= k
        out[k] = P.polyval(shift, d) / fact
    return out


def _origins(breaks):
    left, right = breaks[:-1], breaks[1:]
    return np.where(np.isfinite(left), left, right)


@dataclass(frozen=True)
class Direction:
    """Cadlag direction; see the module docstring for the representation."""

    breaks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coefs: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    terms: tuple = ()

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        c = np.asarray(self.coefs, dtype=float).reshape(-1, 4)
        if b.size == 1 or (b.size and c.shape[0] != b.size - 1):
            raise DomainError("need len(breaks) == len(coefs) + 1")
        if b.size and np.any(np.diff(b) <= 0):
            raise DomainError("direction breakpoints must increase strictly")
        if b.size and np.isinf(b[1:-1]).any():
            raise DomainError("only the outermost breakpoints may be infinite")
        unbounded = np.isinf(b[:-1]) | np.isinf(b[1:]) if b.size else np.zeros(0, bool)
        if np.any(c[unbounded, 1:] != 0.0):
            raise DomainError("unbounded segments must be constant")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "coefs", c)
        object.__setattr__(self, "terms", tuple(self.terms))

    # construction ----------------------------------------------------------

    @classmethod
    def zero(cls) -> "Direction":
        return cls()

    @classmethod
    def piecewise(cls, breaks, polys) -> "Direction":
        """From global ascending polynomial coefficients per segment."""
        breaks = np.asarray(breaks, dtype=float)
        polys = list(polys)
        if breaks.size != len(polys) + 1:
            raise DomainError("need one polynomial per segment")
        org = _origins(breaks) if breaks.size else np.zeros(0)
        coefs = np.zeros((len(polys), 4))
        for j, p in enumerate(polys):
            p = np.atleast_1d(np.asarray(p, dtype=float))
            if p.size > 4:
                raise DomainError("segment polynomials have degree at most 3")
            coefs[j] = _recenter(p, org[j])
        return cls(breaks, coefs)

    @classmethod
    def step(cls, breaks, values) -> "Direction":
        values = np.asarray(values, dtype=float)
        coefs = np.zeros((values.size, 4))
        coefs[:, 0] = values
        return cls(np.asarray(breaks, dtype=float), coefs)

    @classmethod
    def smooth(cls, fn, lo=-math.inf, hi=math.inf, scale=1.0) -> "Direction":
        return cls(terms=((float(scale), fn, float(lo), float(hi)),))

    # evaluation ------------------------------------------------------------

    def _poly(self, x, side):
        out = np.zeros_like(x)
        b = self.breaks
        if not b.size:
            return out
        idx = np.searchsorted(b, x, side=side) - 1
        ok = (idx >= 0) & (idx < b.size - 1)
        j = idx[ok]
        y = x[ok] - _origins(b)[j]
        c = self.coefs[j]
        out[ok] = c[:, 0] + y * (c[:, 1] + y * (c[:, 2] + y * c[:, 3]))
        return out

    def _terms(self, x, left):
        out = np.zeros_like(x)
        for scale, fn, lo, hi in self.terms:
            inside = (lo < x) & (x <= hi) if left else (lo <= x) & (x < hi)
            if inside.any():
                xs = x[inside]
                if left:
                    # exact for step-function terms such as a discrete cdf
                    xs = np.nextafter(xs, -np.inf)
                out[inside] += scale * np.asarray(fn(xs), dtype=float)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = self._poly(flat, "right") + self._terms(flat, False)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def left_limit(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = self._poly(flat, "left") + self._terms(flat, True)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    # structure -------------------------------------------------------------

    def finite_breaks(self) -> tuple[float, ...]:
        pts = set(self.breaks[np.isfinite(self.breaks)].tolist())
        for _, _, lo, hi in self.terms:
            pts.update(v for v in (lo, hi) if math.isfinite(v))
        return tuple(sorted(pts))

    def _break_array(self) -> np.ndarray:
        pts = self.breaks[np.isfinite(self.breaks)]
        extra = [v for _, _, lo, hi in self.terms for v in (lo, hi) if math.isfinite(v)]
        if extra:
            pts = np.union1d(pts, extra)
        return pts

    def jumps(self, tol: float = 0.0) -> list[tuple[float, float]]:
        """``(location, v(x) - v(x-))`` for every discontinuity."""
        pts = self._break_array()
        if not pts.size:
            return []
        size = np.asarray(self(pts)) - np.asarray(self.left_limit(pts))
        keep = np.abs(size) > tol
        return list(zip(pts[keep].tolist(), size[keep].tolist()))

    def window(self) -> tuple[float, float]:
        """Smallest closed interval outside of which ``v`` is zero."""
        lo, hi = math.inf, -math.inf
        if self.breaks.size:
            nz = np.any(self.coefs != 0.0, axis=1)
            if nz.any():
                j = np.nonzero(nz)[0]
                lo, hi = self.breaks[j[0]], self.breaks[j[-1] + 1]
        for scale, _, a, b in self.terms:
            if scale != 0.0:
                lo, hi = min(lo, a), max(hi, b)
        return float(lo), float(hi)

    @property
    def is_zero(self) -> bool:
        return self.window()[0] == math.inf

    # algebra ---------------------------------------------------------------

    def scale(self, c: float) -> "Direction":
        c = float(c)
        terms = tuple((c * s, fn, lo, hi) for s, fn, lo, hi in self.terms)
        return Direction(self.breaks, c * self.coefs, terms)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def __add__(self, other: "Direction") -> "Direction":
        if not isinstance(other, Direction):
            return NotImplemented
        a, b = self, other
        if not a.breaks.size:
            return Direction(b.breaks, b.coefs, a.terms + b.terms)
        if not b.breaks.size:
            return Direction(a.breaks, a.coefs, a.terms + b.terms)
        br = np.union1d(a.breaks, b.breaks)
        org = _origins(br)
        mids = np.where(np.isfinite(org), org, 0.0)
        coefs = np.zeros((br.size - 1, 4))
        for src in (a, b):
            idx = np.searchsorted(src.breaks, mids, side="right") - 1
            ok = (idx >= 0) & (idx < src.breaks.size - 1)
            # a segment of the merged grid lies inside one segment of src
            src_org = _origins(src.breaks)
            for j in np.nonzero(ok)[0]:
                coefs[j] += _recenter(src.coefs[idx[j]], org[j] - src_org[idx[j]])
        return Direction(br, coefs, a.terms + b.terms)

    def __sub__(self, other):
        return self + (-other)


def bump(lo: float = 0.0, hi: float = 2.0, height: float = 1.0) -> Direction:
    """Cubic B-spline on [lo, hi] with peak ``height`` at the midpoint; C^2."""
    if not hi > lo:
        raise DomainError("bump needs lo < hi")
    h = (hi - lo) / 4.0
    # uniform cubic B-spline pieces in u = (x - lo) / h, peak 2/3 at u = 2
    pieces_u = [
        [0.0, 0.0, 0.0, 1.0 / 6.0],
        [4.0 / 6.0, -2.0, 2.0, -0.5],
        [-44.0 / 6.0, 10.0, -4.0, 0.5],
        [64.0 / 6.0, -8.0, 2.0, -1.0 / 6.0],
    ]
    s = height / (2.0 / 3.0)
    polys = []
    for c in pieces_u:
        # substitute u = (x - lo) / h into the ascending coefficients c
        g = np.zeros(1)
        lin = np.array([-lo / h, 1.0 / h])
        powk = np.ones(1)
        for k in range(4):
            g = P.polyadd(g, c[k] * powk)
            powk = P.polymul(powk, lin)
        polys.append(s * g)
    return Direction.piecewise(lo + h * np.arange(5), polys)


# ---------------------------------------------------------------------- norm

def _segments(v: Direction):
    pts = v._break_array()
    lo, hi = v.window()
    if lo == math.inf:
        return np.zeros(0), np.zeros(0)
    edges = pts[(pts >= lo) & (pts <= hi)]
    left = np.concatenate(([lo], edges)) if lo == -math.inf else edges
    edges = np.unique(np.concatenate((left, [hi] if hi == math.inf else [])))
    return edges[:-1], edges[1:]


def _abs_weighted(v, phi, x):
    return np.abs(np.asarray(v(x))) * np.asarray(phi(x))


def weighted_sup_norm(v: Direction, phi: WeightFn, density: int = NORM_DENSITY,
                      *, refine: int = 8) -> float:
    """``sup_x |v(x)| phi(x)``.

    Every segment is probed at its left end, at the left limit of its right
    end, and on ``density`` interior points (a geometric ladder on unbounded
    segments); the best ``refine`` interior candidates are then polished by a
    bounded scalar search. With ``density=0`` only the segment ends are used,
    which is exact when ``|v| phi`` is monotone on every segment.
    """
    a, b = _segments(v)
    if not a.size:
        return 0.0
    best = 0.0
    fin_a, fin_b = np.isfinite(a), np.isfinite(b)
    vals = np.concatenate((
        _abs_weighted(v, phi, a[fin_a]),
        np.abs(np.asarray(v.left_limit(b[fin_b]))) * np.asarray(phi(b[fin_b])),
    ))
    if vals.size:
        if not np.all(np.isfinite(vals)):
            return math.inf
        best = float(vals.max())
    cands = []  # (value, lo, hi)
    if density > 0:
        u = (np.arange(1, density + 1) - 0.5) / density
        fin = fin_a & fin_b
        af, bf = a[fin], b[fin]
        per = max(1, _CHUNK // density)
        for s in range(0, af.size, per):
            lo, hi = af[s:s + per, None], bf[s:s + per, None]
            grid = lo + (hi - lo) * u
            w = _abs_weighted(v, phi, grid.ravel()).reshape(grid.shape)
            if not np.all(np.isfinite(w)):
                return math.inf
            j = np.argmax(w, axis=1)
            rows = np.arange(grid.shape[0])
            top = np.argsort(w[rows, j])[-refine:]
            step = (hi - lo)[:, 0] / density
            for r in top:
                x = grid[r, j[r]]
                cands.append((float(w[r, j[r]]), max(x - step[r], lo[r, 0]),
                              min(x + step[r], hi[r, 0])))
        # unbounded segments: geometric ladder away from the finite end
        ladder = 2.0 ** np.arange(0, 64) - 1.0
        for lo_, hi_ in zip(a[~fin], b[~fin]):
            if math.isinf(lo_) and math.isinf(hi_):
                xs = np.concatenate((-ladder[::-1], ladder[1:]))
            elif math.isinf(lo_):
                xs = hi_ - ladder[1:]
            else:
                xs = lo_ + ladder[1:]
            w = _abs_weighted(v, phi, xs)
            if not np.all(np.isfinite(w)):
                return math.inf
            k = int(np.argmax(w))
            far = (k == xs.size - 1) or (k == 0 and math.isinf(lo_) and math.isinf(hi_))
            if far and w[k] > 0:
                # still growing at the far end of the ladder
                return math.inf
            cands.append((float(w[k]), xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]))
    cands.sort(key=lambda c: -c[0])
    for val, lo, hi in cands[:refine]:
        best = max(best, val)
        if lo < hi:
            lo_, hi_ = min(lo, hi), max(lo, hi)
            res = optimize.minimize_scalar(
                lambda x: -float(_abs_weighted(v, phi, np.array([x]))[0]),
                bounds=(lo_, hi_), method="bounded", options={"xatol": 1e-12})
            if res.success:
                best = max(best, -float(res.fun))
    return best


# ------------------------------------------------------------------ tangents

def membership_C(v: Direction, F0: Dist, *, tol: float = 1e-12) -> tuple[bool, list[str]]:
    """Check ``v`` lies in the tangent set: it vanishes outside the support of
    ``F0`` and jumps inside the support only at discontinuities of ``F0``."""
    reasons = []
    lo, hi = v.window()
    if lo < F0.lower or hi > F0.upper:
        # v may be nonzero on [lo, hi]; test points just outside the support
        probe = []
        if lo < F0.lower:
            probe += [lo, np.nextafter(F0.lower, -np.inf)] if math.isfinite(lo) \
                else [F0.lower - 1.0, np.nextafter(F0.lower, -np.inf)]
        if hi > F0.upper:
            probe += [F0.upper, np.nextafter(F0.upper, np.inf)]
            if math.isfinite(hi):
                probe.append(np.nextafter(hi, -np.inf))
        probe = [p for p in probe if math.isfinite(p)]
        if probe and np.any(np.abs(np.asarray(v(np.array(probe)))) > tol):
            reasons.append(f"v does not vanish outside [{F0.lower:g}, {F0.upper:g}]")
    atoms = np.asarray(F0.atoms, dtype=float)
    for loc, size in v.jumps(tol):
        if not F0.lower < loc < F0.upper:
            continue
        if atoms.size and np.min(np.abs(atoms - loc)) <= tol * max(1.0, abs(loc)):
            continue
        reasons.append(f"jump of size {size:.3g} at {loc:g}, where F0 is continuous")
    return not reasons, reasons


def empirical_direction(Fn: EmpiricalDist, F0: Dist, r_n: float) -> tuple[Direction, bool]:
    """``r_n (Fn - F0)`` as a direction clipped to the support of ``F0``.

    Returns the direction and a flag that is set when sample mass lies
    outside ``[F0^->(0), F0^<-(1)]``.
    """
    x = Fn.sorted_samples
    n = Fn.n
    L, U = F0.lower, F0.upper
    outside = bool(x[0] < L or x[-1] > U)
    locs, idx = np.unique(x, return_index=True)
    counts = np.concatenate((idx[1:], [n]))  # #samples <= loc
    inside = (locs >= L) & (locs < U)
    below = int(np.searchsorted(x, L, side="left"))
    brk = locs[inside]
    vals = counts[inside] / n
    if below and math.isfinite(L) and (not brk.size or brk[0] > L):
        brk = np.concatenate(([L], brk))
        vals = np.concatenate(([below / n], vals))
    if brk.size:
        brk = np.concatenate((brk, [U]))
        step = Direction.step(brk, r_n * vals)
    else:
        step = Direction.zero()
    f0 = Direction.smooth(F0.cdf, L, U, scale=-r_n)
    return step + f0, outside
