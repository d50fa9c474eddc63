"""
Parsers for the compact ``name:arg,arg`` strings used by the CLI and the
JSON experiment configs.

Risk specs::

    identity | avatr:A | osm:A,P | expectile:A | ph:B
    hg:PSI,A        PSI is u, u^Q or exp ((e^u - 1)/(e - 1))
    sup:R1/R2/...   finite Kusuoka family of distortion specs

Distribution specs::

    uniform:A,B | exponential:RATE | pareto:SHAPE[,SCALE] | normal:MU,SD
    laplace:MU,B | t:DF | point:M | reflect:<dist spec>

Weight specs: ``phi:LAMBDA`` for ``(1+|x|)^LAMBDA``; ``const`` for 1.
"""

from __future__ import annotations

import math

import numpy as np

from .directions import PowerWeight, WeightFn
from .distortion import DistortionFn, make_builtin
from .distributions import Dist, Reflected, make_parametric, point_mass
from .errors import DomainError, SpecError
from .risk import (DistortionRisk, ExpectileRisk, HaezendonckRisk, KusuokaRisk,
                   OneSidedMomentRisk, PowerYoung, RiskEvaluator, YoungFn)

__all__ = ["parse_risk", "parse_distortion", "parse_dist", "parse_weight", "parse_numbers"]

_DISTORTION_ALIASES = {
    "identity": "identity",
    "mean": "identity",
    "avatr": "avatr",
    "osm": "one_sided_moment",
    "one_sided_moment": "one_sided_moment",
    "expectile": "expectile",
    "ph": "proportional_hazard",
    "proportional_hazard": "proportional_hazard",
}


def _split(spec: str, what: str) -> tuple[str, str]:
    if not isinstance(spec, str) or not spec.strip():
        raise SpecError(f"empty {what} spec")
    name, _, rest = spec.strip().partition(":")
    return name.strip().lower(), rest.strip()


def parse_numbers(text: str, spec: str) -> tuple[float, ...]:
    if not text:
        return ()
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            val = float(tok)
        except ValueError:
            raise SpecError(f"bad number {tok!r} in {spec!r}") from None
        if not math.isfinite(val):
            raise SpecError(f"non-finite number {tok!r} in {spec!r}")
        out.append(val)
    return tuple(out)


def parse_distortion(spec: str) -> DistortionFn:
    name, rest = _split(spec, "distortion")
    if name not in _DISTORTION_ALIASES:
        raise SpecError(f"unknown distortion {name!r} in {spec!r}")
    try:
        return make_builtin(_DISTORTION_ALIASES[name], *parse_numbers(rest, spec))
    except DomainError as exc:
        raise SpecError(f"{spec!r}: {exc}") from None


def _parse_young(tok: str, spec: str) -> YoungFn:
    tok = tok.strip().lower()
    if tok == "u":
        return PowerYoung(1.0)
    if tok.startswith("u^"):
        (q,) = parse_numbers(tok[2:], spec)
        try:
            return PowerYoung(q)
        except DomainError as exc:
            raise SpecError(f"{spec!r}: {exc}") from None
    if tok == "exp":
        return YoungFn(lambda u: np.expm1(u) / math.expm1(1.0), "exp")
    raise SpecError(f"unknown Young function {tok!r} in {spec!r}")


def parse_risk(spec: str) -> RiskEvaluator:
    name, rest = _split(spec, "risk")
    if name == "sup":
        members = [m for m in rest.split("/") if m.strip()]
        if not members:
            raise SpecError(f"empty Kusuoka family in {spec!r}")
        return KusuokaRisk([parse_distortion(m) for m in members])
    try:
        if name in ("osm", "one_sided_moment"):
            a, p = _exactly(parse_numbers(rest, spec), 2, spec)
            return OneSidedMomentRisk(a, p)
        if name == "expectile":
            (a,) = _exactly(parse_numbers(rest, spec), 1, spec)
            return ExpectileRisk(a)
        if name in ("hg", "haezendonck"):
            psi_tok, _, alpha_tok = rest.rpartition(",")
            if not psi_tok:
                raise SpecError(f"hg needs PSI,ALPHA in {spec!r}")
            (alpha,) = parse_numbers(alpha_tok, spec)
            return HaezendonckRisk(_parse_young(psi_tok, spec), alpha)
    except DomainError as exc:
        raise SpecError(f"{spec!r}: {exc}") from None
    return DistortionRisk(parse_distortion(spec))


def _exactly(vals, k, spec):
    if len(vals) != k:
        raise SpecError(f"{spec!r} takes {k} number(s), got {len(vals)}")
    return vals


def parse_dist(spec: str) -> Dist:
    name, rest = _split(spec, "distribution")
    if name == "reflect":
        return Reflected(parse_dist(rest))
    try:
        if name == "point":
            (m,) = _exactly(parse_numbers(rest, spec), 1, spec)
            return point_mass(m)
        return make_parametric(name, *parse_numbers(rest, spec))
    except DomainError as exc:
        raise SpecError(f"{spec!r}: {exc}") from None


def parse_weight(spec: str | None) -> WeightFn:
    if spec is None:
        return PowerWeight(0.0)
    name, rest = _split(spec, "weight")
    if name in ("const", "one"):
        return PowerWeight(0.0)
    if name == "phi":
        (lam,) = _exactly(parse_numbers(rest, spec), 1, spec)
        try:
            return PowerWeight(lam)
        except DomainError as exc:
            raise SpecError(f"{spec!r}: {exc}") from None
    raise SpecError(f"unknown weight {name!r} in {spec!r}")
