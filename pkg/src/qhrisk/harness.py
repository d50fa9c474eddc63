"""
Monte Carlo experiments for the plug-in estimator ``R(F_n)``: CLT
reproduction, strong-law trends and contamination sensitivity.

Seeding rule: replication ``j`` at sample-size index ``i`` draws from
``SeedSequence(entropy=root_seed, spawn_key=(i, j))``; reference-law draws use
``spawn_key=(REF_KEY, i)``. Results are stored by ``(i, j)`` so the report does
not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats

from .derivative import asymptotic_variance_iid, qh_derivative_single
from .diagnostics import FAILS, check_strong_law_weight, diagnose
from .directions import Direction, empirical_direction, membership_C, weighted_sup_norm
from .distortion import DistortionFn
from .distributions import Dist, EmpiricalDist, Normal, contaminate
from .errors import (DomainError, IntegrabilityError, NumericError, PreconditionError,
                     ReportSchemaError)
from .processes import (ProcessSpec, bridge_functional_weights, bridge_grid,
                        long_memory_linear_sd, long_memory_marginal, long_memory_scale, sample_bridge, BridgeSpec, sample_process,
                        substream)
from .risk import DistortionRisk, KusuokaRisk, RiskEvaluator, kusuoka_sup
from .specs import parse_dist, parse_risk, parse_weight

__all__ = [
    "SCHEMA_VERSION",
    "DEFAULT_SEED",
    "ExperimentConfig",
    "ExperimentReport",
    "SensitivityCurve",
    "run_clt",
    "run_strong_law",
    "run_sensitivity",
    "bridge_reference",
    "reference_consistency",
    "persist_report",
    "load_report",
    "write_replicates_csv",
]

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240917
REF_KEY = 1 << 20
PILOT_KEY = REF_KEY + 1
PILOT_N = 1_000_000
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
_BRIDGE_CHUNK = 1000


# ------------------------------------------------------------------ config

@dataclass
class ExperimentConfig:
    """Everything an experiment depends on; see ``configs/*.json``.

    ``rate``: ``"auto"`` (``sqrt(n)``, or ``n^(beta-1/2)`` under long memory),
    ``"sqrt"``, ``"power:r"`` / a number ``r`` for ``n^r``, or a list with one
    explicit ``r_n`` per entry of ``n_values``.
    ``reference``: ``"auto"``, ``"quadrature"`` (normal with the quadrature
    variance) or ``"bridge"`` (simulated ``R'(B)``).
    """

    risk: str
    dist: str = "uniform:0,1"
    weight: str = "const"
    regime: dict = field(default_factory=lambda: {"regime": "iid"})
    n_values: list = field(default_factory=lambda: [1000])
    replications: int = 1000
    rate: object = "auto"
    root_seed: int = DEFAULT_SEED
    tolerance: float = 0.035
    reference: str = "auto"
    reference_draws: int = 100_000
    bridge_draws: int = 10_000
    parallelism: int = 1
    override_diagnostics: bool = False
    final_threshold: float | None = None

    def __post_init__(self):
        self.n_values = [int(n) for n in self.n_values]
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise DomainError("n_values must be a non-empty list of positive sizes")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise DomainError(f"n_values must be increasing, got {self.n_values}")
        if int(self.replications) < 1:
            raise DomainError(f"replications={self.replications!r} must be >= 1")
        self.replications = int(self.replications)
        if int(self.parallelism) < 1:
            raise DomainError("parallelism must be >= 1")
        self.parallelism = int(self.parallelism)
        if self.reference not in ("auto", "quadrature", "bridge"):
            raise DomainError(f"unknown reference {self.reference!r}")
        if not 0 <= int(self.root_seed) < 2 ** 64:
            raise DomainError("root_seed must fit in 64 bits")
        self.root_seed = int(self.root_seed)
        if isinstance(self.rate, list) and len(self.rate) != len(self.n_values):
            raise DomainError("a custom rate list needs one entry per n")
        self.regime = dict(self.regime)
        self.regime.setdefault("regime", "iid")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys {sorted(extra)}")
        if "risk" not in d:
            raise DomainError("config needs a 'risk' entry")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    # -- derived pieces

    def process(self, n: int) -> ProcessSpec | None:
        reg = self.regime
        if reg["regime"] == "iid":
            return None
        return ProcessSpec(reg["regime"], n, params=tuple(reg.get("params", ())),
                           innovation=tuple(reg.get("innovation", ("normal", 0.0, 1.0))))

    def rate_exponent(self) -> float | None:
        """``r`` for power-type rates, None for custom lists."""
        rate = self.rate
        if isinstance(rate, list):
            return None
        if rate == "auto":
            if self.regime["regime"] == "long_memory":
                return float(self.regime["params"][0]) - 0.5
            return 0.5
        if rate == "sqrt":
            return 0.5
        if isinstance(rate, str):
            name, _, val = rate.partition(":")
            if name != "power":
                raise DomainError(f"unknown rate rule {rate!r}")
            return float(val)
        return float(rate)

    def rates(self) -> list[float]:
        if isinstance(self.rate, list):
            return [float(r) for r in self.rate]
        r = self.rate_exponent()
        return [float(n) ** r for n in self.n_values]


# ------------------------------------------------------------------ report

@dataclass
class ExperimentReport:
    kind: str
    config: dict
    per_n: list
    verdict: str
    diagnostics: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    reference: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    replicates: dict = field(default_factory=dict)
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def statistics(self) -> dict:
        """Everything except the wall time."""
        d = asdict(self)
        d.pop("wall_time")
        return d


def _summary(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    out = {"count": int(v.size), "mean": float(np.mean(v)),
           "sd": float(np.std(v, ddof=1)) if v.size > 1 else None}
    s = np.sort(v)
    out["quantiles"] = {f"{q:g}": float(np.quantile(s, q)) for q in QUANTILES}
    return out


def _seeds(cfg: ExperimentConfig) -> dict:
    return {"root_seed": cfg.root_seed,
            "rule": "SeedSequence(entropy=root_seed, spawn_key=(n_index, replication))",
            "reference_rule": f"SeedSequence(entropy=root_seed, spawn_key=({REF_KEY}, n_index))"}


def _run_parallel(fn, tasks, workers: int) -> list:
    if workers == 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# --------------------------------------------------------------- reference

def _members(ev: RiskEvaluator, F0: Dist) -> list[DistortionFn]:
    if isinstance(ev, DistortionRisk):
        return [ev.g]
    if isinstance(ev, KusuokaRisk):
        kv = kusuoka_sup(ev.family, F0)
        return [ev.family[i] for i in kv.active]
    raise DomainError(f"no derivative representation for {ev!r}")


def bridge_reference(members, F0: Dist, draws: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of ``max_g int g'(F0(x)) B(x) dx`` over simulated ``F0``-bridges."""
    t_max = max(g.slope_support for g in members)
    grid = bridge_grid(F0, t_max)
    W = np.stack([bridge_functional_weights(g, F0, grid) for g in members])
    spec = BridgeSpec(F0, grid)
    out = np.empty(draws)
    for start in range(0, draws, _BRIDGE_CHUNK):
        k = min(_BRIDGE_CHUNK, draws - start)
        B = sample_bridge(spec, k, rng=rng)
        out[start:start + k] = (B @ W.T).max(axis=1)
    return out


def reference_consistency(g: DistortionFn, F0: Dist, draws: int = 10_000,
                          seed: int = DEFAULT_SEED) -> dict:
    """KS distance between bridge-simulated ``R'(B)`` and ``N(0, sigma^2)``."""
    sigma2 = asymptotic_variance_iid(g, F0)
    vals = bridge_reference([g], F0, draws, substream(seed, REF_KEY, 0))
    ks = stats.kstest(vals, "norm", args=(0.0, math.sqrt(sigma2))).statistic
    return {"ks": float(ks), "sigma2": sigma2, "bridge_var": float(np.var(vals, ddof=1))}


# -------------------------------------------------------------------- setup

def _marginal(cfg: ExperimentConfig, warnings: list) -> tuple[Dist | None, str]:
    reg = cfg.regime["regime"]
    if reg == "iid":
        return parse_dist(cfg.dist), "config"
    spec = cfg.process(cfg.n_values[0])
    fam, *par = spec.innovation
    if reg == "long_memory":
        warnings.append("F0 taken as the exact normal marginal of the long-memory process")
        return long_memory_marginal(spec), "long-memory marginal"
    if reg == "ar1" and fam == "normal":
        sd = (par[1] if len(par) > 1 else 1.0) / math.sqrt(1.0 - spec.params[0] ** 2)
        warnings.append("F0 taken as the exact normal marginal of the AR(1) process")
        return Normal(par[0] if par else 0.0, sd), "ar1 marginal"
    return None, "pilot"


def _centre(ev, F0, cfg: ExperimentConfig, warnings: list) -> float:
    if F0 is not None:
        return ev.dist_eval(F0)
    spec = cfg.process(PILOT_N)
    x = sample_process(spec, substream(cfg.root_seed, PILOT_KEY))
    warnings.append(f"marginal law unknown: R(F0) estimated from one pilot path of length {PILOT_N}")
    return ev.sample_eval(x)


def _draw(cfg: ExperimentConfig, F0: Dist | None, n: int, rng) -> np.ndarray:
    spec = cfg.process(n)
    if spec is None:
        return F0.sample(rng, n)
    return sample_process(spec, rng)


def _gate(verdicts, cfg: ExperimentConfig, warnings: list) -> None:
    bad = [v for v in verdicts if v.status == FAILS]
    if not bad:
        return
    msg = "; ".join(f"{v.name} fails: {v.reason}" for v in bad)
    if not cfg.override_diagnostics:
        raise PreconditionError(f"diagnostic hard-fail ({msg}); set override_diagnostics to proceed")
    warnings.append(f"diagnostics overridden: {msg}")


# ---------------------------------------------------------------------- CLT

def run_clt(cfg: ExperimentConfig) -> ExperimentReport:
    """Scaled errors ``r_n (R(F_n) - R(F0))`` against the limit law."""
    t0 = time.perf_counter()
    ev = parse_risk(cfg.risk)
    phi = parse_weight(cfg.weight)
    warnings: list[str] = []
    F0, source = _marginal(cfg, warnings)
    verdicts = []
    if F0 is not None:
        verdicts = diagnose(ev, F0, phi)
        _gate(verdicts, cfg, warnings)
    R0 = _centre(ev, F0, cfg, warnings)
    rates = cfg.rates()
    reg = cfg.regime["regime"]

    # limit law
    ref_info: dict = {"kind": "none", "F0_source": source, "R0": R0}
    ref_sampler = None
    if F0 is not None and isinstance(ev, (DistortionRisk, KusuokaRisk)):
        members = _members(ev, F0)
        if reg == "long_memory":
            spec = cfg.process(1)
            sd_eps = float(spec.innovation[2]) if len(spec.innovation) > 2 else 1.0
            # the limit is s f0 Z and int g'(F0) f0 dx = 1, so R'(limit) = s Z
            scale = long_memory_scale(spec.params[0], sd_eps ** 2)
            ref_info.update(kind="normal", sigma2=scale * scale, source="long_memory_scale",
                            draws=cfg.reference_draws)
            ref_sampler = lambda rng: rng.normal(0.0, scale, cfg.reference_draws)  # noqa: E731
        elif reg == "iid":
            use_bridge = cfg.reference == "bridge" or (
                cfg.reference == "auto" and len(members) > 1)
            if use_bridge:
                ref_info.update(kind="bridge", members=[g.label for g in members],
                                draws=cfg.bridge_draws)
                ref_sampler = lambda rng: bridge_reference(  # noqa: E731
                    members, F0, cfg.bridge_draws, rng)
            else:
                sigma2 = asymptotic_variance_iid(members[0], F0)
                ref_info.update(kind="normal", sigma2=sigma2, source="quadrature",
                                draws=cfg.reference_draws)
                ref_sampler = lambda rng: rng.normal(  # noqa: E731
                    0.0, math.sqrt(sigma2), cfg.reference_draws)
    if ref_sampler is None:
        warnings.append("no reference law for this risk/regime: KS distance not computed")

    per_n, replicates = [], {}
    all_ok = True
    for i, (n, rn) in enumerate(zip(cfg.n_values, rates)):
        def one(j, i=i, n=n, rn=rn):
            x = _draw(cfg, F0, n, substream(cfg.root_seed, i, j))
            return rn * (ev.sample_eval(x) - R0)

        errs = np.array(_run_parallel(one, range(cfg.replications), cfg.parallelism))
        row = {"n": n, "r_n": rn, **_summary(errs)}
        if reg == "long_memory" and ref_sampler is not None:
            spec = cfg.process(n)
            sd_eps = float(spec.innovation[2]) if len(spec.innovation) > 2 else 1.0
            row["linear_sd"] = long_memory_linear_sd(spec.params[0], spec.truncation, n,
                                                     sd_eps ** 2)
        if cfg.replications < 2:
            row.update(ks=None, ks_status="insufficient")
        elif ref_sampler is None:
            row.update(ks=None, ks_status="no-reference")
        else:
            ref = ref_sampler(substream(cfg.root_seed, REF_KEY, i))
            ks = float(stats.ks_2samp(errs, ref).statistic)
            ok = ks <= cfg.tolerance
            all_ok &= ok
            row.update(ks=ks, ks_status="pass" if ok else "fail")
        per_n.append(row)
        replicates[str(n)] = {"scaled_error": errs.tolist()}

    statuses = {r["ks_status"] for r in per_n}
    if statuses <= {"pass"}:
        verdict = "pass"
    elif "fail" in statuses:
        verdict = "fail"
    else:
        verdict = sorted(statuses - {"pass"})[0]
    return ExperimentReport("clt", cfg.to_dict(), per_n, verdict,
                            [v.to_dict() for v in verdicts], warnings, ref_info,
                            _seeds(cfg), replicates, time.perf_counter() - t0)


# --------------------------------------------------------------- strong law

def _sup_distance(x: np.ndarray, F0: Dist, phi) -> float:
    """``||F_n - F0||_phi`` for the sample ``x``."""
    if phi.is_constant and not F0.atoms:
        s = np.sort(x)
        n = s.size
        F = np.asarray(F0.cdf(s), dtype=float)
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    v, _ = empirical_direction(EmpiricalDist(x), F0, 1.0)
    return weighted_sup_norm(v, phi)


def _nonincreasing(seq) -> bool:
    return all(b <= a for a, b in zip(seq, seq[1:]))


def run_strong_law(cfg: ExperimentConfig) -> ExperimentReport:
    """Medians of ``n^r |R(F_n) - R(F0)|`` and ``n^r ||F_n - F0||_phi``."""
    t0 = time.perf_counter()
    r = cfg.rate_exponent()
    if r is None or isinstance(cfg.rate, list):
        raise PreconditionError("strong-law runs need a power rate n^r")
    if cfg.rate == "auto":
        r = 0.0
    ev = parse_risk(cfg.risk)
    phi = parse_weight(cfg.weight)
    warnings: list[str] = []
    F0, _ = _marginal(cfg, warnings)
    if F0 is None:
        raise PreconditionError("strong-law runs need a known marginal law F0")
    try:
        wv = check_strong_law_weight(F0, phi, r)
    except DomainError as exc:
        raise PreconditionError(f"rate n^r requires r in [0, 1/2): {exc}") from None
    _gate([wv], cfg, warnings)
    R0 = ev.dist_eval(F0)

    per_n, replicates = [], {}
    for i, n in enumerate(cfg.n_values):
        rn = float(n) ** r

        def one(j, i=i, n=n, rn=rn):
            x = _draw(cfg, F0, n, substream(cfg.root_seed, i, j))
            return rn * abs(ev.sample_eval(x) - R0), rn * _sup_distance(x, F0, phi)

        res = _run_parallel(one, range(cfg.replications), cfg.parallelism)
        d_risk = np.array([a for a, _ in res])
        d_norm = np.array([b for _, b in res])
        per_n.append({"n": n, "r_n": rn,
                      "median_risk_error": float(np.median(d_risk)),
                      "median_norm": float(np.median(d_norm)),
                      "risk_error": _summary(d_risk), "norm": _summary(d_norm)})
        replicates[str(n)] = {"scaled_risk_error": d_risk.tolist(),
                              "scaled_norm": d_norm.tolist()}

    tail = per_n[-3:]
    trend = {"risk_error": _nonincreasing([p["median_risk_error"] for p in tail]),
             "norm": _nonincreasing([p["median_norm"] for p in tail])}
    if len(per_n) < 2:
        verdict = "insufficient"
    elif all(trend.values()):
        verdict = "consistent-with-strong-law"
    else:
        verdict = "not-consistent"
    ref = {"kind": "strong-law", "r": r, "R0": R0, "trend": trend}
    if cfg.final_threshold is not None:
        ref["final_within_threshold"] = {
            "risk_error": per_n[-1]["median_risk_error"] <= cfg.final_threshold,
            "norm": per_n[-1]["median_norm"] <= cfg.final_threshold}
    return ExperimentReport("strong_law", cfg.to_dict(), per_n, verdict,
                            [wv.to_dict()], warnings, ref, _seeds(cfg), replicates,
                            time.perf_counter() - t0)


# -------------------------------------------------------------- sensitivity

@dataclass
class SensitivityCurve:
    base: float
    rows: list
    prediction: float | None
    prediction_note: str

    def to_dict(self):
        return asdict(self)


def _prediction(ev, F0: Dist, G: Dist) -> tuple[float | None, str]:
    if not isinstance(ev, (DistortionRisk, KusuokaRisk)):
        return None, "no derivative formula for this risk"
    if G.lower < F0.lower or G.upper > F0.upper:
        return None, "G - F0 does not vanish outside the support of F0"
    v = Direction.smooth(lambda x: np.asarray(G.cdf(x)) - np.asarray(F0.cdf(x)),
                         F0.lower, F0.upper)
    ok, why = membership_C(v, F0)
    if G.atoms and not set(G.atoms) <= set(F0.atoms):
        ok, why = False, why + ["G has atoms where F0 is continuous"]
    if not ok:
        return None, "; ".join(why) or "G - F0 not admissible"
    try:
        members = _members(ev, F0)
        val = max(qh_derivative_single(g, F0, v) for g in members)
    except (IntegrabilityError, NumericError, DomainError) as exc:
        return None, f"derivative not computable: {exc}"
    return val, "derivative at F0 in direction G - F0"


def run_sensitivity(ev: RiskEvaluator, F0: Dist, G: Dist, h_grid) -> SensitivityCurve:
    """``h -> R((1-h) F0 + h G)`` and secant slopes against ``h = 0``."""
    base = ev.dist_eval(F0)
    rows = []
    for h in h_grid:
        h = float(h)
        try:
            val = base if h == 0.0 else ev.dist_eval(contaminate(F0, G, h))
        except (IntegrabilityError, NumericError, DomainError) as exc:
            rows.append({"h": h, "value": None, "slope": None, "error": str(exc)})
            continue
        slope = (val - base) / h if h > 0 else None
        rows.append({"h": h, "value": val, "slope": slope, "error": None})
    pred, note = _prediction(ev, F0, G)
    return SensitivityCurve(base, rows, pred, note)


# --------------------------------------------------------------- persistence

def _timing_path(path: Path) -> Path:
    return path.with_name(path.stem + ".timing.json")


def persist_report(report: ExperimentReport, path) -> Path:
    """JSON report (byte-stable for fixed seeds) plus a ``.timing.json`` sidecar."""
    path = Path(path)
    body = report.statistics()
    try:
        path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
        _timing_path(path).write_text(json.dumps({"wall_time": report.wall_time}) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path


def load_report(path) -> ExperimentReport:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise FileNotFoundError(f"report not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ReportSchemaError(f"{path}: not a JSON report ({exc})") from None
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ReportSchemaError(
            f"{path}: schema_version {version!r}, this build reads {SCHEMA_VERSION}")
    tp = _timing_path(path)
    data["wall_time"] = json.loads(tp.read_text())["wall_time"] if tp.exists() else 0.0
    known = {f.name for f in fields(ExperimentReport)}
    missing = known - set(data)
    if missing:
        raise ReportSchemaError(f"{path}: missing fields {sorted(missing)}")
    return ExperimentReport(**{k: data[k] for k in known})


def write_replicates_csv(report: ExperimentReport, path) -> Path:
    """Long-format per-replication values (full precision) for plotting."""
    path = Path(path)
    cols = None
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        for n, block in report.replicates.items():
            if cols is None:
                cols = sorted(block)
                w.writerow(["n", "replication", *cols])
            for j, vals in enumerate(zip(*(block[c] for c in cols))):
                w.writerow([n, j, *(repr(float(v)) for v in vals)])
    return path
