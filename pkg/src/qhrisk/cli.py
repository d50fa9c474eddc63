"""Command-line interface.

Exit codes: 0 success, 1 parse or precondition error, 2 verdict failure,
3 numeric or integrability error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .derivative import (DerivativeConfig, difference_quotient_check, qh_derivative_family,
                         qh_derivative_single)
from .diagnostics import FAILS, diagnose, summary_line
from .directions import bump
from .distributions import read_samples_csv
from .errors import (DomainError, IntegrabilityError, NumericError, PreconditionError,
                     ReportSchemaError, SpecError)
from .harness import (DEFAULT_SEED, ExperimentConfig, persist_report, run_clt,
                      run_sensitivity, run_strong_law, write_replicates_csv)
from .risk import DistortionRisk, KusuokaRisk, g_rho_from_measure
from .specs import parse_dist, parse_numbers, parse_risk, parse_weight

log = logging.getLogger("qhrisk")

EXIT_OK, EXIT_INPUT, EXIT_VERDICT, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x) -> str:
    return "nan" if x is None else f"{x:.12g}"


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


# ----------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    ev = parse_risk(_need(args.risk, "--risk"))
    if args.samples:
        x = read_samples_csv(args.samples)
        val = ev.sample_eval(x)
        path = "L-statistic" if isinstance(ev, DistortionRisk) else "empirical law"
        print(f"value: {fmt(val)}")
        print(f"path: {path} (n={x.size})")
        return EXIT_OK
    F = parse_dist(_need(args.dist, "--dist or --samples"))
    val = ev.dist_eval(F)
    path = "quadrature (quantile domain)" if isinstance(ev, DistortionRisk) else "quadrature"
    print(f"value: {fmt(val)}")
    print(f"path: {path}")
    verdicts = diagnose(ev, F, parse_weight(args.weight))
    for v in verdicts:
        print(summary_line(v))
    if args.weight and any(v.status == FAILS for v in verdicts):
        return EXIT_VERDICT
    return EXIT_OK


def cmd_gtable(args) -> int:
    ev = parse_risk(_need(args.risk, "--risk"))
    if args.grid:
        ts = parse_numbers(args.grid, args.grid)
    else:
        ts = tuple(i / 20 for i in range(21))
    for t in ts:
        if not 0.0 <= t <= 1.0:
            raise SpecError(f"grid value {t!r} outside [0, 1]")
    rows = [(t, g_rho_from_measure(ev, t)) for t in ts]
    fh = open(Path(args.out) / "gtable.csv", "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "g_rho"])
        for t, g in rows:
            w.writerow([repr(float(t)), repr(float(g))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _parse_bump(spec: str):
    name, _, rest = spec.partition(":")
    if name != "bump":
        raise SpecError(f"unknown direction {name!r} in {spec!r}")
    vals = parse_numbers(rest, spec)
    if len(vals) not in (2, 3):
        raise SpecError(f"bump takes lo,hi[,height], got {spec!r}")
    return bump(*vals)


def cmd_derivative(args) -> int:
    ev = parse_risk(_need(args.risk, "--risk"))
    F0 = parse_dist(_need(args.dist, "--dist"))
    v = _parse_bump(args.direction)
    if isinstance(ev, DistortionRisk):
        value = qh_derivative_single(ev.g, F0, v)
        extra = {}
    elif isinstance(ev, KusuokaRisk):
        fd = qh_derivative_family(ev.family, F0, v)
        value, extra = fd.value, fd.to_dict()
    else:
        raise PreconditionError("derivatives are available for distortion and sup risks")
    rep = difference_quotient_check(ev, F0, v, value, DerivativeConfig())
    report = {"risk": args.risk, "dist": args.dist, "direction": args.direction,
              "derivative": value, "family": extra, "quotient_check": rep.to_dict()}
    if args.out:
        _dump_json(_out_dir(args) / "derivative.json", report)
    print(f"derivative: {fmt(value)}")
    for row in rep.rows:
        print(f"h={row['h']:g} quotient={fmt(row['quotient'])} error={fmt(row['error'])}")
    print(f"verdict: {rep.verdict}")
    return EXIT_VERDICT if rep.verdict == "not-converging" else EXIT_OK


def _experiment_config(args, **defaults) -> ExperimentConfig:
    data = dict(defaults)
    if args.config:
        try:
            data.update(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"{args.config}: invalid JSON ({exc})") from None
    for key, val in (("risk", args.risk), ("dist", args.dist), ("weight", args.weight),
                     ("replications", args.replications), ("root_seed", args.seed),
                     ("parallelism", args.workers)):
        if val is not None:
            data[key] = val
    if args.n is not None:
        data["n_values"] = [int(v) for v in parse_numbers(args.n, args.n)]
    if args.rate is not None:
        data["rate"] = float(args.rate)
    data.setdefault("root_seed", DEFAULT_SEED)
    if "risk" not in data:
        raise SpecError("missing --risk (or 'risk' in --config)")
    return ExperimentConfig.from_dict(data)


def _write_report(args, report) -> None:
    out = _out_dir(args)
    persist_report(report, out / "report.json")
    write_replicates_csv(report, out / "replicates.csv")


def cmd_clt(args) -> int:
    cfg = _experiment_config(args)
    report = run_clt(cfg)
    _write_report(args, report)
    for w in report.warnings:
        log.warning(w)
    for row in report.per_n:
        extra = f" linear_sd={fmt(row['linear_sd'])}" if "linear_sd" in row else ""
        print(f"n={row['n']} mean={fmt(row['mean'])} sd={fmt(row['sd'])}{extra} "
              f"ks={fmt(row['ks'])} [{row['ks_status']}]")
    note = " (insufficient replications for a KS comparison)" if report.verdict == "insufficient" else ""
    print(f"clt: {report.verdict}{note}")
    return EXIT_VERDICT if report.verdict == "fail" else EXIT_OK


def cmd_stronglaw(args) -> int:
    cfg = _experiment_config(args, rate=0.25)
    report = run_strong_law(cfg)
    _write_report(args, report)
    for w in report.warnings:
        log.warning(w)
    for row in report.per_n:
        print(f"n={row['n']} median n^r|dR|={fmt(row['median_risk_error'])} "
              f"median n^r||Fn-F0||={fmt(row['median_norm'])}")
    print(f"stronglaw: {report.verdict}")
    return EXIT_VERDICT if report.verdict == "not-consistent" else EXIT_OK


def cmd_diagnose(args) -> int:
    ev = parse_risk(_need(args.risk, "--risk"))
    F0 = parse_dist(_need(args.dist, "--dist"))
    verdicts = diagnose(ev, F0, parse_weight(args.weight))
    if args.out:
        _dump_json(_out_dir(args) / "diagnostics.json", [v.to_dict() for v in verdicts])
    for v in verdicts:
        print(summary_line(v))
    return EXIT_VERDICT if any(v.status == FAILS for v in verdicts) else EXIT_OK


def cmd_sensitivity(args) -> int:
    ev = parse_risk(_need(args.risk, "--risk"))
    F0 = parse_dist(_need(args.dist, "--dist"))
    G = parse_dist(_need(args.contaminant, "--contaminant"))
    hs = parse_numbers(args.h, args.h)
    curve = run_sensitivity(ev, F0, G, hs)
    if args.out:
        out = _out_dir(args)
        _dump_json(out / "sensitivity.json", curve.to_dict())
        with (out / "sensitivity.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["h", "value", "slope", "error"])
            for r in curve.rows:
                w.writerow([repr(r["h"]), "" if r["value"] is None else repr(r["value"]),
                            "" if r["slope"] is None else repr(r["slope"]), r["error"] or ""])
    for r in curve.rows:
        tail = f" error: {r['error']}" if r["error"] else ""
        print(f"h={r['h']:g} value={fmt(r['value'])} slope={fmt(r['slope'])}{tail}")
    print(f"prediction: {fmt(curve.prediction)} ({curve.prediction_note})")
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise SpecError(f"missing {flag}")
    return value


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qhrisk",
        description="Coherent risk functionals, their derivatives and "
                    "plug-in limit theorems.",
        epilog="exit codes: 0 ok, 1 input/precondition, 2 verdict fail, 3 numeric")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, *, dist=True, weight=True):
        sp.add_argument("--risk", help="risk spec, e.g. avatr:0.1 or sup:avatr:0.1/ph:0.5")
        if dist:
            sp.add_argument("--dist", help="distribution spec, e.g. exponential:1")
        if weight:
            sp.add_argument("--weight", help="weight spec: phi:LAMBDA or const")
        sp.add_argument("--out", help="output directory")

    def experiment(sp):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, help=f"root seed (default {DEFAULT_SEED})")
        sp.add_argument("--n", help="comma-separated sample sizes")
        sp.add_argument("--replications", type=int, help="replications per n")
        sp.add_argument("--rate", type=float, help="exponent r for r_n = n^r")
        sp.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")

    sp = sub.add_parser("eval", help="evaluate R(F) on a law or a sample")
    common(sp)
    sp.add_argument("--samples", help="CSV file with one value per line")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gtable", help="tabulate g_rho(t) = rho(-Bernoulli(t))")
    common(sp, dist=False, weight=False)
    sp.add_argument("--grid", help="comma-separated t values (default 0, 0.05, ..., 1)")
    sp.set_defaults(func=cmd_gtable)

    sp = sub.add_parser("derivative", help="derivative along a bump and its quotient check")
    common(sp, weight=False)
    sp.add_argument("--direction", default="bump:0,2,1", help="bump:LO,HI[,HEIGHT]")
    sp.set_defaults(func=cmd_derivative)

    sp = sub.add_parser("clt", help="Monte Carlo CLT for the plug-in estimator")
    common(sp)
    experiment(sp)
    sp.set_defaults(func=cmd_clt, out="clt-out")

    sp = sub.add_parser("stronglaw", help="strong-law trend of n^r-scaled errors")
    common(sp)
    experiment(sp)
    sp.set_defaults(func=cmd_stronglaw, out="stronglaw-out")

    sp = sub.add_parser("diagnose", help="check the regularity and integrability conditions")
    common(sp)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("sensitivity", help="risk along the contamination (1-h)F0 + hG")
    common(sp, weight=False)
    sp.add_argument("--contaminant", help="distribution spec of G")
    sp.add_argument("--h", default="0,0.001,0.01,0.05,0.1", help="comma-separated h values")
    sp.set_defaults(func=cmd_sensitivity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (SpecError, DomainError, PreconditionError, ReportSchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, IntegrabilityError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
