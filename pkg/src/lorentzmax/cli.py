"""Command line driver: one JSON record per run (and per level), plus CSV.

Exit codes: 0 success, 2 configuration error, 3 failed ``--assert`` check.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classes import (a1_constant, ap_constant, bp_constant, bpinf_constant, delta2_constant,
                      raposo_search)
from .config import (ExperimentConfig, ParseError, ValidationError, check_expectations,
                     dump_config, parse_config, validate)
from .errors import LorentzMaxError
from .lorentz import layers, lambda_norm, lambda_weak_norm
from .maximal import maximal_fast
from .rearrange import rearrangement
from .verify import (corollary_inclusion_check, equivalence_report, lemma21_check,
                     lemma22_check, opnorm_estimate, prop24_integral, riesz_sandwich)

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 2, 3


def _jsonable(x):
    """Floats made JSON-safe: infinities become the string 'divergent'."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "divergent"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


class Result:
    """Output of one operation at one level."""

    def __init__(self, outputs: dict, metrics: dict | None = None, checks: list | None = None,
                 profile: list | None = None, profile_header: tuple = ()):
        self.outputs = outputs
        self.metrics = metrics or {}
        self.checks = checks or []          # intrinsic invariants: (name, ok)
        self.profile = profile
        self.profile_header = profile_header


# ---------------------------------------------------------------------------
# operations

def op_maximal(cfg: ExperimentConfig, n: int) -> Result:
    f = cfg.function(n)
    mf = maximal_fast(f)
    c = f.domain.centers().reshape(-1, f.domain.dimension)
    rows = [list(map(float, ci)) + [float(v)] for ci, v in zip(c, mf.values.ravel())]
    header = ("x", "value") if f.domain.dimension == 1 else ("x0", "x1", "value")
    metrics = {"max": mf.max(), "integral": mf.integral()}
    return Result({**metrics, "cells": f.domain.size}, metrics,
                  [("Mf >= f", bool(np.all(mf.values >= f.values)))], rows, header)


def op_rearrange(cfg, n):
    f = cfg.function(n)
    g = rearrangement(f)
    rows = [[float(b), float(v)] for b, v in zip(g.breakpoints, g.values)]
    metrics = {"steps": len(g), "support": g.support}
    return Result({**metrics, "breakpoints": g.breakpoints.tolist(), "values": g.values.tolist()},
                  metrics, [], rows, ("breakpoint", "value"))


def op_norms(cfg, n):
    P = cfg.params(n)
    f = cfg.function(n)
    strong, weak = lambda_norm(f, P), lambda_weak_norm(f, P)
    metrics = {"strong": strong, "weak": weak}
    return Result({**metrics, "layers": layers(f, P).to_dict()}, metrics,
                  [("weak <= strong", weak <= strong)])


def op_weights(cfg, n):
    u, w, p = cfg.weight_u(n), cfg.weight_w(), cfg.p
    metrics = {"a1": a1_constant(u), "bp": bp_constant(w, p), "delta2": delta2_constant(w)}
    if p > 1:
        metrics["ap"] = ap_constant(u, p)
    if p <= 1:
        metrics["bpinf"] = bpinf_constant(w, p)
    checks = [("a1 >= 1", metrics["a1"] >= 1)]
    if "ap" in metrics:
        checks.append(("ap >= 1", metrics["ap"] >= 1 - 1e-12))
    return Result({**metrics, "u_clamp_radius": u.clamp_radius}, metrics, checks)


def op_search(cfg, n):
    u, w = cfg.weight_u(n), cfg.weight_w()
    certs = raposo_search(u, w, cfg.p, cfg.budget, cfg.seed, q_grid=cfg.q_grid)
    metrics = {f"ratio[q={c.q:.6g}]": c.ratio for c in certs}
    metrics["best_ratio_at_best_q"] = min(c.ratio for c in certs)
    return Result({"certificates": [c.to_dict() for c in certs],
                   "u_clamp_radius": u.clamp_radius}, metrics,
                  [("certificates verify", all(c.verify(u, w) for c in certs))])


def _lambdas(cfg):
    return cfg.lambdas or [0.5]


def op_riesz(cfg, n):
    f = cfg.function(n)
    lo, hi = riesz_sandwich(f, cfg.tgrid)
    metrics = {"c_est": lo, "C_est": hi}
    return Result(metrics, metrics, [("0 < c_est <= C_est", 0 < lo <= hi)])


def op_lemma21(cfg, n):
    P, E = cfg.params(n), cfg.set_E(n)
    out, metrics = [], {}
    for lam in _lambdas(cfg):
        lhs, base = lemma21_check(E, lam, P)
        ratio = lhs / base if base else 0.0
        out.append({"lambda": lam, "lhs": lhs, "base": base, "ratio": ratio})
        metrics.update({f"lhs[{lam:g}]": lhs, f"base[{lam:g}]": base, f"ratio[{lam:g}]": ratio})
    return Result({"rows": out}, metrics)


def op_lemma22(cfg, n):
    E = cfg.set_E(n)
    out, metrics, checks = [], {}, []
    for lam in _lambdas(cfg):
        c = lemma22_check(E, lam)
        bound = 1.0 / (1.0 - math.log(lam))
        out.append({"lambda": lam, "c_est": c, "lower_bound": bound})
        metrics[f"c_est[{lam:g}]"] = c
        checks.append((f"c_est >= 1/(1 - log lambda) at {lam:g}", c >= bound))
    metrics["min_c_est"] = min(r["c_est"] for r in out)
    return Result({"rows": out}, metrics, checks)


def op_inclusion(cfg, n):
    E = cfg.set_E(n)
    out, metrics = [], {}
    for lam in _lambdas(cfg):
        c = cfg.c if cfg.c is not None else lemma22_check(E, lam) / 2
        ok = corollary_inclusion_check(E, lam, c)
        out.append({"lambda": lam, "c": c, "included": ok})
        metrics[f"included[{lam:g}]"] = ok
    return Result({"rows": out}, metrics)


def op_prop24(cfg, n):
    P, E = cfg.params(n), cfg.set_E(n)
    p = cfg.p
    r = cfg.r if cfg.r is not None else (2.0 * p / (p - 1.0) if p > 1 else 4.0)
    v = prop24_integral(E, r, P)
    return Result({"r": r, "value": v}, {"value": v})


def op_opnorm(cfg, n):
    P = cfg.params(n)
    kinds = [cfg.kind] if cfg.kind else ["weak", "strong"]
    ests = {k: opnorm_estimate(P, k, cfg.trials, cfg.seed) for k in kinds}
    metrics = {k: e.estimate for k, e in ests.items()}
    checks = []
    if len(ests) == 2:
        checks.append(("weak <= strong", metrics["weak"] <= metrics["strong"]))
    return Result({k: e.to_dict() for k, e in ests.items()}, metrics, checks)


def op_equivalence(cfg, levels):
    P = cfg.params(levels[0])
    rep = equivalence_report(P, levels, cfg.trials, cfg.seed)
    metrics = {"verdict": rep.verdict}
    for row in rep.rows:
        metrics[f"weak[{row['level']}]"] = row["weak"]
        metrics[f"strong[{row['level']}]"] = row["strong"]
    return Result(rep.to_dict(), metrics,
                  [("weak <= strong in every row", all(r["weak"] <= r["strong"] for r in rep.rows))])


PER_LEVEL = {
    "maximal": op_maximal, "rearrange": op_rearrange, "norms": op_norms,
    "weights check": op_weights, "search raposo": op_search,
    "verify riesz": op_riesz, "verify lemma21": op_lemma21, "verify lemma22": op_lemma22,
    "verify inclusion": op_inclusion, "verify prop24": op_prop24, "opnorm": op_opnorm,
}


# ---------------------------------------------------------------------------
# records

def make_record(operation: str, cfg: ExperimentConfig, level, result: Result,
                wall: float | None) -> dict:
    inputs = cfg.to_dict()
    inputs.pop("out", None)
    inputs.pop("expect", None)
    canonical = json.dumps({"operation": operation, "inputs": _jsonable(inputs), "level": level},
                           sort_keys=True)
    rec = {"digest": hashlib.sha256(canonical.encode()).hexdigest(), "operation": operation,
           "level": level, "inputs": inputs, "outputs": result.outputs,
           "checks": [{"name": name, "ok": bool(ok)} for name, ok in result.checks],
           "version": __version__}
    if wall is not None:
        rec["wall_time"] = wall
    return _jsonable(rec)


def _csv_rows(level, metrics):
    for name, value in metrics.items():
        yield [level, name, _jsonable(value) if not isinstance(value, bool) else int(value)]


def run(cfg: ExperimentConfig, operation: str, timing: bool = False):
    """Run ``operation``; returns (records, csv rows, profile rows, failures)."""
    records, rows, profile, failures = [], [], [], []
    levels = cfg.resolution_levels()
    if operation == "equivalence":
        jobs = [(levels, lambda: op_equivalence(cfg, levels))]
    else:
        fn = PER_LEVEL[operation]
        jobs = [(n, (lambda n=n: fn(cfg, n))) for n in levels]
    header = None
    for level, job in jobs:
        t0 = time.perf_counter()
        res = job()
        wall = time.perf_counter() - t0 if timing else None
        records.append(make_record(operation, cfg, level, res, wall))
        tag = level if isinstance(level, int) else "all"
        rows.extend(_csv_rows(tag, res.metrics))
        if res.profile is not None:
            header = ("level",) + res.profile_header
            profile.extend([tag] + r for r in res.profile)
        failures += [f"[level {tag}] check failed: {name}" for name, ok in res.checks if not ok]
        failures += [f"[level {tag}] {msg}" for msg in check_expectations(cfg.expect, res.metrics)]
    return records, rows, (header, profile), failures


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment config")
    common.add_argument("--out", type=Path, help="JSON-lines report path (CSV written alongside)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--levels", help="comma-separated grid sizes, e.g. 256,512,1024")
    common.add_argument("--assert", dest="check", action="store_true",
                        help="exit with status 3 if an invariant or an 'expect' entry fails")
    common.add_argument("--timing", action="store_true", help="include wall time in records")
    common.add_argument("--print-config", action="store_true",
                        help="print the parsed config back as YAML and exit")

    parser = argparse.ArgumentParser(prog="lorentzmax", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("maximal", "rearrange", "norms", "opnorm", "equivalence"):
        sub.add_parser(name, parents=[common])
    weights = sub.add_parser("weights").add_subparsers(dest="action", required=True)
    weights.add_parser("check", parents=[common])
    search = sub.add_parser("search").add_subparsers(dest="action", required=True)
    search.add_parser("raposo", parents=[common])
    verify = sub.add_parser("verify").add_subparsers(dest="action", required=True)
    for name in ("riesz", "lemma21", "lemma22", "inclusion", "prop24"):
        verify.add_parser(name, parents=[common])
    return parser


def load_config(args) -> ExperimentConfig:
    text = args.config.read_text() if args.config else ""
    cfg = parse_config(text)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.levels:
        try:
            cfg.levels = [int(x) for x in args.levels.split(",") if x.strip()]
        except ValueError:
            raise ValidationError("levels", f"cannot parse {args.levels!r}") from None
        cfg.n = None
    validate(cfg)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    operation = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    try:
        cfg = load_config(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    try:
        records, rows, (header, profile), failures = run(cfg, operation, args.timing)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LorentzMaxError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    body = "".join(json.dumps(r, sort_keys=True, allow_nan=False) + "\n" for r in records)
    out = args.out or (Path(cfg.out) if cfg.out else None)
    if out is None:
        sys.stdout.write(body)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(body)
        _write_csv(out.with_suffix(".csv"), ("level", "metric", "value"), rows)
        if header is not None:
            _write_csv(out.with_suffix(".profile.csv"), header, profile)
    if args.check and failures:
        for msg in failures:
            print(msg, file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
