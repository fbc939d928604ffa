"""Command-line front end: ``mdimlab run <config.json>`` and ``mdimlab verify <suite>``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping

from . import __version__
from .checks import SUITES, run_suite
from .counting import CurveOptions, EntropyCurve, entropy_curve, fmt
from .dimensions import entdim_estimate, mdim_estimate, ratios_from_stats
from .groups import FolnerSchedule, folner_defect, tempered_constant
from .measures import (brin_katok_estimate, config_from_json, katok_delta_rows, katok_entropy,
                       measure_from_json)
from .metric import OracleTooLarge, box_dimension, geometric_grid
from .pressure import potential_from_json, pressure_curve
from .rate_distortion import inequality_csv, rd_at_epsilon, rd_inequality_suite, results_csv, window_model
from .shift import BowenContext, CapExceeded, ShiftSystem, product_system, system_from_json

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
OUT_ENV = "MDIMLAB_OUT"
DEFAULT_OUT = "mdimlab-out"

QUANTITIES = ("boxdim", "mdim", "smdim", "entdim", "katok", "brinkatok", "rd", "rdsuite", "pressure",
              "localmdim", "powerrule", "product", "folnercheck")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- canonical JSON -----------------------------------------------------------

def _encode(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return fmt(obj)
        return json.dumps("nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf"))
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Sorted keys, no whitespace, floats at 17 significant digits, non-finite floats as strings."""
    return _encode(obj)


def config_hash(cfg: Mapping) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


# -- config validation --------------------------------------------------------

def _need(doc: Mapping, key: str, path: str) -> Any:
    if not isinstance(doc, Mapping):
        raise ConfigError(path, "expected an object")
    if key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing")
    return doc[key]


def _number(v: Any, path: str, lo: float = -math.inf, hi: float = math.inf, strict: bool = True) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    bad = not (lo < v < hi) if strict else not (lo <= v <= hi)
    if bad:
        raise ConfigError(path, f"value {v:g} outside the allowed range")
    return v


def _int(v: Any, path: str, lo: int = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(path, f"expected an integer >= {lo}, got {v!r}")
    return v


@dataclass
class Experiment:
    raw: dict
    quantity: str
    system: ShiftSystem | None
    schedule: FolnerSchedule | None
    eps_grid: list[float]
    n_grid: list[int]
    params: dict
    seed: int
    opts: CurveOptions


def parse_config(raw: Any, workers: int = 1) -> Experiment:
    if not isinstance(raw, Mapping):
        raise ConfigError("<root>", "expected a JSON object")
    quantity = _need(raw, "quantity", "")
    if quantity not in QUANTITIES:
        raise ConfigError("quantity", f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")
    try:
        system = system_from_json(_need(raw, "system", ""))
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("system", str(exc)) from exc

    sched_doc = raw.get("schedule", {"kind": "boxes"})
    kind = sched_doc.get("kind", "boxes") if isinstance(sched_doc, Mapping) else None
    if kind == "boxes":
        schedule = FolnerSchedule.boxes(system.group)
    elif kind == "subgroup":
        schedule = FolnerSchedule.subgroup(system.group, _int(_need(sched_doc, "m", "schedule"), "schedule.m"))
    else:
        raise ConfigError("schedule.kind", f"expected 'boxes' or 'subgroup', got {kind!r}")

    eps_grid: list[float] = []
    if quantity not in ("folnercheck", "brinkatok"):
        g = _need(raw, "eps_grid", "")
        eps_max = _number(_need(g, "eps_max", "eps_grid"), "eps_grid.eps_max", 0, 1 / math.e)
        ratio = _number(_need(g, "ratio", "eps_grid"), "eps_grid.ratio", 0, 1)
        count = _int(_need(g, "count", "eps_grid"), "eps_grid.count", 1)
        eps_grid = geometric_grid(eps_max, ratio, count)

    n_doc = raw.get("n_grid", [1, 2, 3])
    if not isinstance(n_doc, list) or not n_doc:
        raise ConfigError("n_grid", "expected a non-empty list of positive integers")
    n_grid = [_int(v, f"n_grid[{i}]") for i, v in enumerate(n_doc)]

    params = raw.get("params", {})
    if not isinstance(params, Mapping):
        raise ConfigError("params", "expected an object")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", f"expected an integer, got {seed!r}")

    caps = raw.get("caps", {})
    if not isinstance(caps, Mapping):
        raise ConfigError("caps", "expected an object")
    base = CurveOptions()
    opts = CurveOptions(
        enum_n_max=_int(caps.get("enum_n_max", base.enum_n_max), "caps.enum_n_max", 0),
        exact_threshold=_int(caps.get("exact_threshold", base.exact_threshold), "caps.exact_threshold"),
        cap=_int(caps.get("enumeration", base.cap), "caps.enumeration"),
        workers=workers)
    return Experiment(dict(raw), quantity, system, schedule, eps_grid, n_grid, dict(params), seed, opts)


# -- quantity handlers --------------------------------------------------------

@dataclass
class Outcome:
    payload: dict
    csv: str
    upper: float
    lower: float
    failed: bool = False
    extra_csv: dict | None = None


def _curve(ex: Experiment, system: ShiftSystem | None = None, schedule: FolnerSchedule | None = None,
           opts: CurveOptions | None = None) -> EntropyCurve:
    return entropy_curve(system or ex.system, schedule or ex.schedule, ex.eps_grid, ex.n_grid,
                         opts=opts or ex.opts)


def _estimate_outcome(est, curve: EntropyCurve, **extra) -> Outcome:
    payload = {"estimate": est.to_json(), "curve": curve.to_json(), **extra}
    return Outcome(payload, curve.to_csv(), est.upper, est.lower)


def _boxdim(ex: Experiment) -> Outcome:
    est = box_dimension(ex.system.alphabet, ex.eps_grid, ex.params.get("window_fraction", 1 / 3))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "log_spanning"])
    for e, lr in est.curve:
        w.writerow([fmt(e), fmt(lr)])
    payload = {"estimate": {"quantity": "boxdim", "upper": est.upper_slope, "lower": est.lower_slope,
                            "fit_window": list(est.fit_window), "lsq_slope": est.lsq_slope,
                            "curve": [list(c) for c in est.curve]}}
    return Outcome(payload, buf.getvalue(), est.upper_slope, est.lower_slope)


def _mdim(ex: Experiment) -> Outcome:
    curve = _curve(ex)
    return _estimate_outcome(mdim_estimate(curve), curve)


def _smdim(ex: Experiment) -> Outcome:
    s = _number(_need(ex.params, "s", "params"), "params.s", 0, 2, strict=False)
    curve = _curve(ex)
    return _estimate_outcome(mdim_estimate(curve, s), curve)


def _entdim(ex: Experiment) -> Outcome:
    s_grid = ex.params.get("s_grid", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.5, 2.0])
    curve = _curve(ex)
    try:
        est = entdim_estimate(curve, s_grid, ex.params.get("tau_hi", 5.0), ex.params.get("tau_lo", 0.2))
    except ValueError as exc:
        raise ConfigError("params.s_grid", str(exc)) from exc
    return Outcome({"estimate": est.to_json(), "curve": curve.to_json()}, curve.to_csv(),
                   est.transition_hi, est.transition_lo)


def _measure(ex: Experiment):
    try:
        return measure_from_json(ex.system, ex.params.get("measure", {"kind": "product"}))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("params.measure", str(exc)) from exc


def _katok(ex: Experiment) -> Outcome:
    mu = _measure(ex)
    delta = _number(ex.params.get("delta", 0.05), "params.delta", 0, 1, strict=False)
    mode = ex.params.get("mode", "sup")
    if mode not in ("sup", "average"):
        raise ConfigError("params.mode", f"expected 'sup' or 'average', got {mode!r}")
    rows, stats = [], []
    for e in ex.eps_grid:
        k = katok_entropy(mu, ex.system, ex.schedule, e, delta, mode, ex.n_grid, opts=ex.opts)
        rows.append(k)
        stats.append((e, k.upper, k.lower))
    est = ratios_from_stats(stats, 1.0, quantity="katok", note=f"delta={delta:g}, mode={mode}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "n", "folner_size", "log_count", "method"])
    for k in rows:
        for r in k.per_n:
            w.writerow([fmt(k.epsilon), r.n, r.folner_size, fmt(r.log_count), r.method])
    bracket = [{"epsilon": e, "rows": [{"delta": k.delta, "upper": k.upper, "lower": k.lower}
                                       for k in katok_delta_rows(mu, ex.system, ex.schedule, e, mode, ex.n_grid,
                                                                 ex.opts)]}
               for e in ex.eps_grid]
    return Outcome({"estimate": est.to_json(), "katok": [k.to_json() for k in rows], "delta_rows": bracket},
                   buf.getvalue(), est.upper, est.lower)


def _brinkatok(ex: Experiment) -> Outcome:
    mu = _measure(ex)
    eps = _number(_need(ex.params, "epsilon", "params"), "params.epsilon", 0)
    try:
        center = config_from_json(ex.system, ex.params.get("center", []))
    except (ValueError, TypeError) as exc:
        raise ConfigError("params.center", str(exc)) from exc
    mode = ex.params.get("mode", "sup")
    out = []
    for n in ex.n_grid:
        ctx = BowenContext(ex.system, ex.schedule(n), mode)
        try:
            br = brin_katok_estimate(mu, ctx, center, eps)
        except ValueError as exc:
            raise ConfigError("params.measure", str(exc)) from exc
        out.append((n, len(ctx.F), br.lower, br.upper))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "folner_size", "lower", "upper"])
    for n, size, lo, hi in out:
        w.writerow([n, size, fmt(lo), fmt(hi)])
    payload = {"estimate": {"quantity": "brinkatok", "epsilon": eps,
                            "per_n": [{"n": n, "folner_size": s, "lower": lo, "upper": hi}
                                      for n, s, lo, hi in out]}}
    return Outcome(payload, buf.getvalue(), out[-1][3], out[-1][2])


def _window(ex: Experiment):
    n = _int(ex.params.get("n", 2), "params.n")
    return ex.schedule(n)


def _rd(ex: Experiment) -> Outcome:
    mu = _measure(ex)
    F = _window(ex)
    p, s = ex.params.get("p"), ex.params.get("s")
    if (p is None) == (s is None):
        raise ConfigError("params", "give exactly one of p (L^p) or s (L^inf outage level)")
    model = window_model(mu, ex.system, F)
    rows = []
    for e in ex.eps_grid:
        res = rd_at_epsilon(mu, ex.system, F, e, p=p, s=s, model=model)
        rows.append((e, f"p={p:g}" if p is not None else f"s={s:g}", res))
    rates = [r.rate / len(F) for _, _, r in rows]
    trend = [[e, v / math.log(1 / e)] for e, v in zip(ex.eps_grid, rates)]
    payload = {"estimate": {"quantity": "rd", "folner_size": len(F),
                            "rows": [{"epsilon": e, "tag": t, **r.to_json()} for e, t, r in rows],
                            "trend": trend,
                            "diagnostics": "trend is rate/(|F| log 1/eps) on one finite window; "
                                           "it indicates a direction only and is not a limit"}}
    return Outcome(payload, results_csv(rows), max(rates), min(rates))


def _rdsuite(ex: Experiment) -> Outcome:
    mu = _measure(ex)
    F = _window(ex)
    rows = rd_inequality_suite(mu, ex.system, F, ex.eps_grid, ex.params.get("delta", 0.05))
    payload = {"estimate": {"quantity": "rdsuite", "folner_size": len(F), "rows": [
        {"epsilon": r.epsilon, "r_l1_2eps": r.r_l1_2eps, "r_l2_2eps": r.r_l2_2eps, "r_linf": r.r_linf,
         "r_linf_family": [list(x) for x in r.r_linf_family], "katok": r.katok,
         "katok_delta0": r.katok_delta0, "checks": [[c, ok] for c, ok in r.checks]} for r in rows]}}
    failed = not all(r.passed for r in rows)
    return Outcome(payload, inequality_csv(rows), max(r.r_linf for r in rows),
                   min(r.r_l1_2eps for r in rows), failed)


def _pressure(ex: Experiment) -> Outcome:
    try:
        f = potential_from_json(ex.params.get("potential", {"kind": "constant", "c": 0.0}))
        if f.phi is not None:
            f.table(ex.system)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError("params.potential", str(exc)) from exc
    rescale = bool(ex.params.get("rescale", True))
    pc = pressure_curve(ex.system, ex.schedule, f, ex.eps_grid, ex.n_grid, ex.opts, rescale=rescale)
    est = ratios_from_stats(pc.tail_stats(), 1.0, quantity="pressure", note=f"rescale={rescale}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "n", "folner_size", "log_pressure", "method"])
    for r in pc.rows:
        w.writerow([fmt(r.epsilon), r.n, r.folner_size, fmt(r.log_pressure), r.method])
    return Outcome({"estimate": est.to_json(), "potential": f.to_json(), "curve": pc.to_json()},
                   buf.getvalue(), est.upper, est.lower)


def _localmdim(ex: Experiment) -> Outcome:
    doc = _need(ex.params, "constraints", "params")
    if not isinstance(doc, list):
        raise ConfigError("params.constraints", "expected a list of [site, symbol] pairs")
    try:
        cons = tuple(sorted((tuple(g) if isinstance(g, list) else (int(g),), int(v)) for g, v in doc))
    except (TypeError, ValueError) as exc:
        raise ConfigError("params.constraints", str(exc)) from exc
    curve = _curve(ex, opts=replace(ex.opts, constraints=cons))
    return _estimate_outcome(replace(mdim_estimate(curve), quantity="localmdim"), curve)


def _powerrule(ex: Experiment) -> Outcome:
    m = _int(_need(ex.params, "m", "params"), "params.m")
    full_c = _curve(ex, schedule=FolnerSchedule.boxes(ex.system.group))
    sub_c = _curve(ex, schedule=FolnerSchedule.subgroup(ex.system.group, m))
    full, sub = mdim_estimate(full_c), mdim_estimate(sub_c)
    ratio = sub.upper / full.upper if full.upper else float("nan")
    out = Outcome({"estimate": {"quantity": "powerrule", "m": m, "ratio": ratio, "full": full.to_json(),
                                "sub": sub.to_json()}, "curve": full_c.to_json(), "curve_sub": sub_c.to_json()},
                  full_c.to_csv(), sub.upper, sub.lower)
    out.extra_csv = {"curve_sub.csv": sub_c.to_csv()}
    return out


def _product(ex: Experiment) -> Outcome:
    single_c = _curve(ex)
    sq_c = _curve(ex, system=product_system(ex.system, ex.system))
    single, sq = mdim_estimate(single_c), mdim_estimate(sq_c)
    out = Outcome({"estimate": {"quantity": "product", "single": single.to_json(), "squared": sq.to_json()},
                   "curve": single_c.to_json(), "curve_squared": sq_c.to_json()},
                  single_c.to_csv(), sq.upper, sq.lower)
    out.extra_csv = {"curve_squared.csv": sq_c.to_csv()}
    return out


def _folnercheck(ex: Experiment) -> Outcome:
    rank = ex.system.group.rank
    gens = [tuple(int(i == j) for i in range(rank)) for j in range(rank)]
    rows = []
    for n in ex.n_grid:
        d = max(folner_defect(ex.schedule, g, n) for g in gens)
        rows.append((n, len(ex.schedule(n)), float(d)))
    up_to = max(2, max(ex.n_grid))
    temp = float(tempered_constant(ex.schedule, up_to))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "folner_size", "max_generator_defect"])
    for n, size, d in rows:
        w.writerow([n, size, fmt(d)])
    payload = {"estimate": {"quantity": "folnercheck", "schedule": ex.schedule.label,
                            "per_n": [{"n": n, "folner_size": s, "defect": d} for n, s, d in rows],
                            "tempered_constant": temp, "tempered_up_to": up_to}}
    return Outcome(payload, buf.getvalue(), max(d for *_, d in rows), min(d for *_, d in rows))


HANDLERS: dict[str, Callable[[Experiment], Outcome]] = {
    "boxdim": _boxdim, "mdim": _mdim, "smdim": _smdim, "entdim": _entdim, "katok": _katok,
    "brinkatok": _brinkatok, "rd": _rd, "rdsuite": _rdsuite, "pressure": _pressure,
    "localmdim": _localmdim, "powerrule": _powerrule, "product": _product, "folnercheck": _folnercheck,
}


def compute(ex: Experiment) -> Outcome:
    return HANDLERS[ex.quantity](ex)


# -- cache ------------------------------------------------------------------

def cache_lookup(cache_path: Path, key: str) -> dict | None:
    """Most recent record with this config hash; unreadable lines are skipped with a warning."""
    if not cache_path.exists():
        return None
    found = None
    with cache_path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if rec["config_hash"] == key:
                    found = rec
            except (json.JSONDecodeError, KeyError, TypeError):
                warnings.warn(f"{cache_path}:{lineno}: skipping corrupt cache line")
    return found


def cache_append(cache_path: Path, record: dict) -> None:
    with cache_path.open("a", encoding="utf-8") as fh:
        fh.write(canonical_json(record) + "\n")


# -- commands ---------------------------------------------------------------

def _summary(quantity: str, upper: Any, lower: Any) -> str:
    def show(v):
        return v if isinstance(v, str) else f"{v:.6g}"
    return f"{quantity} upper={show(upper)} lower={show(lower)}"


def _write_artifacts(out: Path, payload_text: str, csv_text: str, extra: Mapping | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(payload_text + "\n", encoding="utf-8")
    (out / "curve.csv").write_text(csv_text, encoding="utf-8")
    for name, text in (extra or {}).items():
        (out / name).write_text(text, encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"config error: {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error: <root>: malformed JSON ({exc.msg} at line {exc.lineno})", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ex = parse_config(raw, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    key = config_hash(raw)
    cache_path = out / "cache.jsonl"
    if not args.no_cache:
        rec = cache_lookup(cache_path, key)
        if rec is not None:
            _write_artifacts(out, canonical_json(rec["payload"]), rec["csv"], rec.get("extra_csv"))
            print(_summary(rec["quantity"], rec["summary"][0], rec["summary"][1]) + " (cached)")
            return EXIT_CHECK if rec.get("failed") else EXIT_OK

    try:
        res = compute(ex)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapExceeded, OracleTooLarge) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"config error: {ex.quantity}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    payload = {"quantity": ex.quantity, "config_hash": key, "version": __version__, "seed": ex.seed,
               **res.payload}
    text = canonical_json(payload)
    _write_artifacts(out, text, res.csv, res.extra_csv)
    cache_append(cache_path, {"config_hash": key, "quantity": ex.quantity, "payload": payload, "csv": res.csv,
                              "extra_csv": res.extra_csv or {}, "summary": [res.upper, res.lower],
                              "failed": res.failed, "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
                              "version": __version__})
    print(_summary(ex.quantity, res.upper, res.lower))
    return EXIT_CHECK if res.failed else EXIT_OK


def verify_payload(checks) -> str:
    return canonical_json([c.to_json() for c in checks])


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.tolerance_scale > 0:
        print("--tolerance-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    checks = run_suite(args.suite, args.tolerance_scale, args.workers)
    width = max(len(c.name) for c in checks)
    print(f"{'':4}  {'id':>3}  {'check':<{width}}  {'measured':>12}  expected")
    for c in checks:
        lo = "-inf" if c.lo == -math.inf else f"{c.lo:.6g}"
        hi = "inf" if c.hi == math.inf else f"{c.hi:.6g}"
        flag = "PASS" if c.passed else "FAIL"
        print(f"{flag:4}  C{c.criterion:<2}  {c.name:<{width}}  {c.measured:>12.6g}  [{lo}, {hi}]")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    if args.json:
        Path(args.json).write_text(verify_payload(checks) + "\n", encoding="utf-8")
    return EXIT_CHECK if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdimlab", description="Metric mean dimension experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    run.add_argument("--no-cache", action="store_true", help="recompute even when a cached result exists")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)
    ver = sub.add_parser("verify", help="run a named check suite")
    ver.add_argument("suite", help=", ".join(SUITES))
    ver.add_argument("--tolerance-scale", type=float, default=1.0)
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--json", help="also write the check table as canonical JSON")
    ver.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
