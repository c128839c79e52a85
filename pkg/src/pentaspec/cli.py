"""Batch front end: ``pentaspec run job.yaml``.

A job file (YAML or JSON) holds::

    model:        coefficient model, either the full band schema of
                  CoefficientModel.from_dict or the short form
                  {kind, profile: [r1, r2, s1, s2], amplitudes, rate,
                   exponent, overrides: {band: [[n, value], ...]}}
    p:            l_p exponent, 1 < p < inf (default 2)
    task:         norm-bounds | essential-spectrum | fine-spectrum |
                  eigenvalues | check-conditions | truncate | portrait
    params:       task parameters (see TASK_PARAMS)
    output:       {dir, format}; command-line flags win

Exit codes: 0 ok, 1 bad config, 2 inconsistent or invalid model,
3 numerical failure or unmet hypothesis.  Every run writes report.json,
including failed ones.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .coeffs import CoefficientModel, LimitProfile, limit_profile
from .conditions import divergence_check, exponential_rate_check, no_embedded_eigenvalue
from .eigensolve import discrete_spectrum, write_records_csv
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    HypothesisError,
    ModelInconsistencyError,
    PentaspecError,
)
from .operators import BandOperator, apply, check_order, lp_norm, norm_bounds, truncate
from .oracle import section_eigenvalues, spectral_portrait
from .spectra import essential_spectrum, fine_spectrum_T, fine_spectrum_T0

log = logging.getLogger("pentaspec")

TASKS = ("norm-bounds", "essential-spectrum", "fine-spectrum", "eigenvalues",
         "check-conditions", "truncate", "portrait")
TASK_PARAMS = {
    "norm-bounds": {"samples", "length"},
    "essential-spectrum": set(),
    "fine-spectrum": {"region", "acknowledge", "collar", "search_gap", "grid", "depth"},
    "eigenvalues": {"region", "acknowledge", "collar", "search_gap", "grid", "depth", "multiplicity_N"},
    "check-conditions": {"lambdas", "grid", "threshold", "n_max"},
    "truncate": {"N", "source", "eigenvalues"},
    "portrait": {"schedule", "eps"},
}
FORMATS = ("json", "csv", "both")
EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config


def load_config(path):
    text = Path(path).read_text()
    try:
        cfg = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def validate(cfg):
    unknown = set(cfg) - {"model", "p", "task", "params", "output"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    for key in ("model", "task"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    task = cfg["task"]
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
    params = cfg.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be a mapping")
    extra = set(params) - TASK_PARAMS[task]
    if extra:
        raise ConfigError(f"task {task}: unknown params {sorted(extra)}")
    for key in ("collar", "search_gap", "threshold", "eps"):
        if key in params and not (isinstance(params[key], (int, float)) and params[key] > 0):
            raise ConfigError(f"{key} must be a positive number")
    try:
        check_order(cfg.get("p", 2.0))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return params


def build_model(block):
    """Coefficient model from a config block; errors here mean exit 2."""
    if not isinstance(block, dict):
        raise ConfigError("model must be a mapping")
    if "profile" in block:
        block = dict(block)
        kind = block.pop("kind", "constant")
        profile = LimitProfile(*block.pop("profile"))
        overrides = {b: [tuple(x) for x in v] for b, v in (block.pop("overrides", None) or {}).items()}
        amps = tuple(block.pop("amplitudes", (0.0, 0.0, 0.0)))
        if kind == "constant":
            model = CoefficientModel.from_profile(profile)
            if overrides:
                model = CoefficientModel.finite_support(profile, overrides)
        elif kind == "finite-support":
            model = CoefficientModel.finite_support(profile, overrides)
        elif kind == "exponential":
            model = CoefficientModel.exponential(profile, amps, block.pop("rate", 0.5), overrides)
        elif kind == "power-law":
            model = CoefficientModel.power_law(profile, amps, block.pop("exponent", 2.0), overrides)
        else:
            raise ConfigError(f"short model form does not support kind {kind!r}")
        if block:
            raise ConfigError(f"unknown model keys {sorted(block)}")
    else:
        model = CoefficientModel.from_dict(block)
    limit_profile(model)
    return model


# ---------------------------------------------------------------------------
# tasks; each returns (result dict, csv tables, plot series)
# csv tables: {filename: (header, rows)}; plot: {"style": ..., "series": {name: [[x, y], ...]}}


def _interval_series(intervals):
    return {f"interval_{k}": [[lo, 0.0], [hi, 0.0]] for k, (lo, hi) in enumerate(intervals)}


def task_norm_bounds(model, p, params, ctx):
    prof = limit_profile(model)
    lower, upper = norm_bounds(prof, p)
    op = BandOperator.T0(prof)
    n = int(params.get("samples", 1000))
    L = int(params.get("length", 500))
    rng = np.random.default_rng(ctx["seed"])
    ratios = np.empty(n)
    for k in range(n):
        x = rng.standard_normal(L)
        ratios[k] = lp_norm(apply(op, x, p), p) / lp_norm(x, p)
    witness = np.zeros(4)
    witness[:2] = 1.0
    w = lp_norm(apply(op, witness, p), p) / lp_norm(witness, p)
    result = {"lower": lower, "upper": upper, "witness_ratio": w,
              "empirical_sup": float(ratios.max()), "samples": n, "length": L, "seed": ctx["seed"]}
    tables = {"ratios.csv": (["sample", "ratio"], [[k, repr(float(r))] for k, r in enumerate(ratios)])}
    plot = {"style": "points", "series": {"ratio": [[k, float(r)] for k, r in enumerate(ratios)],
                                          "lower": [[0, lower], [n - 1, lower]],
                                          "upper": [[0, upper], [n - 1, upper]]}}
    return result, tables, plot


def task_essential(model, p, params, ctx):
    ess = essential_spectrum(limit_profile(model))
    tables = {"intervals.csv": (["lo", "hi"], [[lo, hi] for lo, hi in ess.intervals])}
    return {"intervals": [[lo, hi] for lo, hi in ess.intervals]}, tables, \
        {"style": "lines", "series": _interval_series(ess.intervals)}


def _search_kwargs(params, ctx):
    kw = {k: params[k] for k in ("collar", "search_gap", "grid", "depth", "multiplicity_N") if k in params}
    kw["threads"] = ctx["threads"]
    return kw


def _eigen_tables(records):
    rows = [[repr(r.value.real), repr(r.value.imag), r.chain, repr(r.residual), r.multiplicity,
             str(r.adjoint_matched).lower()] for r in records]
    return {"eigenvalues.csv": (["re", "im", "chain", "residual", "multiplicity", "adjoint_matched"], rows)}


def task_eigenvalues(model, p, params, ctx):
    ack = bool(params.get("acknowledge", False))
    res = discrete_spectrum(model, params.get("region"), acknowledge=ack, return_records=True,
                            **_search_kwargs(params, ctx))
    ess = essential_spectrum(limit_profile(model))
    series = _interval_series(ess.intervals)
    series["eigenvalues"] = [[r.value.real, r.value.imag] for r in res.records]
    out = res.to_dict()
    out["heuristic"] = res.acknowledged
    return out, _eigen_tables(res.records), {"style": "points", "series": series}


def task_fine_spectrum(model, p, params, ctx):
    ack = bool(params.get("acknowledge", False))
    rate = exponential_rate_check(model)
    if rate.status != "holds" and not ack:
        raise HypothesisError(
            f"exponential-rate hypothesis is '{rate.status}'; set params.acknowledge: true to override",
            verdict=rate.to_dict(),
        )
    prof = limit_profile(model)
    kw = _search_kwargs(params, ctx)
    kw.pop("multiplicity_N", None)
    res = discrete_spectrum(model, params.get("region"), acknowledge=ack, return_records=True, **kw)
    hyp = "exponential-rate" if rate.status == "holds" else "acknowledged-override"
    if res.spectrum.is_empty and model.kind == "constant":
        report = fine_spectrum_T0(prof)
    else:
        report = fine_spectrum_T(prof, res.spectrum, hypothesis=hyp)
    out = report.to_dict()
    out["acknowledged"] = ack and rate.status != "holds"
    out["rate_check"] = rate.to_dict()
    out["records"] = [r.to_dict() for r in res.records]
    out["unresolved"] = res.unresolved
    series = _interval_series(report.essential.intervals)
    series["discrete"] = [[complex(z).real, complex(z).imag] for z in report.discrete.values]
    return out, _eigen_tables(res.records), {"style": "points", "series": series}


def _lambda_list(params, ess):
    if "lambdas" in params:
        return [complex(v) if not isinstance(v, (list, tuple)) else complex(*v) for v in params["lambdas"]]
    g = params.get("grid", {})
    if isinstance(g, dict) and g:
        return list(np.linspace(float(g["lo"]), float(g["hi"]), int(g.get("n", 101))))
    lo, hi = ess.intervals[0][0], ess.intervals[-1][1]
    pts = np.linspace(lo, hi, 101)
    return [x for x in pts if ess.distance(x) <= 1e-9]


def task_conditions(model, p, params, ctx):
    ess = essential_spectrum(limit_profile(model))
    thr = float(params.get("threshold", 1e6))
    n_max = int(params.get("n_max", 10_000))
    rate = exponential_rate_check(model)
    verdicts, rows, series = [], [], {}
    for lam in _lambda_list(params, ess):
        v = no_embedded_eigenvalue(model, lam, thr, n_max, rate=rate)
        entry = v.to_dict()
        for chain in ("odd", "even"):
            d = divergence_check(model, chain, lam, thr, n_max)
            entry[f"divergence_{chain}"] = d.to_dict()
            key = f"lam={complex(lam).real:g}{complex(lam).imag:+g}i {chain}"
            series[key] = [[n, s] for n, s in d.partial_sums.items()]
            for n, s in d.partial_sums.items():
                rows.append([repr(complex(lam).real), repr(complex(lam).imag), chain, n, repr(s), d.status])
        verdicts.append(entry)
    result = {"rate_check": rate.to_dict(), "threshold": thr, "n_max": n_max, "verdicts": verdicts}
    tables = {"partial_sums.csv": (["re", "im", "chain", "n", "partial_sum", "status"], rows)}
    return result, tables, {"style": "steps", "series": series}


def task_truncate(model, p, params, ctx):
    if "N" not in params:
        raise ConfigError("truncate needs params.N")
    src = params.get("source", "T")
    if src not in ("T", "T0", "K"):
        raise ConfigError("params.source must be T, T0 or K")
    op = getattr(BandOperator, src)(model)
    sec = truncate(op, int(params["N"]))
    result = {"N": sec.size, "source": src, "norm_inf": sec.norm_inf()}
    tables = {}
    rows = []
    for i in range(sec.size):
        b = repr(float(sec.b[i])) if i < sec.size - 2 else ""
        c = repr(float(sec.c[i])) if i < sec.size - 2 else ""
        rows.append([i + 1, repr(float(sec.a[i])), b, c])
    tables["section_bands.csv"] = (["n", "a", "b", "c"], rows)
    series = {}
    if params.get("eigenvalues", True):
        spec = section_eigenvalues(sec)
        result["eigenvalues"] = spec.to_dict()["eigenvalues"]
        result["metadata"] = spec.metadata
        tables["section_eigenvalues.csv"] = (["re", "im"], [[repr(z.real), repr(z.imag)] for z in spec.eigenvalues])
        series["eigenvalues"] = [[z.real, z.imag] for z in spec.eigenvalues]
    return result, tables, {"style": "points", "series": series}


def task_portrait(model, p, params, ctx):
    schedule = params.get("schedule", [256, 1024, 4096])
    eps = float(params.get("eps", 1e-8))
    rep = spectral_portrait(model, schedule, eps)
    result = {"rows": [r.to_dict() for r in rep["rows"]], "fill_ratio": rep["fill_ratio"],
              "essential": rep["essential"].to_dict()["intervals"]}
    rows = [[r.N, repr(r.max_distance), repr(r.fill), len(r.outliers)] for r in rep["rows"]]
    tables = {"portrait.csv": (["N", "max_distance", "fill", "outliers"], rows)}
    series = {"fill": [[r.N, r.fill] for r in rep["rows"]],
              "max_distance": [[r.N, r.max_distance] for r in rep["rows"]]}
    return result, tables, {"style": "linespoints", "series": series, "logscale": "xy"}


HANDLERS = {
    "norm-bounds": task_norm_bounds,
    "essential-spectrum": task_essential,
    "fine-spectrum": task_fine_spectrum,
    "eigenvalues": task_eigenvalues,
    "check-conditions": task_conditions,
    "truncate": task_truncate,
    "portrait": task_portrait,
}


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_report(out_dir, report):
    path = Path(out_dir) / "report.json"
    path.write_text(json.dumps(report, indent=2, default=_jsonable) + "\n")
    return path


def write_tables(out_dir, tables):
    for name, (header, rows) in tables.items():
        with open(Path(out_dir) / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def write_plot(out_dir, plot, title):
    """plot.dat (one gnuplot index block per series) and plot.gp to render it."""
    series = plot.get("series", {})
    with open(Path(out_dir) / "plot.dat", "w") as fh:
        for name, pts in series.items():
            fh.write(f"# {name}\n")
            for x, y in pts:
                fh.write(f"{x!r} {y!r}\n")
            fh.write("\n\n")
    style = plot.get("style", "points")
    cmds = [
        "set terminal pngcairo size 900,600",
        "set output 'plot.png'",
        f"set title '{title}'",
        "set key outside",
    ]
    if plot.get("logscale"):
        cmds.append(f"set logscale {plot['logscale']}")
    parts = [f"'plot.dat' index {k} with {style} title '{name}'" for k, name in enumerate(series)]
    cmds.append("plot " + ", \\\n     ".join(parts) if parts else "# nothing to plot")
    (Path(out_dir) / "plot.gp").write_text("\n".join(cmds) + "\n")


def _error_block(exc):
    block = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("details", "partial", "index"):
        val = getattr(exc, attr, None)
        if val is not None:
            block[attr] = val
    verdict = getattr(exc, "verdict", None)
    if verdict is not None:
        block["verdict"] = verdict
    return block


def run(config_path, out_dir=None, fmt=None, threads=1, seed=None, now=None):
    """Run one job; returns the exit code.  Artifacts land in ``out_dir``."""
    base = {"version": __version__, "config": str(config_path)}
    try:
        cfg = load_config(config_path)
    except (OSError, ConfigError) as exc:
        cfg = None
        err = ("config", exc)
    else:
        err = None
    output = (cfg or {}).get("output") or {}
    out_dir = Path(out_dir or output.get("dir") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = fmt or output.get("format", "both")
    stamp = now or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    report = dict(base, config_hash=config_hash(cfg) if cfg is not None else None, timestamp=stamp)

    def fail(code, exc, stage):
        report.update(status="error", exit_code=code, stage=stage, error=_error_block(exc))
        write_report(out_dir, report)
        log.error("%s: %s", type(exc).__name__, exc)
        return code

    if err:
        return fail(EXIT_CONFIG, err[1], "config")
    try:
        if fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        params = validate(cfg)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, exc, "config")
    report["task"] = cfg["task"]
    try:
        model = build_model(cfg["model"])
    except ConfigError as exc:
        return fail(EXIT_CONFIG, exc, "config")
    except (DomainError, ModelInconsistencyError, TypeError, ValueError) as exc:
        return fail(EXIT_MODEL, exc, "model")
    ctx = {"threads": int(threads), "seed": 0 if seed is None else int(seed)}
    p = float(cfg.get("p", 2.0))
    try:
        result, tables, plot = HANDLERS[cfg["task"]](model, p, params, ctx)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, exc, "config")
    except ModelInconsistencyError as exc:
        return fail(EXIT_MODEL, exc, "model")
    except (ArithmeticError, ConsistencyError, HypothesisError, ConvergenceError) as exc:
        return fail(EXIT_NUMERIC, exc, "compute")
    except DomainError as exc:
        return fail(EXIT_CONFIG, exc, "params")
    except PentaspecError as exc:
        return fail(EXIT_NUMERIC, exc, "compute")
    report.update(status="ok", exit_code=EXIT_OK, p=p, model=model.to_dict(), result=result)
    if fmt in ("json", "both"):
        write_report(out_dir, report)
    else:
        write_report(out_dir, {k: report[k] for k in ("version", "config_hash", "timestamp", "task",
                                                      "status", "exit_code")})
    if fmt in ("csv", "both"):
        write_tables(out_dir, tables)
    write_plot(out_dir, plot, cfg["task"])
    return EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(prog="pentaspec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one job file")
    r.add_argument("config")
    r.add_argument("--out-dir", default=None)
    r.add_argument("--format", choices=FORMATS, default=None)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--seed", type=int, default=None, help="seed for Monte-Carlo norm sampling")
    r.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args.config, args.out_dir, args.format, args.threads, args.seed)


if __name__ == "__main__":
    sys.exit(main())
