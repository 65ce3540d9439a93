"""Command-line surface: detect change points in a delimited file, run
benchmark scenarios, export gain curves and simulate scenario data.

Results are emitted as schema-versioned JSON documents (detect) or CSV
tables (benchmark, gain-curve, simulate) that are byte-identical across
runs with the same flags and seed. Wall-clock timing goes to stderr; the
document's ``timings`` section carries deterministic workload counters and
only includes wall seconds when ``--wall-time`` is passed.

Every flag can also be supplied through an environment variable with the
``SEGCLASS_`` prefix (dashes become underscores, e.g. ``SEGCLASS_METHOD``);
explicit flags win.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from .core import DetectionConfig, InputError, SegmentBounds, Segmentation
from .detector import (ForestEngine, KnnEngine, StubPriorEngine, detect,
                       step1_gain_table, two_step_search)
from .forest import ForestParams
from .ingest import SCALE_ESTIMATORS, encode_and_normalize, load_table
from .meanshift import mean_gain_curve
from .metrics import metric_report
from .simgen import ScenarioSpec
from . import __version__

SCHEMA_VERSION = 1
_METHODS = {"rf": "random_forest", "knn": "knn", "mean": "change_in_mean"}


class UsageError(Exception):
    """Malformed flag values (exit code 2), as opposed to data errors (1)."""


# Published schema for the `detect` output document.
OUTPUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "tool", "config", "n", "d", "boundaries",
                 "changepoints", "split_log", "timings"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {
            "type": "object",
            "required": ["name", "version"],
            "properties": {"name": {"type": "string"},
                           "version": {"type": "string"}},
        },
        "config": {
            "type": "object",
            "required": ["method", "delta", "eta", "threshold",
                         "permutations", "seed", "method_params"],
        },
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "boundaries": {"type": "array", "items": {"type": "integer"}},
        "changepoints": {"type": "array", "items": {"type": "integer"}},
        "split_log": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["u", "v", "guesses", "s1", "s_hat",
                             "step1_max_gain", "best_gain", "p_value",
                             "accepted"],
                "properties": {
                    "u": {"type": "integer"},
                    "v": {"type": "integer"},
                    "guesses": {"type": "array", "items": {"type": "integer"}},
                    "s1": {"type": ["integer", "null"]},
                    "s_hat": {"type": ["integer", "null"]},
                    "step1_max_gain": {"type": "number"},
                    "best_gain": {"type": "number"},
                    "p_value": {"type": ["number", "null"]},
                    "accepted": {"type": "boolean"},
                },
            },
        },
        "timings": {
            "type": "object",
            "required": ["segments_visited", "engine_fits", "wall_seconds"],
            "properties": {
                "segments_visited": {"type": "integer"},
                "engine_fits": {"type": "integer"},
                "wall_seconds": {"type": ["number", "null"]},
            },
        },
    },
}


def _env(name: str, default=None):
    return os.environ.get("SEGCLASS_" + name.upper().replace("-", "_"), default)


def _env_flag(name: str) -> bool:
    value = _env(name)
    return value is not None and value.lower() not in ("", "0", "false", "no")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--method", choices=["rf", "knn", "mean"],
                        default=_env("method", "rf"))
    parser.add_argument("--delta", type=float, default=float(_env("delta", 0.01)))
    parser.add_argument("--threshold", type=float,
                        default=float(_env("threshold", 0.02)))
    parser.add_argument("--permutations", type=int,
                        default=int(_env("permutations", 199)))
    parser.add_argument("--eta", type=float,
                        default=float(_env("eta", float(np.exp(-6.0)))))
    parser.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    parser.add_argument("--threads", type=int,
                        default=int(_env("threads", 0)) or None)
    parser.add_argument("--output", default=_env("output"))
    parser.add_argument("--trees", type=int, default=int(_env("trees", 100)))
    parser.add_argument("--max-depth", type=int,
                        default=int(_env("max-depth", 8)),
                        help="tree depth cap; 0 or negative = unlimited")
    parser.add_argument("--mtry", type=int,
                        default=int(_env("mtry", 0)) or None)
    parser.add_argument("--min-leaf", type=int, default=int(_env("min-leaf", 1)))
    parser.add_argument("--knn-cap", type=int,
                        default=int(_env("knn-cap", 20000)))


def _add_ingest(parser: argparse.ArgumentParser):
    parser.add_argument("--delimiter", default=_env("delimiter", ","))
    parser.add_argument("--label-column", default=_env("label-column"))
    parser.add_argument("--no-normalize", action="store_true",
                        default=_env_flag("no-normalize"))
    parser.add_argument("--scale-estimator", choices=list(SCALE_ESTIMATORS),
                        default=_env("scale-estimator", "abs_diff_median"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segclass",
        description="Classifier-based multivariate change point detection.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect change points in a data file")
    p.add_argument("--input", required=True)
    p.add_argument("--wall-time", action="store_true",
                   help="include wall seconds in the output document "
                        "(makes documents non-reproducible)")
    _add_common(p)
    _add_ingest(p)

    p = sub.add_parser("benchmark", help="run seeded scenario replicates")
    p.add_argument("--scenario", required=True,
                   help="cim | cic | dirichlet | dataset:<path> | "
                        "variable:dirichlet:<n>:<K> | fp:<cim|dirichlet|dataset:<path>>")
    p.add_argument("--n-sims", type=int, default=int(_env("n-sims", 100)))
    _add_common(p)
    _add_ingest(p)

    p = sub.add_parser("gain-curve",
                       help="export gain curves and per-observation ratios")
    p.add_argument("--input", required=True)
    p.add_argument("-u", type=int, default=0, help="left segment boundary")
    p.add_argument("-v", type=int, default=None, help="right segment boundary")
    p.add_argument("--in-sample", action="store_true",
                   help="rf only: use in-sample instead of out-of-bag "
                        "predictions (diagnostic)")
    p.add_argument("--stub", action="store_true",
                   help="use the no-signal stub engine instead of --method")
    _add_common(p)
    _add_ingest(p)

    p = sub.add_parser("simulate", help="write scenario data as CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--delta", type=float, default=float(_env("delta", 0.01)))
    p.add_argument("--output", default=_env("output"))
    p.add_argument("--truth-output", default=None,
                   help="also write ground-truth boundaries as JSON")
    _add_ingest(p)
    return parser


def _configure_threads(threads):
    if threads:
        import numba
        numba.set_num_threads(max(1, threads))


def _forest_params(args) -> dict:
    return {
        "n_trees": args.trees,
        "max_depth": None if args.max_depth <= 0 else args.max_depth,
        "mtry": args.mtry,
        "min_leaf": args.min_leaf,
    }


def _config_from(args) -> DetectionConfig:
    method = _METHODS[args.method]
    if method == "random_forest":
        params = _forest_params(args)
    elif method == "knn":
        params = {"cache_cap": args.knn_cap}
    else:
        params = {}
    return DetectionConfig(delta=args.delta, eta=args.eta,
                           threshold=args.threshold,
                           permutations=args.permutations, seed=args.seed,
                           method=method, method_params=params)


def _load_matrix(args):
    table = load_table(args.input, delimiter=args.delimiter,
                       label_column=args.label_column)
    enc = encode_and_normalize(table, normalize=not args.no_normalize,
                               scale_estimator=args.scale_estimator)
    return enc


def _write_text(path, text: str):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _detect_document(config: DetectionConfig, result, n: int, d: int,
                     wall: float | None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "segclass", "version": __version__},
        "config": {
            "method": config.method,
            "delta": config.delta,
            "eta": config.eta,
            "threshold": config.threshold,
            "permutations": config.permutations,
            "seed": config.seed,
            "method_params": {k: v for k, v in
                              sorted(dict(config.method_params).items())},
        },
        "n": n,
        "d": d,
        "boundaries": list(result.segmentation.boundaries),
        "changepoints": list(result.segmentation.changepoints),
        "split_log": [
            {
                "u": r.u, "v": r.v, "guesses": list(r.guesses),
                "s1": r.s1, "s_hat": r.s_hat,
                "step1_max_gain": r.step1_max_gain,
                "best_gain": r.best_gain,
                "p_value": r.p_value, "accepted": r.accepted,
            }
            for r in result.split_log
        ],
        "timings": {
            "segments_visited": result.segments_visited,
            "engine_fits": result.engine_fits,
            "wall_seconds": wall,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _cmd_detect(args) -> int:
    _configure_threads(args.threads)
    enc = _load_matrix(args)
    config = _config_from(args)
    t0 = time.perf_counter()
    result = detect(enc.matrix, config)
    wall = time.perf_counter() - t0
    print(f"detect: n={enc.matrix.n} d={enc.matrix.d} "
          f"changepoints={list(result.segmentation.changepoints)} "
          f"wall={wall:.3f}s", file=sys.stderr)
    _write_text(args.output,
                _detect_document(config, result, enc.matrix.n, enc.matrix.d,
                                 wall if args.wall_time else None))
    return 0


def _resolve_scenario(args) -> tuple[ScenarioSpec, bool]:
    """Parse the --scenario string; returns (spec, is_false_positive_suite)."""
    text = args.scenario
    fp = text.startswith("fp:")
    if fp:
        text = text[3:]
    if text in ("cim", "cic", "dirichlet"):
        if fp:
            return ScenarioSpec("homogeneous_shuffle", {"base": text}), True
        return ScenarioSpec(text), False
    if text.startswith("dataset:"):
        path = text[len("dataset:"):]
        table = load_table(path, delimiter=args.delimiter,
                           label_column=args.label_column)
        if table.labels is None:
            raise InputError(
                "dataset scenarios need --label-column to name the class column")
        enc = encode_and_normalize(table, normalize=not args.no_normalize,
                                   scale_estimator=args.scale_estimator)
        params = {"features": enc.matrix.data, "labels": enc.labels,
                  "delta": args.delta}
        if fp:
            return ScenarioSpec("homogeneous_shuffle", params), True
        return ScenarioSpec("dataset_concat", params), False
    if text.startswith("variable:dirichlet:"):
        parts = text.split(":")
        try:
            if len(parts) != 4:
                raise ValueError
            n, k = int(parts[2]), int(parts[3])
        except ValueError:
            raise UsageError(
                f"expected variable:dirichlet:<n>:<K>, got {args.scenario!r}")
        return ScenarioSpec("variable_dirichlet", {"n": n, "K": k}), False
    raise UsageError(f"unknown scenario {args.scenario!r}")


def _cmd_benchmark(args) -> int:
    _configure_threads(args.threads)
    if args.n_sims < 1:
        raise InputError("--n-sims must be >= 1")
    spec, is_fp = _resolve_scenario(args)
    config = _config_from(args)
    rows = []
    for rep in range(args.n_sims):
        seed = args.seed + rep
        generated = spec.generate(seed)
        if is_fp:
            X, truth = generated, Segmentation((0, generated.n))
        else:
            X, truth = generated.X, generated.truth
        run_config = DetectionConfig(
            delta=config.delta, eta=config.eta, threshold=config.threshold,
            permutations=config.permutations, seed=seed, method=config.method,
            method_params=config.method_params)
        t0 = time.perf_counter()
        result = detect(X, run_config)
        wall = time.perf_counter() - t0
        report = metric_report(truth, result.segmentation)
        rows.append({
            "replicate": rep, "seed": seed, "n": X.n,
            "ari": report.ari,
            "d_true_est": report.d_true_to_est,
            "d_est_true": report.d_est_to_true,
            "hausdorff": report.hausdorff,
            "n_changepoints": report.n_est_changepoints,
            "detected": int(report.n_est_changepoints > 0),
            "wall_seconds": round(wall, 6),
        })
    fields = list(rows[0].keys())
    mean_row = {"replicate": "mean", "seed": "", "n": rows[0]["n"]}
    for key in fields[3:]:
        mean_row[key] = sum(r[key] for r in rows) / len(rows)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    writer.writerow(mean_row)
    _write_text(args.output, buf.getvalue())
    print(f"benchmark: scenario={args.scenario} method={args.method} "
          f"n_sims={args.n_sims} mean_ari={mean_row['ari']:.4f} "
          f"detection_rate={mean_row['detected']:.4f}", file=sys.stderr)
    return 0


def _cmd_gain_curve(args) -> int:
    _configure_threads(args.threads)
    enc = _load_matrix(args)
    series = enc.matrix
    u = args.u
    v = args.v if args.v is not None else series.n
    if not (0 <= u < v <= series.n):
        raise UsageError(f"bounds ({u}, {v}] out of range for n={series.n}")
    bounds = SegmentBounds(u, v)
    config = _config_from(args) if not args.stub else DetectionConfig(
        delta=args.delta, eta=args.eta, seed=args.seed)
    rows = []
    if args.method == "mean" and not args.stub:
        curve = mean_gain_curve(series, bounds, args.delta, series.n)
        for s, value in zip(curve.candidates, curve.values):
            rows.append({"record": "gain", "guess": "grid", "position": int(s),
                         "k": "", "value": value})
    else:
        if args.stub:
            engine = StubPriorEngine(series)
        elif args.method == "rf":
            engine = ForestEngine(series, ForestParams(**_forest_params(args)),
                                  seed=args.seed, in_sample=args.in_sample)
        else:
            engine = KnnEngine(series, seed=args.seed, cache_cap=args.knn_cap)
        step = two_step_search(series, bounds, engine, config)
        cands, table = step1_gain_table(step.likelihoods, config.delta, series.n)
        for j, guess in enumerate(step.initial_guesses):
            for s, value in zip(cands, table[:, j]):
                rows.append({"record": "gain", "guess": guess,
                             "position": int(s), "k": "", "value": value})
            for k in (1, 2):
                for i, value in enumerate(step.likelihoods.ell[:, k - 1, j]):
                    rows.append({"record": "ell", "guess": guess,
                                 "position": u + 1 + i, "k": k, "value": value})
        final = step.final_gain_curve
        for s, value in zip(final.candidates, final.values):
            rows.append({"record": "gain", "guess": f"final:{step.s1}",
                         "position": int(s), "k": "", "value": value})
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["record", "guess", "position", "k", "value"],
        lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _write_text(args.output, buf.getvalue())
    return 0


def _cmd_simulate(args) -> int:
    spec, is_fp = _resolve_scenario(args)
    generated = spec.generate(args.seed)
    if is_fp:
        X, truth = generated, Segmentation((0, generated.n))
    else:
        X, truth = generated.X, generated.truth
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"c{j}" for j in range(X.d)])
    for row in X.data:
        writer.writerow([repr(float(x)) for x in row])
    _write_text(args.output, buf.getvalue())
    if args.truth_output:
        with open(args.truth_output, "w", encoding="utf-8") as fh:
            json.dump({"boundaries": list(truth.boundaries)}, fh)
            fh.write("\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "detect":
            return _cmd_detect(args)
        if args.command == "benchmark":
            return _cmd_benchmark(args)
        if args.command == "gain-curve":
            return _cmd_gain_curve(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
