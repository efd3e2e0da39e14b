"""Command-line interface.

Subcommands wire the library into a pipeline: ``stats`` (pairwise
distances), ``select`` (variance selection), ``train`` / ``predict``
(model lifecycle), ``sweep`` (variance grid evaluation) and ``analyze``
(diagnostic exports). Every numeric option can also come from a JSON
config file; explicit flags win. Exit codes: 0 success, 2 argument
error, 3 data error, 4 numeric/degenerate error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import ArgumentError, DataError, SkgError
from .graph_data import (TrainingSet, apply_normalization, build_adjacency_vectors,
                         drop_isolated, load_dataset, load_graph, load_values,
                         pairwise_stats, read_split_manifest, split_sample,
                         write_split_manifest)
from .harness import (RunConfig, SweepGrid, default_grid, export_bf_trace, export_scatter,
                      gnmse, resolve_sigma_sq, run_once, sweep, write_bf_trace_csv,
                      write_scatter_csv, write_sweep_csv)
from .model import load_model, save_model, write_training_trace_csv

CONFIG_KEYS = ("eta", "features", "epochs", "fraction", "closeness", "seed",
               "normalization", "refine", "first_order_da")


def _add_dataset_flags(parser, values_required=True):
    parser.add_argument("--graph", required=True, help="edge-list CSV: src,dst[,weight]")
    parser.add_argument("--values", required=values_required,
                        help="nodal-value CSV: node_id,value")
    parser.add_argument("--weighted", action="store_true",
                        help="read the third edge column as a weight")
    parser.add_argument("--directed", action="store_true",
                        help="treat edges as directed (adjacency vectors use out-edges)")
    parser.add_argument("--drop-isolated", action="store_true",
                        help="drop nodes whose adjacency vector would be all-zero")


def _add_config_flags(parser, include_selection=True):
    parser.add_argument("--config", help="JSON file with defaults for the options below")
    parser.add_argument("--eta", type=float, default=None, help="learning rate (default 0.1)")
    parser.add_argument("--features", type=int, default=None,
                        help="number of random features (default 200)")
    parser.add_argument("--epochs", type=int, default=None,
                        help="training passes over the sampled set (default 3)")
    parser.add_argument("--fraction", type=float, default=None,
                        help="sampled-node fraction of the graph (default 0.4)")
    parser.add_argument("--seed", type=int, default=None, help="run seed (default 0)")
    parser.add_argument("--normalization", choices=("max-abs", "none"), default=None,
                        help="value normalization policy (default max-abs)")
    if include_selection:
        parser.add_argument("--closeness", type=float, default=None,
                            help="ceiling-closeness parameter in (0, 0.5) (default 0.1)")
        parser.add_argument("--refine", action=argparse.BooleanOptionalAction, default=None,
                            help="refine the noise ceiling with one training pass")
        parser.add_argument("--first-order-da", action=argparse.BooleanOptionalAction,
                            default=None, dest="first_order_da",
                            help="use the first-order disturbing/averaging boundary")


def _merged_options(args) -> dict:
    """Config-file values overridden by explicit flags, with final defaults."""
    merged = {
        "eta": 0.1, "features": 200, "epochs": 3, "fraction": 0.4, "closeness": 0.1,
        "seed": 0, "normalization": "max-abs", "refine": False, "first_order_da": False,
    }
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as handle:
                file_conf = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config file {config_path}: {exc}") from exc
        unknown = set(file_conf) - set(CONFIG_KEYS)
        if unknown:
            raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_conf)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _run_config(opts) -> RunConfig:
    return RunConfig(
        eta=opts["eta"], n_features=opts["features"], epochs=opts["epochs"],
        sample_fraction=opts["fraction"], closeness=opts["closeness"],
        refine_noise=bool(opts["refine"]), normalization=opts["normalization"],
    )


def _load_dataset(args):
    return load_dataset(
        args.graph, args.values, weighted=args.weighted, directed=args.directed,
        drop_isolated_nodes=args.drop_isolated,
    )


def _emit(payload: dict, out_path=None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _parse_sigma(raw: str) -> float | str:
    if raw == "auto":
        return "auto"
    try:
        value = float(raw)
    except ValueError:
        raise ArgumentError(f"--sigma-sq must be a number or 'auto', got {raw!r}") from None
    if value <= 0:
        raise ArgumentError(f"--sigma-sq must be positive, got {value}")
    return value


def cmd_stats(args) -> int:
    opts = _merged_options(args)
    graph = load_graph(args.graph, weighted=args.weighted, directed=args.directed)
    if args.drop_isolated:
        graph = drop_isolated(graph)
    sampled, _ = split_sample(graph.nodes, opts["fraction"], opts["seed"])
    vectors = build_adjacency_vectors(graph, sampled, sampled)
    stats = pairwise_stats(vectors)
    payload = {
        "n_sampled": len(sampled),
        "n_pairs": stats.n_pairs,
        "d_sq_max": stats.d_sq_max,
        "d_sq_min_nonzero": stats.d_sq_min_nonzero,
        "n_distinct_d_sq": len(stats.histogram),
        "seed": opts["seed"],
        "fraction": opts["fraction"],
    }
    _emit(payload, args.out)
    if args.hist_out:
        with open(args.hist_out, "w", encoding="utf-8") as handle:
            handle.write("d_sq,count\n")
            for value, count in stats.histogram:
                handle.write(f"{value!r},{count}\n")
    return 0


def cmd_select(args) -> int:
    opts = _merged_options(args)
    dataset = _load_dataset(args)
    config = _run_config(opts)
    report = resolve_sigma_sq(dataset, config, opts["seed"],
                              first_order_da=bool(opts["first_order_da"]))
    _emit(report.to_dict(), args.out)
    return 0


def cmd_train(args) -> int:
    opts = _merged_options(args)
    dataset = _load_dataset(args)
    config = _run_config(opts)
    sigma_sq = _parse_sigma(args.sigma_sq)
    if sigma_sq == "auto":
        sigma_sq = resolve_sigma_sq(dataset, config, opts["seed"]).sigma_sq_ed
    result = run_once(dataset, config, sigma_sq, opts["seed"])
    save_model(args.model_out, result.model, referencing=result.sampled,
               value_scale=result.value_scale)
    if args.split_out:
        write_split_manifest(args.split_out, result.sampled, result.tested,
                             opts["seed"], opts["fraction"])
    if args.trace_out:
        write_training_trace_csv(args.trace_out, result.training_trace)
    _emit({
        "sigma_sq": sigma_sq,
        "n_sampled": len(result.sampled),
        "n_tested": len(result.tested),
        "duration": result.training_trace.duration,
        "test_gnmse": result.gnmse,
        "model": args.model_out,
    })
    return 0


def cmd_predict(args) -> int:
    model, meta = load_model(args.model)
    referencing = meta.get("referencing")
    if referencing is None:
        raise DataError(f"{args.model}: model lacks a referencing node list")
    scale = meta.get("value_scale") or 1.0
    dataset_values = load_values(args.values) if args.values else None
    graph = load_graph(args.graph, weighted=args.weighted, directed=args.directed)
    if args.drop_isolated:
        graph = drop_isolated(graph)
    if args.nodes:
        targets = [n.strip() for n in args.nodes.split(",") if n.strip()]
    elif args.split:
        _, targets, _, _ = read_split_manifest(args.split)
    else:
        targets = [n for n in graph.nodes]
    vectors = build_adjacency_vectors(graph, targets, referencing)
    predictions = scale * model.predict_batch(vectors)
    out = args.out or "-"
    lines = ["node_id,prediction"]
    lines += [f"{node},{float(pred)!r}" for node, pred in zip(targets, predictions)]
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    if dataset_values is not None:
        missing = [n for n in targets if n not in dataset_values]
        if missing:
            raise DataError(f"{len(missing)} target nodes have no value (first: {missing[0]!r})")
        y_true = np.array([dataset_values[n] for n in targets], dtype=np.float64)
        sys.stdout.write(f'{{"gnmse": {gnmse(y_true, predictions)!r}}}\n')
    return 0


def cmd_sweep(args) -> int:
    opts = _merged_options(args)
    dataset = _load_dataset(args)
    config = _run_config(opts)
    report = resolve_sigma_sq(dataset, config, opts["seed"])
    if args.grid_min is not None or args.grid_max is not None:
        if args.grid_min is None or args.grid_max is None:
            raise ArgumentError("--grid-min and --grid-max must be given together")
        values = np.geomspace(args.grid_min, args.grid_max, args.grid_points)
        grid = SweepGrid(sigma_sq_values=tuple(values), config=config,
                         marked_sigma_sq=report.sigma_sq_ed)
    else:
        grid = default_grid(report, config, points=args.grid_points)
    results = sweep(dataset, grid, repeats=args.repeats, base_seed=opts["seed"],
                    jobs=args.jobs, fixed_split=args.fixed_split)
    write_sweep_csv(args.out, results, marked_sigma_sq=grid.marked_sigma_sq)
    best = min(results, key=lambda r: r.gnmse_mean)
    _emit({
        "out": args.out,
        "grid_points": len(grid.sigma_sq_values),
        "repeats": args.repeats,
        "sigma_sq_ed": report.sigma_sq_ed,
        "best_sigma_sq": best.sigma_sq,
        "best_gnmse_mean": best.gnmse_mean,
    })
    return 0


def cmd_analyze(args) -> int:
    opts = _merged_options(args)
    dataset = _load_dataset(args)
    config = _run_config(opts)
    if not args.trace_out and not args.scatter_out:
        raise ArgumentError("nothing to do: pass --trace-out and/or --scatter-out")
    sigma_sq = _parse_sigma(args.sigma_sq)
    if sigma_sq == "auto":
        sigma_sq = resolve_sigma_sq(dataset, config, opts["seed"]).sigma_sq_ed
    summary = {"sigma_sq": sigma_sq}
    if args.trace_out:
        if not args.test_node:
            raise ArgumentError("--trace-out needs --test-node")
        result = run_once(dataset, config, sigma_sq, opts["seed"],
                          keep_trace=True, probe_node=args.test_node)
        write_bf_trace_csv(args.trace_out, export_bf_trace(result))
        summary["trace_out"] = args.trace_out
        summary["trace_rows"] = result.training_trace.duration
        summary["gnmse"] = result.gnmse
    if args.scatter_out:
        sampled, tested = split_sample(dataset.node_ids, opts["fraction"], opts["seed"])
        vectors = build_adjacency_vectors(dataset.graph, sampled, sampled)
        _, yn, _ = apply_normalization(
            opts["normalization"], dataset.value_array(sampled),
            dataset.value_array(tested),
        )
        rows = export_scatter(TrainingSet(vectors, yn, node_ids=tuple(sampled)))
        write_scatter_csv(args.scatter_out, rows)
        summary["scatter_out"] = args.scatter_out
        summary["scatter_rows"] = int(rows.shape[0])
    _emit(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skg",
        description="Single-kernel Gradraker: train and analyze a random-feature "
                    "learner for nodal values on graphs.",
    )
    parser.add_argument("--version", action="version", version=f"skg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    default_jobs = int(os.environ.get("SKG_JOBS", "1"))

    p_stats = sub.add_parser("stats", help="pairwise-distance statistics of a sampled split")
    _add_dataset_flags(p_stats, values_required=False)
    _add_config_flags(p_stats, include_selection=False)
    p_stats.add_argument("--out", help="also write the JSON summary here")
    p_stats.add_argument("--hist-out", help="write the full distance histogram CSV here")
    p_stats.set_defaults(func=cmd_stats)

    p_select = sub.add_parser("select", help="closed-form kernel-variance selection")
    _add_dataset_flags(p_select)
    _add_config_flags(p_select)
    p_select.add_argument("--out", help="also write the report JSON here")
    p_select.set_defaults(func=cmd_select)

    p_train = sub.add_parser("train", help="train a model on a seeded split")
    _add_dataset_flags(p_train)
    _add_config_flags(p_train)
    p_train.add_argument("--sigma-sq", default="auto",
                         help="kernel variance, or 'auto' to select it (default auto)")
    p_train.add_argument("--model-out", required=True, help="write the model JSON here")
    p_train.add_argument("--split-out", help="write the split manifest JSON here")
    p_train.add_argument("--trace-out", help="write the training trace CSV here")
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="predict nodal values with a trained model")
    p_predict.add_argument("--model", required=True, help="model JSON from 'train'")
    p_predict.add_argument("--graph", required=True, help="edge-list CSV")
    p_predict.add_argument("--weighted", action="store_true")
    p_predict.add_argument("--directed", action="store_true")
    p_predict.add_argument("--drop-isolated", action="store_true")
    p_predict.add_argument("--nodes", help="comma-separated target node ids")
    p_predict.add_argument("--split", help="split manifest; predict its tested nodes")
    p_predict.add_argument("--values", help="value CSV; report the error metric on targets")
    p_predict.add_argument("--out", help="prediction CSV path (default: stdout)")
    p_predict.set_defaults(func=cmd_predict)

    p_sweep = sub.add_parser("sweep", help="repeated runs over a variance grid")
    _add_dataset_flags(p_sweep)
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--grid-min", type=float, help="lowest variance of a manual grid")
    p_sweep.add_argument("--grid-max", type=float, help="highest variance of a manual grid")
    p_sweep.add_argument("--grid-points", type=int, default=25,
                         help="number of grid points (default 25)")
    p_sweep.add_argument("--repeats", type=int, default=50,
                         help="seeded repetitions per grid point (default 50)")
    p_sweep.add_argument("--jobs", type=int, default=default_jobs,
                         help="parallel worker processes (default $SKG_JOBS or 1)")
    p_sweep.add_argument("--fixed-split", action="store_true",
                         help="pin the split of the base seed for all repeats")
    p_sweep.add_argument("--out", required=True, help="sweep CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_analyze = sub.add_parser("analyze", help="diagnostic exports for one run")
    _add_dataset_flags(p_analyze)
    _add_config_flags(p_analyze)
    p_analyze.add_argument("--sigma-sq", default="auto",
                           help="kernel variance, or 'auto' (default auto)")
    p_analyze.add_argument("--test-node", help="tested node whose weight trace to export")
    p_analyze.add_argument("--trace-out", help="weight-trace CSV path")
    p_analyze.add_argument("--scatter-out", help="distance/value-difference scatter CSV path")
    p_analyze.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SkgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
