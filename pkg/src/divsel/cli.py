"""Command-line entry point: select / simulate / compare.

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime error.
Errors are emitted as one JSON object on stderr; progress goes to stderr
too (silence with --quiet), data only to the requested output files.
Input files are never modified.

Seed precedence: --seed flag > DIVSEL_SEED env var > config file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .errors import ConfigError, DataError, DivselError
from .geo_graph import build_knn_graph, dump_edges
from .manifest import load_manifest, write_manifest
from .selector import run_schedule
from .simharness import TrajectoryConfig, evaluate_selection, generate_trajectories

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


def _emit_error(exc: Exception) -> int:
    kind = type(exc).__name__
    payload = {"error": {"kind": kind, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME


def _progress(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _resolve_seed(args, config_seed: int) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DIVSEL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"DIVSEL_SEED must be an integer, got {env!r}") from None
    return config_seed


def _ids_csv_path(out: Path) -> Path:
    return out.with_suffix(".ids.csv") if out.suffix else out.with_name(out.name + ".ids.csv")


def _cmd_select(args) -> int:
    config = RunConfig.from_json_file(args.config)
    config = config.with_seed(_resolve_seed(args, config.seed))
    manifest = load_manifest(args.manifest, format=args.format)
    _progress(args, f"loaded {len(manifest)} samples from {args.manifest}")
    if args.dump_graph:
        graph = build_knn_graph(manifest, config.knn_k, config.large_constant)
        dump_edges(graph, args.dump_graph)
        _progress(args, f"wrote KNN graph edges to {args.dump_graph}")
    report = run_schedule(manifest, config)
    out = Path(args.out)
    report.write_json(out)
    ids_csv = _ids_csv_path(out)
    report.write_ids_csv(ids_csv)
    _progress(
        args,
        f"selected {sum(c.frames for c in report.cycles)} frames "
        f"(cost {report.total_cost:.2f}) -> {out}, {ids_csv}",
    )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = TrajectoryConfig.from_json_file(args.scenario)
    seed = _resolve_seed(args, scenario.seed)
    if seed != scenario.seed:
        scenario = TrajectoryConfig.from_dict({**scenario.to_dict(), "seed": seed})
    manifest = generate_trajectories(scenario)
    write_manifest(manifest, args.out, format=args.format)
    _progress(args, f"wrote {len(manifest)} samples to {args.out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    labels = [Path(p).stem for p in args.configs]
    dupes = sorted({l for l in labels if labels.count(l) > 1})
    if dupes:
        raise ConfigError(f"duplicate config label(s): {dupes}")
    manifest = load_manifest(args.manifest, format=args.format)
    _progress(args, f"loaded {len(manifest)} samples from {args.manifest}")
    rows = []
    for label, cfg_path in zip(labels, args.configs):
        config = RunConfig.from_json_file(cfg_path)
        config = config.with_seed(_resolve_seed(args, config.seed))
        report = run_schedule(manifest, config)
        coverage = evaluate_selection(manifest, report.selected_ids)
        rows.append(
            {
                "label": label,
                "strategy": report.strategy,
                "seed": report.seed,
                "frames": coverage.frames,
                "boxes": coverage.boxes,
                "dispersion_m": repr(coverage.dispersion_m),
                "stream_coverage": repr(coverage.stream_coverage),
                "total_cost": repr(report.total_cost),
            }
        )
        _progress(args, f"{label}: {coverage.frames} frames, {coverage.boxes} boxes")
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "label", "strategy", "seed", "frames", "boxes",
                "dispersion_m", "stream_coverage", "total_cost",
            ],
        )
        writer.writeheader()
        writer.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divsel",
        description="Budget-constrained diversity-based sample selection",
    )
    parser.add_argument("--version", action="version", version=f"divsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="run a selection schedule on a manifest")
    p_select.add_argument("--manifest", required=True, help="manifest file (.csv or .jsonl)")
    p_select.add_argument("--config", required=True, help="run config JSON")
    p_select.add_argument("--out", required=True, help="report JSON output path")
    p_select.add_argument("--format", choices=["csv", "jsonl"], help="manifest format override")
    p_select.add_argument("--dump-graph", help="also write the KNN edge list CSV here")
    p_select.add_argument("--seed", type=int, help="override the config seed")
    p_select.add_argument("--quiet", action="store_true", help="silence progress output")
    p_select.set_defaults(func=_cmd_select)

    p_sim = sub.add_parser("simulate", help="generate a synthetic trajectory manifest")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON")
    p_sim.add_argument("--out", required=True, help="manifest output path (.csv or .jsonl)")
    p_sim.add_argument("--format", choices=["csv", "jsonl"], help="output format override")
    p_sim.add_argument("--seed", type=int, help="override the scenario seed")
    p_sim.add_argument("--quiet", action="store_true", help="silence progress output")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="run several configs and tabulate coverage")
    p_cmp.add_argument("--manifest", required=True, help="manifest file (.csv or .jsonl)")
    p_cmp.add_argument("--configs", required=True, nargs="+", help="run config JSON files")
    p_cmp.add_argument("--out", required=True, help="comparison table CSV output path")
    p_cmp.add_argument("--format", choices=["csv", "jsonl"], help="manifest format override")
    p_cmp.add_argument("--seed", type=int, help="override every config's seed")
    p_cmp.add_argument("--quiet", action="store_true", help="silence progress output")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivselError as exc:
        return _emit_error(exc)
    except Exception as exc:  # noqa: BLE001 - report, don't traceback
        return _emit_error(exc)


if __name__ == "__main__":
    sys.exit(main())
