"""Command-line entry point: ``fuzzy-drive orient|track|verify``.

Exit status: 0 on success, 2 when a run does not converge (or the
equivalence check fails), 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .experiments import (
    ConfigError,
    ExperimentConfig,
    config_to_dict,
    default_config,
    load_config,
    run_orientation,
    run_tracking,
    verify_from_config,
)
from .output import emit_plot, write_csv

log = logging.getLogger("fuzzy_drive")

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

_KIND_BY_COMMAND = {"orient": "orientation", "track": "tracking", "verify": "verify"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config (schema = 1)")
    p.add_argument("--seed", type=int, help="noise generator seed")
    p.add_argument("--csv", type=Path, help="CSV output path")
    for gain in ("Ge", "Gr", "Gu", "L"):
        p.add_argument(f"--{gain}", type=float, help=f"override fuzzy gain {gain}")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzy-drive", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    orient = sub.add_parser("orient", help="heading regulation experiment")
    _common(orient)
    orient.add_argument("--plot", type=Path, help="SVG plot output path")
    orient.add_argument("--theta-ref", type=float)
    orient.add_argument("--theta-initial", type=float)
    orient.add_argument("--iterations", type=int)

    track = sub.add_parser("track", help="waypoint path-tracking experiment")
    _common(track)
    track.add_argument("--plot", type=Path, help="SVG plot output path")
    track.add_argument(
        "--waypoint", type=float, nargs=2, action="append", metavar=("X", "Y"),
        help="waypoint in meters; repeat for a path (replaces the config's list)",
    )
    track.add_argument("--Kp", type=float)
    track.add_argument("--heading-source", choices=("odometry", "compass"))
    track.add_argument("--max-steps", type=int)

    verify = sub.add_parser("verify", help="closed form vs full inference sweep")
    _common(verify)
    verify.add_argument("--grid-min", type=float)
    verify.add_argument("--grid-max", type=float)
    verify.add_argument("--samples", type=int, help="samples per axis")
    return parser


def _overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    def pick(section, **mapping):
        values = {k: v for k, v in mapping.items() if v is not None}
        return dataclasses.replace(section, **values) if values else section

    fuzzy = pick(cfg.fuzzy, Ge=args.Ge, Gr=args.Gr, Gu=args.Gu, L=args.L)
    sim = pick(cfg.sim, rng_seed=args.seed)
    output = pick(cfg.output, csv_path=_str(args.csv), plot_path=_str(getattr(args, "plot", None)))
    changes = dict(fuzzy=fuzzy, sim=sim, output=output)
    if args.command == "orient":
        changes["orientation"] = pick(
            cfg.orientation, theta_ref=args.theta_ref, theta_initial=args.theta_initial, iterations=args.iterations
        )
    elif args.command == "track":
        waypoints = tuple(tuple(w) for w in args.waypoint) if args.waypoint else None
        changes["tracking"] = pick(
            cfg.tracking, waypoints=waypoints, Kp=args.Kp, heading_source=args.heading_source, max_steps=args.max_steps
        )
    else:
        changes["verify"] = pick(
            cfg.verify, grid_min=args.grid_min, grid_max=args.grid_max, samples_per_axis=args.samples
        )
    return dataclasses.replace(cfg, **changes)


def _str(path: Optional[Path]) -> Optional[str]:
    return None if path is None else str(path)


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    kind = _KIND_BY_COMMAND[args.command]
    cfg = load_config(args.config) if args.config else default_config(kind)
    if cfg.kind != kind:
        raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}")
    return _overrides(cfg, args)


def _provenance(cfg: ExperimentConfig) -> str:
    return f"fuzzy-drive seed={cfg.sim.rng_seed} config={json.dumps(config_to_dict(cfg), sort_keys=True)}"


def _run_loop(cfg: ExperimentConfig) -> int:
    if cfg.kind == "orientation":
        result = run_orientation(cfg)
        reference = None
    else:
        result = run_tracking(cfg)
        start = cfg.tracking.start
        reference = [(start[0], start[1]), *cfg.tracking.waypoints]
    if cfg.output.csv_path:
        write_csv(result.records, cfg.output.csv_path, comment=_provenance(cfg))
        log.info("wrote %s", cfg.output.csv_path)
    if cfg.output.plot_path:
        emit_plot(result.records, cfg.kind, cfg.output.plot_path, reference=reference)
        log.info("wrote %s", cfg.output.plot_path)
    status = "converged" if result.converged else "NOT converged"
    details = " ".join(f"{k}={v}" for k, v in result.summary.items())
    print(f"{cfg.kind}: {status} records={len(result.records)} {details}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _run_verify(cfg: ExperimentConfig) -> int:
    report = verify_from_config(cfg)
    if cfg.output.csv_path:
        path = Path(cfg.output.csv_path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# {_provenance(cfg)}\n")
            fh.write(f"# max_abs_diff={report.max_abs_diff!r} argmax={report.argmax!r} points={report.points}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["group", "count"])
            writer.writerows(report.group_counts.items())
    print(
        f"verify: points={report.points} max_abs_diff={report.max_abs_diff:.3e} "
        f"at (e*, r*)={report.argmax} groups_visited={report.groups_visited}/10 "
        f"{'PASS' if report.passed else 'FAIL'}"
    )
    for group, count in report.group_counts.items():
        print(f"  {group:<13} {count}")
    return EXIT_OK if report.passed else EXIT_NOT_CONVERGED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
        if cfg.kind == "verify":
            return _run_verify(cfg)
        return _run_loop(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"fuzzy-drive: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
