"""Command line entry points: run scenarios, compute metrics, calibrate RFs."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np


def _cmd_run(args) -> int:
    from .sim import compute_metrics, load_scenario, run_scenario, write_csv

    scenario = load_scenario(args.scenario)
    if args.duration is not None:
        scenario.duration = args.duration
    if args.seed is not None:
        scenario.seed = args.seed
    if args.serve is not None:
        from .bridge import serve_scenario

        serve_scenario(scenario, args.serve, out=args.out)
        return 0
    if args.realtime:
        import time

        from .sim import SimEngine

        engine = SimEngine(scenario)
        records = []
        next_t = time.monotonic()
        for _ in range(engine.n_ticks):
            records.append(engine.step())
            next_t += scenario.controller.ts
            time.sleep(max(0.0, next_t - time.monotonic()))
    else:
        records = run_scenario(scenario)
    if args.out:
        write_csv(records, args.out)
        print(f"wrote {len(records)} ticks to {args.out}")
    metrics = compute_metrics(records)
    print(json.dumps(metrics, indent=2, default=str))
    return 0


def _cmd_metrics(args) -> int:
    from .sim import compute_metrics, read_csv

    records = read_csv(args.log)
    print(json.dumps(compute_metrics(records), indent=2, default=str))
    return 0


def _cmd_calibrate_rf(args) -> int:
    from .pps import calibrate_sigma, crossing_distance, nominal_rf

    sigma = calibrate_sigma()
    rf = nominal_rf()
    print(f"sigma = {sigma:.6f} m")
    for theta in (-0.5, 0.0, 1.0):
        d = crossing_distance(rf, theta)
        print(f"threshold 0.2 crossing at valence {theta:+.1f}: {d:.4f} m")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reachavoid",
        description="Simulated reaching with peripersonal-space collision avoidance.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", default=None, help="CSV log path")
    p_run.add_argument("--realtime", action="store_true", help="pace ticks to wall clock")
    p_run.add_argument("--serve", type=int, default=None, metavar="PORT",
                       help="serve live telemetry/commands on this port (implies --realtime)")
    p_run.add_argument("--duration", type=float, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_metrics = sub.add_parser("metrics", help="metrics from a CSV log")
    p_metrics.add_argument("--log", required=True)
    p_metrics.set_defaults(func=_cmd_metrics)

    p_cal = sub.add_parser("calibrate-rf", help="print the RF width and trigger distances")
    p_cal.set_defaults(func=_cmd_calibrate_rf)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
