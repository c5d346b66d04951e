#!/usr/bin/env python3
"""Run the shipped scenarios, write CSV logs, and print a metrics summary."""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[1] / "src"))

from reachavoid.sim import compute_metrics, load_scenario, run_scenario, write_csv

SHIPPED = ("static_reach", "modulated_hand", "modulated_head", "circle_track")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    root = Path(__file__).parents[1]
    ap.add_argument("--out", default=root / "out", type=Path)
    ap.add_argument("--scenarios", nargs="*", default=SHIPPED)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    summary = {}
    for name in args.scenarios:
        scenario = load_scenario(root / "scenarios" / f"{name}.json")
        records = run_scenario(scenario)
        csv_path = args.out / f"{name}.csv"
        write_csv(records, csv_path)
        metrics = compute_metrics(records)
        summary[name] = metrics
        trig = {
            part: (f"{v['distance']:.3f} m @ t={v['t']:.2f}s" if v else "never")
            for part, v in metrics["trigger"].items()
        }
        print(f"{name}:")
        print(f"  log: {csv_path}  ({metrics['n_ticks']} ticks)")
        print(f"  triggers: {trig}")
        print(f"  min human-taxel distance: {metrics['min_stimulus_taxel_distance']}")
        print(f"  tick p99: {metrics['tick_ms_p99']:.2f} ms")
    (args.out / "metrics.json").write_text(json.dumps(summary, indent=2, default=str))
    print(f"\nmetrics written to {args.out / 'metrics.json'}")


if __name__ == "__main__":
    main()
