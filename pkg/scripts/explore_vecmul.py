#!/usr/bin/env python3
"""Run a small vector-multiply design-space exploration end to end.

Enumerates the shipped directive grid, evaluates every candidate with the
analytical cost model, prints the frontier, and leaves a browsable workspace
(run folders, datapoint log, exploration report) behind.

Usage:
    python3 scripts/explore_vecmul.py --workspace /tmp/vecmul-demo --strategy heuristic
"""

import argparse
import json
import sys
from pathlib import Path

from accel_dse.design_space import load_directives, load_workload
from accel_dse.evaluator import shipped_xc7z020_device
from accel_dse.explorer import Exploration, ExplorationConfig

DATA = Path(__file__).resolve().parent.parent / "src" / "accel_dse" / "data"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workspace", type=Path, default=Path("vecmul-demo"))
    parser.add_argument("--strategy", choices=("exhaustive", "heuristic"), default="exhaustive")
    parser.add_argument("--iterations", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    cfg = ExplorationConfig(
        workload=load_workload(DATA / "vecmul_workload.json"),
        device=shipped_xc7z020_device(),
        directives=load_directives(DATA / "vecmul_directives.json"),
        workspace=args.workspace,
        strategy=args.strategy,
        max_iterations=args.iterations,
        seed=args.seed,
    )
    exploration = Exploration(cfg)
    report = exploration.run()

    print(json.dumps(report, indent=2))
    print("\nfrontier (best first):")
    for entry in exploration.state.frontier():
        p = entry.point
        print(
            f"  depth={p.buffer_depth:5d} P={p.parallelism_p} width={p.data_width}"
            f"  objective={entry.objective:.0f} cycles  [{entry.point_id}]"
        )
    print(f"\nworkspace: {args.workspace.resolve()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
