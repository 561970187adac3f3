"""Command-line entry points.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cost_db import CostDatabase, export_finetune_dataset
from .design_space import load_device
from .errors import AccelDseError
from .evaluator import evaluate, load_profile
from .explorer import load_exploration_config, run_exploration
from .retrieval import load_or_build
from .templates import design_from_dict


def _cmd_init(args) -> int:
    workspace = Path(args.directory)
    (workspace / "db").mkdir(parents=True, exist_ok=True)
    (workspace / "runs").mkdir(exist_ok=True)
    print(f"initialized workspace at {workspace}")
    return 0


def _cmd_index(args) -> int:
    workspace = Path(args.workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    idx = load_or_build(args.corpus, workspace / "index.json")
    print(f"indexed {idx.n_docs} documents")
    return 0


def _cmd_evaluate(args) -> int:
    design = design_from_dict(json.loads(Path(args.design).read_text(encoding="utf-8")))
    device = load_device(args.device)
    profile = load_profile(args.profile)
    report = evaluate(design, device, profile)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_explore(args) -> int:
    cfg = load_exploration_config(
        args.workload,
        args.device,
        args.directives,
        args.workspace,
        strategy=args.strategy,
        max_iterations=args.iterations,
        candidates_per_iteration=args.candidates,
        diversity_k=args.diversity,
        seed=args.seed,
    )
    _, report = run_exploration(cfg)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    db = CostDatabase(args.workspace)
    filt = {}
    if args.verdict:
        filt["verdict"] = args.verdict
    if args.feasible is not None:
        filt["feasible"] = args.feasible
    count = export_finetune_dataset(db, filt, args.out)
    print(count)
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.workspace, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="accel-dse")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a workspace skeleton")
    p.add_argument("directory")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("index", help="build the retrieval index for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--workspace", default=".")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("evaluate", help="evaluate one design analytically")
    p.add_argument("--design", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--profile", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("explore", help="run an exploration")
    p.add_argument("--workload", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--directives", required=True)
    p.add_argument("--strategy", default="exhaustive", choices=["exhaustive", "heuristic", "llm"])
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--candidates", type=int, default=4)
    p.add_argument("--diversity", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workspace", default="workspace")
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("export", help="export the fine-tuning dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--workspace", default="workspace")
    p.add_argument("--verdict", default=None)
    p.add_argument("--feasible", default=None, type=lambda s: s.lower() in ("1", "true", "yes"))
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workspace", default="workspace")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AccelDseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
