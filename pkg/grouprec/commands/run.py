from ..pipeline import run_experiment
from .common import add_experiment_flags, resolve_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="all stages in one pass")
    add_experiment_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    cfg, workdir = resolve_config(args)
    outcome = run_experiment(cfg, workdir)
    print(f"Wrote {len(outcome.metrics)} metric rows to {outcome.out_dir}")
    if outcome.partial:
        print(f"Partial results: repetitions {sorted(outcome.failed)} failed")
        return 1
    return 0
