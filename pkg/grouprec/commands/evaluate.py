from ..pipeline import stage_evaluate
from .common import add_experiment_flags, resolve_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="score stored recommendations and write the CSV files")
    add_experiment_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    cfg, workdir = resolve_config(args)
    metrics = stage_evaluate(cfg, workdir, cfg.out)
    print(f"Wrote {len(metrics)} metric rows to {cfg.out}")
    return 0
