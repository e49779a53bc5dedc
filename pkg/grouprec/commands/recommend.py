from ..pipeline import stage_recommend
from .common import add_experiment_flags, resolve_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("recommend", help="rank items for every stored group (needs groups)")
    add_experiment_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    cfg, workdir = resolve_config(args)
    total = stage_recommend(cfg, workdir)
    print(f"Stored {total} recommendation rows for {', '.join(cfg.algorithms)}")
    return 0
