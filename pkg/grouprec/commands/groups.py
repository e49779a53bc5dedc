from ..pipeline import stage_groups
from .common import add_experiment_flags, resolve_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("groups", help="form random or similar groups (needs factorize)")
    add_experiment_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    cfg, workdir = resolve_config(args)
    total = stage_groups(cfg, workdir)
    print(f"Formed {total} groups over {cfg.evaluation.repetitions} repetitions")
    return 0
