from ..pipeline import stage_factorize
from .common import add_experiment_flags, resolve_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("factorize", help="ingest, filter, hold out and factorize every repetition")
    add_experiment_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    cfg, workdir = resolve_config(args)
    ratings = stage_factorize(cfg, workdir)
    print(
        f"Factorized {cfg.evaluation.repetitions} repetitions of "
        f"{ratings.n_users} users x {ratings.n_items} items into {workdir}"
    )
    return 0
