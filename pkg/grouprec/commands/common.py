import argparse
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from .. import config
from ..pipeline import load_config
from ..schemas.config import ExperimentConfig, GroupSpec

logger = logging.getLogger(__name__)


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value!r}") from exc


def _float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {value!r}") from exc


def _str_list(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring ExperimentConfig keys; unset flags keep the configured value."""
    parser.add_argument("--config", help="JSON experiment config to start from")
    parser.add_argument("--workdir", help=f"artifact directory (default {config.WORKDIR})")
    parser.add_argument("--out", help="directory for CSV outputs (default: the workdir)")
    parser.add_argument("--dataset", help="ratings file")
    parser.add_argument("--format", choices=["movielens-dat", "csv"])
    parser.add_argument("--min-ratings", type=int)
    parser.add_argument("--holdout-frac", type=float)
    parser.add_argument("--repetitions", type=int)
    parser.add_argument("--dim", type=int, help="latent dimension d")
    parser.add_argument("--reg", type=float)
    parser.add_argument("--max-iters", type=int)
    parser.add_argument("--gamma-grid", type=_float_list, help="e.g. 0.125,0.25,0.5")
    parser.add_argument("--lambda-grid", type=_float_list, help="FM lambda values")
    parser.add_argument("--group-kind", choices=["random", "similar"])
    parser.add_argument("--group-size", type=_int_list, help="e.g. 2,4,6,8")
    parser.add_argument("--group-count", type=int)
    parser.add_argument("--k", type=_int_list, help="list lengths to evaluate, e.g. 1,5,10")
    parser.add_argument("--algo", type=_str_list, help="e.g. saga-linear,am,fm")
    parser.add_argument("--user-affinity", choices=["cosine", "indicator", "identity"])
    parser.add_argument("--select-by", choices=["dcg", "psr"])
    parser.add_argument("--seed", type=int, help="master seed")


def _groups(args, current: List[GroupSpec]) -> Optional[List[dict]]:
    if args.group_kind is None and args.group_size is None and args.group_count is None:
        return None
    specs = [spec.model_dump() for spec in current]
    if args.group_kind is not None or args.group_size is not None:
        kind = args.group_kind or current[0].kind
        sizes = args.group_size or sorted({spec.size for spec in current})
        specs = [{"kind": kind, "size": size} for size in sizes]
    if args.group_count is not None:
        for spec in specs:
            spec["count"] = args.group_count
    return specs


def resolve_config(args) -> Tuple[ExperimentConfig, Path]:
    """Base config (--config, else <workdir>/config.json, else defaults) with flag overrides."""
    workdir = Path(args.workdir) if args.workdir else config.WORKDIR
    echoed = workdir / "config.json"
    if args.config:
        base = load_config(args.config)
    elif echoed.exists():
        logger.info("Continuing from %s", echoed)
        base = load_config(echoed)
    else:
        base = ExperimentConfig(out=str(workdir))

    data = base.model_dump()
    top_level = {
        "dataset": args.dataset,
        "format": args.format,
        "min_ratings": args.min_ratings,
        "gamma_grid": args.gamma_grid,
        "lambda_grid": args.lambda_grid,
        "algorithms": args.algo,
        "user_affinity": args.user_affinity,
        "select_by": args.select_by,
        "out": args.out,
        "seed": args.seed,
    }
    data.update({key: value for key, value in top_level.items() if value is not None})
    factorization = {"d": args.dim, "reg": args.reg, "max_iters": args.max_iters}
    data["factorization"].update({key: value for key, value in factorization.items() if value is not None})
    evaluation = {"holdout_frac": args.holdout_frac, "repetitions": args.repetitions, "k_list": args.k}
    data["evaluation"].update({key: value for key, value in evaluation.items() if value is not None})
    groups = _groups(args, base.groups)
    if groups is not None:
        data["groups"] = groups

    return ExperimentConfig.model_validate(data), workdir
