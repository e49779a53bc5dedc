"""Offline experiment: holdout, factorize, form groups, recommend, evaluate.

Each stage exists as a function over in-memory data and as a ``stage_*``
wrapper that reads its inputs from and writes its outputs to a workdir.
``run_experiment`` chains the same functions in memory, so a staged run
and a one-shot run produce identical CSV files.
"""
import json
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import artifacts, store
from .affinity import ItemAffinity, UserAffinity
from .baselines import aggregate, candidate_items, fm, predicted_scores
from .consensus import GscoreState
from .errors import GroupRecError, IngestError, RatingsError
from .evaluation import HeldOutRelevance, group_dcg, holdout_split, make_groups, psr
from .factorization import FactorizationResult, factorize
from .ingest import ingest
from .models import GroupRecord, RecommendationRecord, RunStatus
from .optimizer import saga
from .ratings import Group, RatingsMatrix, build_group, filter_min_ratings
from .schemas.config import AGGREGATORS, SAGA_VARIANTS, ConsensusConfig, ExperimentConfig, SaturationSpec

logger = logging.getLogger(__name__)

# seed stream per stage
HOLDOUT = 0
FACTORIZE = 1
GROUPS = 2

CELL_KEYS = ["repetition", "group_kind", "group_size", "k", "algorithm", "gamma", "param"]
METRIC_COLUMNS = ["repetition", "group_kind", "group_size", "k", "algorithm", "gamma", "dcg", "psr"]
RECOMMENDATION_COLUMNS = [
    "group_id", "repetition", "algorithm", "gamma", "param", "rank", "item_id", "external_item_id", "marginal_gain",
]
GROUP_COLUMNS = ["group_id", "repetition", "kind", "size", "position", "members"]

GroupEntry = Tuple[GroupRecord, Group]


def derive_seed(master: int, repetition: int, stage: int, *extra: int) -> int:
    """Independent 32-bit seed for one (repetition, stage, ...) cell."""
    seq = np.random.SeedSequence(master, spawn_key=(repetition, stage, *extra))
    return int(seq.generate_state(1)[0])


@dataclass
class RepetitionData:
    repetition: int
    ratings: RatingsMatrix
    factors: FactorizationResult


@dataclass
class ExperimentOutcome:
    out_dir: Path
    metrics: pd.DataFrame
    failed: Dict[int, str]

    @property
    def partial(self) -> bool:
        return bool(self.failed)


# ---- in-memory stages ------------------------------------------------------

def load_dataset(cfg: ExperimentConfig) -> RatingsMatrix:
    if not cfg.dataset:
        raise IngestError("No dataset configured")
    R, _ = ingest(cfg.dataset, cfg.format)
    R, _ = filter_min_ratings(R, cfg.min_ratings)
    if R.n_users == 0:
        raise RatingsError("No user passes the minimum rating count", min_ratings=cfg.min_ratings)
    return R


def prepare_repetition(cfg: ExperimentConfig, ratings: RatingsMatrix, repetition: int) -> RepetitionData:
    """Hold out test ratings and factorize the remaining train split."""
    split = holdout_split(ratings, cfg.evaluation.holdout_frac, derive_seed(cfg.seed, repetition, HOLDOUT))
    fcfg = cfg.factorization.model_copy(
        update={"seed": derive_seed(cfg.seed, repetition, FACTORIZE, cfg.factorization.seed)}
    )
    return RepetitionData(repetition, split, factorize(split, fcfg))


def form_groups(cfg: ExperimentConfig, data: RepetitionData) -> List[GroupEntry]:
    entries = []
    for index, spec in enumerate(cfg.groups):
        seeded = spec.model_copy(update={"seed": derive_seed(cfg.seed, data.repetition, GROUPS, index, spec.seed)})
        formation = make_groups(seeded, data.factors.user_features, data.ratings)
        for position, group in enumerate(formation.groups):
            record = GroupRecord(
                id=GroupRecord.make_id(data.repetition, spec.kind, spec.size, position),
                repetition=data.repetition,
                kind=spec.kind,
                size=spec.size,
                position=position,
                members=",".join(str(u) for u in group.members),
            )
            entries.append((record, group))
    logger.info("Repetition %d: formed %d groups", data.repetition, len(entries))
    return entries


def restore_groups(data: RepetitionData, records: Sequence[GroupRecord]) -> List[GroupEntry]:
    return [(record, build_group(data.ratings, record.member_ids())) for record in records]


def _ranked_rows(
    record: GroupRecord,
    algorithm: str,
    items: Sequence[int],
    gains: Optional[Sequence[float]] = None,
    gamma: Optional[float] = None,
    param: Optional[float] = None,
) -> List[RecommendationRecord]:
    return [
        RecommendationRecord(
            group_id=record.id,
            repetition=record.repetition,
            algorithm=algorithm,
            gamma=gamma,
            param=param,
            rank=rank,
            item_id=int(item),
            marginal_gain=None if gains is None else float(gains[rank - 1]),
        )
        for rank, item in enumerate(items, start=1)
    ]


def recommend(cfg: ExperimentConfig, data: RepetitionData, entries: Sequence[GroupEntry]) -> List[RecommendationRecord]:
    """Rank max(k_list) items per group with every configured algorithm.

    Consensus variants run once per gamma of the grid, FM once per lambda.
    """
    k_max = max(cfg.evaluation.k_list)
    n_items = data.ratings.n_items
    item_features = data.factors.item_features
    rows: List[RecommendationRecord] = []

    variants = [name for name in cfg.algorithms if name in SAGA_VARIANTS]
    if variants:
        user_affinity = UserAffinity(data.factors.user_features, cfg.user_affinity)
        for gamma in cfg.gamma_grid:
            configs = {
                name: ConsensusConfig(
                    saturation=SaturationSpec(item_fn=SAGA_VARIANTS[name][0], user_fn=SAGA_VARIANTS[name][1]),
                    gamma=gamma,
                    user_affinity=cfg.user_affinity,
                )
                for name in variants
            }
            W = ItemAffinity(item_features, gamma)
            for record, group in entries:
                state = GscoreState.from_group(group, W, user_affinity)
                for name, consensus in configs.items():
                    result = saga(state, consensus.saturation, k_max)
                    rows.extend(_ranked_rows(record, name, result.selected, result.gains, gamma=consensus.gamma))
            W.clear()
            logger.info("Repetition %d: consensus runs for gamma=%g done", data.repetition, gamma)

    strategies = [name for name in cfg.algorithms if name in AGGREGATORS]
    for record, group in entries:
        if not strategies:
            break
        candidates = candidate_items(n_items, group)
        scores = predicted_scores(data.factors.user_features, item_features, group, candidates)
        for name in strategies:
            if name == "fm":
                for lam in cfg.lambda_grid:
                    rows.extend(_ranked_rows(record, name, fm(scores, group, k_max, lam), param=lam))
            else:
                rows.extend(_ranked_rows(record, name, aggregate(name, scores, group, k_max)))

    logger.info("Repetition %d: %d recommendation rows", data.repetition, len(rows))
    return rows


def evaluate(
    cfg: ExperimentConfig,
    data: RepetitionData,
    entries: Sequence[GroupEntry],
    rows: Sequence[RecommendationRecord],
) -> pd.DataFrame:
    """Mean DCG and PSR over the groups of every (kind, size, k, algorithm, gamma, param) cell."""
    ev = cfg.evaluation
    rel = HeldOutRelevance(data.ratings, ev.relevance_threshold)
    groups = {record.id: (record, group) for record, group in entries}

    lists = defaultdict(list)
    for row in rows:
        lists[(row.group_id, row.algorithm, row.gamma, row.param)].append((row.rank, row.item_id))

    records = []
    for (group_id, algorithm, gamma, param), ranked in lists.items():
        record, group = groups[group_id]
        items = [item for _, item in sorted(ranked)]
        for k in ev.k_list:
            top = items[:k]
            records.append({
                "group_id": group_id,
                "repetition": data.repetition,
                "group_kind": record.kind,
                "group_size": record.size,
                "k": k,
                "algorithm": algorithm,
                "gamma": gamma,
                "param": param,
                "dcg": group_dcg(group.members, top, rel, ev.dcg_log_base),
                "psr": psr(group.members, top, rel, ev.beta),
            })

    frame = pd.DataFrame(records, columns=["group_id"] + CELL_KEYS + ["dcg", "psr"])
    # group order inside a cell must not depend on where the rows came from
    frame = frame.sort_values("group_id", kind="mergesort")
    for column in ("gamma", "param", "dcg", "psr"):
        frame[column] = pd.to_numeric(frame[column])
    missing = int(frame["psr"].isna().sum())
    if missing:
        logger.warning("Repetition %d: PSR undefined for %d group lists (no relevant test items)", data.repetition, missing)

    cells = frame.groupby(CELL_KEYS, dropna=False, sort=True)[["dcg", "psr"]].mean().reset_index()
    return cells


def select_best(sweep: pd.DataFrame, select_by: str = "dcg") -> pd.DataFrame:
    """Keep, per (kind, size, k, algorithm), the gamma / lambda cell with the best mean over repetitions.

    Ties go to the first cell in grid order.
    """
    cell = ["group_kind", "group_size", "k", "algorithm"]
    grid = ["gamma", "param"]
    means = sweep.groupby(cell + grid, dropna=False)[select_by].mean().reset_index()
    means = means.sort_values(cell + grid, na_position="first", kind="mergesort").reset_index(drop=True)
    means["score"] = means[select_by].fillna(-np.inf)
    best = means.loc[means.groupby(cell, dropna=False)["score"].idxmax().values, cell + grid]
    for _, row in best.iterrows():
        if not (pd.isna(row["gamma"]) and pd.isna(row["param"])):
            logger.debug(
                "Best cell for %s (%s, size %d, k=%d): gamma=%s param=%s",
                row["algorithm"], row["group_kind"], row["group_size"], row["k"], row["gamma"], row["param"],
            )
    chosen = sweep.merge(best, on=cell + grid, how="inner")
    chosen = chosen.sort_values(["repetition"] + cell, kind="mergesort")
    return chosen[METRIC_COLUMNS].reset_index(drop=True)


# ---- outputs ---------------------------------------------------------------

def _group_frame(entries: Sequence[GroupEntry]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            {
                "group_id": r.id, "repetition": r.repetition, "kind": r.kind,
                "size": r.size, "position": r.position, "members": r.members,
            }
            for r, _ in entries
        ],
        columns=GROUP_COLUMNS,
    )
    return frame.sort_values(["repetition", "kind", "size", "position"], kind="mergesort")


def _recommendation_frame(rows: Sequence[RecommendationRecord], ratings: RatingsMatrix) -> pd.DataFrame:
    frame = pd.DataFrame(
        [row.model_dump(exclude={"id"}) for row in rows],
        columns=[c for c in RECOMMENDATION_COLUMNS if c != "external_item_id"],
    )
    frame["external_item_id"] = ratings.item_ids[frame["item_id"].to_numpy(dtype=np.int64)]
    for column in ("gamma", "param", "marginal_gain"):
        frame[column] = pd.to_numeric(frame[column])
    frame = frame[RECOMMENDATION_COLUMNS]
    return frame.sort_values(["repetition", "group_id", "algorithm", "gamma", "param", "rank"], kind="mergesort")


def write_outputs(
    cfg: ExperimentConfig,
    out_dir,
    entries: Sequence[GroupEntry],
    rows: Sequence[RecommendationRecord],
    ratings: RatingsMatrix,
    sweep: pd.DataFrame,
    failed: Optional[Dict[int, str]] = None,
) -> pd.DataFrame:
    """Write groups, recommendations, metrics and the resolved config to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep = sweep.sort_values(CELL_KEYS, na_position="first", kind="mergesort").reset_index(drop=True)
    metrics = select_best(sweep, cfg.select_by) if len(sweep) else pd.DataFrame(columns=METRIC_COLUMNS)

    _group_frame(entries).to_csv(out_dir / "groups.csv", index=False)
    _recommendation_frame(rows, ratings).to_csv(out_dir / "recommendations.csv", index=False)
    sweep.to_csv(out_dir / "metrics_sweep.csv", index=False)
    metrics.to_csv(out_dir / "metrics.csv", index=False)
    write_config(cfg, out_dir)

    marker = out_dir / "metrics.partial"
    if failed:
        marker.write_text(json.dumps({str(rep): cause for rep, cause in sorted(failed.items())}, indent=2))
        logger.warning("Metrics are partial: repetitions %s failed", sorted(failed))
    elif marker.exists():
        marker.unlink()
    logger.info("Wrote %d metric rows to %s", len(metrics), out_dir / "metrics.csv")
    return metrics


def write_config(cfg: ExperimentConfig, directory) -> Path:
    path = Path(directory) / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cfg.model_dump_json(indent=2))
    return path


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(Path(path).read_text())


# ---- workdir stages --------------------------------------------------------

def _load_repetition(workdir, repetition: int, ratings: RatingsMatrix) -> RepetitionData:
    split, factors = artifacts.load_factorization(workdir, repetition, ratings)
    return RepetitionData(repetition, split, factors)


def stage_factorize(cfg: ExperimentConfig, workdir) -> RatingsMatrix:
    with store.tracked_run(workdir, "factorize", cfg.model_dump_json()):
        ratings = load_dataset(cfg)
        artifacts.save_ratings(workdir, ratings)
        for rep in range(cfg.evaluation.repetitions):
            data = prepare_repetition(cfg, ratings, rep)
            artifacts.save_factorization(workdir, rep, data.ratings, data.factors)
        write_config(cfg, workdir)
    return ratings


def stage_groups(cfg: ExperimentConfig, workdir) -> int:
    total = 0
    with store.tracked_run(workdir, "groups", cfg.model_dump_json()):
        ratings = artifacts.load_ratings(workdir)
        for rep in range(cfg.evaluation.repetitions):
            data = _load_repetition(workdir, rep, ratings)
            total += store.save_groups(workdir, rep, [record for record, _ in form_groups(cfg, data)])
        write_config(cfg, workdir)
    return total


def stage_recommend(cfg: ExperimentConfig, workdir) -> int:
    total = 0
    with store.tracked_run(workdir, "recommend", cfg.model_dump_json()):
        ratings = artifacts.load_ratings(workdir)
        for rep in range(cfg.evaluation.repetitions):
            data = _load_repetition(workdir, rep, ratings)
            entries = restore_groups(data, store.load_groups(workdir, rep))
            total += store.save_recommendations(workdir, rep, recommend(cfg, data, entries))
        write_config(cfg, workdir)
    return total


def stage_evaluate(cfg: ExperimentConfig, workdir, out_dir=None) -> pd.DataFrame:
    with store.tracked_run(workdir, "evaluate", cfg.model_dump_json()):
        ratings = artifacts.load_ratings(workdir)
        all_entries, all_rows, sweeps = [], [], []
        for rep in range(cfg.evaluation.repetitions):
            data = _load_repetition(workdir, rep, ratings)
            entries = restore_groups(data, store.load_groups(workdir, rep))
            rows = store.load_recommendations(workdir, rep)
            sweeps.append(evaluate(cfg, data, entries, rows))
            all_entries.extend(entries)
            all_rows.extend(rows)
        sweep = pd.concat(sweeps, ignore_index=True)
        return write_outputs(cfg, out_dir or cfg.out, all_entries, all_rows, ratings, sweep)


def run_experiment(cfg: ExperimentConfig, workdir=None) -> ExperimentOutcome:
    """All stages in one pass; a failing repetition is logged and skipped."""
    out_dir = Path(cfg.out)
    workdir = Path(workdir) if workdir is not None else out_dir

    with store.tracked_run(workdir, "run", cfg.model_dump_json()) as run:
        ratings = load_dataset(cfg)
        artifacts.save_ratings(workdir, ratings)
        write_config(cfg, workdir)

        all_entries, all_rows, sweeps = [], [], []
        failed: Dict[int, str] = {}
        for rep in range(cfg.evaluation.repetitions):
            try:
                data = prepare_repetition(cfg, ratings, rep)
                artifacts.save_factorization(workdir, rep, data.ratings, data.factors)
                entries = form_groups(cfg, data)
                store.save_groups(workdir, rep, [record for record, _ in entries])
                rows = recommend(cfg, data, entries)
                store.save_recommendations(workdir, rep, rows)
                sweep = evaluate(cfg, data, entries, rows)
            except GroupRecError as exc:
                logger.error("Repetition %d aborted: %s", rep, exc)
                failed[rep] = str(exc)
                continue
            all_entries.extend(entries)
            all_rows.extend(rows)
            sweeps.append(sweep)

        sweep = pd.concat(sweeps, ignore_index=True) if sweeps else pd.DataFrame(columns=CELL_KEYS + ["dcg", "psr"])
        metrics = write_outputs(cfg, out_dir, all_entries, all_rows, ratings, sweep, failed)
        if failed:
            run.status = RunStatus.PARTIAL
            run.detail = json.dumps(failed)
    return ExperimentOutcome(out_dir=out_dir, metrics=metrics, failed=failed)
