import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from .errors import IngestError
from .ratings import MAX_RATING, MIN_RATING, RatingsMatrix, build_ratings

logger = logging.getLogger(__name__)

# format -> (separator, columns); the MovieLens timestamp is read and ignored
FORMATS = {
    "movielens-dat": ("::", ["user", "item", "rating", "timestamp"]),
    "csv": (",", ["user", "item", "rating"]),
}
ID_COLUMNS = ["user", "item", "rating"]


@dataclass(frozen=True)
class IngestReport:
    path: str
    valid: int
    malformed: int
    duplicates: int


def _read_frame(path: Path, fmt: str) -> Tuple[pd.DataFrame, int]:
    """All lines as strings, plus the number of lines with too many fields."""
    sep, names = FORMATS[fmt]
    overflow = []

    def _too_many_fields(fields):
        overflow.append(fields)
        return None

    try:
        frame = pd.read_csv(
            path,
            sep=sep,
            names=names,
            header=None,
            dtype=str,
            engine="python",
            encoding="latin-1",
            skip_blank_lines=True,
            quoting=csv.QUOTE_NONE,
            on_bad_lines=_too_many_fields,
        )
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=names, dtype=str)
    except (OSError, pd.errors.ParserError) as exc:
        raise IngestError(f"Cannot read ratings file: {exc}", path=str(path)) from exc
    return frame, len(overflow)


def _valid_rows(frame: pd.DataFrame) -> Tuple[pd.Series, pd.DataFrame]:
    """Every field present, integral ids and an integral rating in 1-5."""
    values = pd.DataFrame(
        {c: pd.to_numeric(frame[c].str.strip(), errors="coerce").astype(np.float64) for c in ID_COLUMNS},
        index=frame.index,
    )
    valid = frame.notna().all(axis=1)
    for column in ID_COLUMNS:
        valid &= np.isfinite(values[column]) & (values[column] % 1 == 0)
    valid &= values["rating"].between(MIN_RATING, MAX_RATING)
    return valid, values


def ingest(path, fmt: str = "movielens-dat") -> Tuple[RatingsMatrix, IngestReport]:
    """Read a ratings file and densify its user and item ids.

    Lines with a missing or non-numeric field, or a rating outside 1-5, are
    counted as malformed and skipped; a CSV header line counts as malformed
    too. A repeated (user, item) pair keeps its first occurrence.
    """
    if fmt not in FORMATS:
        raise IngestError(f"Unknown format {fmt!r}", expected=tuple(FORMATS))
    path = Path(path)
    frame, overflow = _read_frame(path, fmt)

    valid, values = _valid_rows(frame)
    malformed = int((~valid).sum()) + overflow
    rows = values.loc[valid, ID_COLUMNS].astype(np.int64)
    unique = rows.drop_duplicates(subset=["user", "item"], keep="first")
    duplicates = len(rows) - len(unique)

    if unique.empty:
        raise IngestError("No valid rating lines", path=str(path), malformed=malformed)

    user_ids, users = np.unique(unique["user"].to_numpy(), return_inverse=True)
    item_ids, items = np.unique(unique["item"].to_numpy(), return_inverse=True)
    R = build_ratings(
        zip(users.tolist(), items.tolist(), unique["rating"].tolist()),
        n_users=len(user_ids),
        n_items=len(item_ids),
        user_ids=user_ids,
        item_ids=item_ids,
    )
    report = IngestReport(str(path), valid=len(unique), malformed=malformed, duplicates=duplicates)
    if malformed or duplicates:
        logger.warning("Skipped %d malformed and %d duplicate lines in %s", malformed, duplicates, path)
    logger.info("Ingested %d ratings: %d users, %d items", R.nnz, R.n_users, R.n_items)
    return R, report
