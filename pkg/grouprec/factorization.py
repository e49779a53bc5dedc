"""Weighted-regularized non-negative alternating least squares.

Only observed train entries carry weight. Each alternation solves every user
row against the item factors, then every item row against the user factors.
A row solve works on the d x d normal equations

    (M^T M + reg I) y = M^T r

with an active-set loop: solve the regularized least squares problem on the
free coordinates, clamp negative ones at zero, and release a clamped
coordinate again while its gradient still points into the feasible region.
A row only replaces the current one when it lowers the row objective, so

    sum_(u,i) (r_ui - y_u . x_i)^2 + reg * (|Y|^2 + |X|^2)

never increases between alternations.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve

from .errors import FactorizationError
from .ratings import MAX_RATING, MIN_RATING, FeatureMatrix, RatingsMatrix
from .schemas.config import FactorizationConfig

logger = logging.getLogger(__name__)

_CHUNK = 200_000
_KKT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    user_features: FeatureMatrix
    item_features: FeatureMatrix
    objective_trace: Tuple[float, ...]

    @property
    def iterations(self) -> int:
        return len(self.objective_trace) - 1


def _squared_error(coo: sparse.coo_matrix, Y: np.ndarray, X: np.ndarray) -> float:
    total = 0.0
    for start in range(0, coo.nnz, _CHUNK):
        rows = coo.row[start:start + _CHUNK]
        cols = coo.col[start:start + _CHUNK]
        pred = np.einsum("ij,ij->i", Y[rows], X[cols])
        resid = coo.data[start:start + _CHUNK] - pred
        total += float(resid @ resid)
    return total


def objective(coo: sparse.coo_matrix, Y: np.ndarray, X: np.ndarray, reg: float) -> float:
    return _squared_error(coo, Y, X) + reg * (float(np.sum(Y * Y)) + float(np.sum(X * X)))


def _row_loss(G: np.ndarray, rhs: np.ndarray, y: np.ndarray) -> float:
    # row objective up to the constant |r|^2
    return float(y @ G @ y - 2.0 * rhs @ y)


def _free_solve(G: np.ndarray, rhs: np.ndarray, free: np.ndarray) -> np.ndarray:
    z = np.zeros(len(rhs))
    idx = np.flatnonzero(free)
    if len(idx):
        z[idx] = cho_solve(cho_factor(G[np.ix_(idx, idx)]), rhs[idx])
    return z


def _active_set_solve(G: np.ndarray, rhs: np.ndarray, max_rounds: int) -> Tuple[np.ndarray, bool]:
    """Minimize ``y.G.y - 2 rhs.y`` over ``y >= 0``; returns (y, converged).

    Clamps negative coordinates of the ridge solution until the free solve is
    positive, then releases coordinates Lawson-Hanson style while the KKT
    conditions fail.
    """
    d = len(rhs)
    tol = _KKT_TOL * max(1.0, float(np.abs(rhs).max()))
    free = np.ones(d, dtype=bool)
    y = np.zeros(d)
    while free.any():
        z = _free_solve(G, rhs, free)
        if (z[free] > 0.0).all():
            y = z
            break
        free &= z > 0.0

    for _ in range(max_rounds):
        grad = rhs - G @ y
        grad[free] = -np.inf
        j = int(np.argmax(grad))
        if grad[j] <= tol:
            return y, True
        free[j] = True
        while True:
            z = _free_solve(G, rhs, free)
            bad = np.flatnonzero(free & (z <= 0.0))
            if not len(bad):
                y = z
                break
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.nan_to_num(y[bad] / (y[bad] - z[bad]), nan=0.0, posinf=0.0)
            k = bad[int(np.argmin(steps))]
            y = y + float(steps.min()) * (z - y)
            y[k] = 0.0
            free &= y > 0.0
            y[~free] = 0.0
    return np.maximum(y, 0.0), False


def _solve_half(mat: sparse.csr_matrix, this: np.ndarray, other: np.ndarray, reg: float) -> None:
    """One half of an alternation: refit every row of ``this`` in place."""
    d = this.shape[1]
    reg_eye = reg * np.eye(d)
    max_rounds = 2 * d + 10

    for i in range(mat.shape[0]):
        start, end = mat.indptr[i], mat.indptr[i + 1]
        if start == end:
            # no observations: the ridge term alone is minimized at 0
            this[i] = 0.0
            continue

        M = other[mat.indices[start:end]]
        G = M.T @ M + reg_eye
        rhs = M.T @ mat.data[start:end]
        y, converged = _active_set_solve(G, rhs, max_rounds)
        if not converged:
            logger.debug("active set hit its round cap on row %d", i)
        if _row_loss(G, rhs, y) <= _row_loss(G, rhs, this[i]):
            this[i] = y


def factorize(R: RatingsMatrix, cfg: FactorizationConfig) -> FactorizationResult:
    """Fit non-negative user and item factors on the train split of ``R``."""
    train = R.to_csr("train")
    if train.nnz == 0:
        raise FactorizationError("Cannot factorize an empty train set")

    train_t = train.T.tocsr()
    coo = train.tocoo()
    rng = np.random.default_rng(cfg.seed)
    scale = float(train.data.mean()) / cfg.d
    Y = rng.uniform(0.0, 1.0, size=(R.n_users, cfg.d)) * scale
    X = rng.uniform(0.0, 1.0, size=(R.n_items, cfg.d)) * scale

    trace = [objective(coo, Y, X, cfg.reg)]
    logger.info(
        "Factorizing %d x %d (%d train entries), d=%d reg=%g",
        R.n_users, R.n_items, train.nnz, cfg.d, cfg.reg,
    )

    for iteration in range(1, cfg.max_iters + 1):
        _solve_half(train, Y, X, cfg.reg)
        _solve_half(train_t, X, Y, cfg.reg)
        if not (np.isfinite(Y).all() and np.isfinite(X).all()):
            raise FactorizationError("Non-finite feature values", iteration=iteration)

        value = objective(coo, Y, X, cfg.reg)
        if not np.isfinite(value):
            raise FactorizationError("Non-finite objective", iteration=iteration)
        prev = trace[-1]
        trace.append(value)
        logger.debug("iteration %d objective %.6f", iteration, value)
        if abs(prev - value) <= cfg.tol * abs(prev):
            break

    logger.info("Factorization finished after %d iterations, objective %.4f", len(trace) - 1, trace[-1])
    return FactorizationResult(
        user_features=FeatureMatrix(np.maximum(Y, 0.0)),
        item_features=FeatureMatrix(np.maximum(X, 0.0)),
        objective_trace=tuple(trace),
    )


def predict(
    user_features: FeatureMatrix,
    item_features: FeatureMatrix,
    users: np.ndarray,
    items: np.ndarray,
    clamp: bool = True,
) -> np.ndarray:
    """Predicted ratings y_u . x_i as a (len(users), len(items)) block."""
    scores = user_features[np.asarray(users)] @ item_features[np.asarray(items)].T
    if clamp:
        scores = np.clip(scores, MIN_RATING, MAX_RATING)
    return scores
