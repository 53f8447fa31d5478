"""Performance measures and leave-one-out cross-validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .errors import ConfigurationError, ShapeError, UndefinedVarianceError
from .model import TSModel
from .pipeline import PipelineConfig, fit


@dataclass(frozen=True)
class Metrics:
    train_rmse: float
    test_rmse: float
    train_r2: float
    test_r2: float


@dataclass(frozen=True)
class FoldDiagnostics:
    index: int
    seed: int
    converged: bool
    iterations: int
    column_means: np.ndarray


@dataclass(frozen=True)
class CrossValReport:
    metrics: Metrics
    observed: np.ndarray
    predicted: np.ndarray
    train_predicted: np.ndarray
    folds: tuple

    @property
    def pooled_predictions(self):
        return list(zip(self.observed.tolist(), self.predicted.tolist()))

    @property
    def all_converged(self) -> bool:
        return all(f.converged for f in self.folds)


def _pair(observed, predicted, min_len):
    o = np.asarray(observed, dtype=float).reshape(-1)
    p = np.asarray(predicted, dtype=float).reshape(-1)
    if o.size != p.size:
        raise ShapeError(f"length mismatch: {o.size} observed vs {p.size} predicted")
    if o.size < min_len:
        raise ShapeError(f"need at least {min_len} values, got {o.size}")
    return o, p


def rmse(observed, predicted) -> float:
    o, p = _pair(observed, predicted, 1)
    return float(np.sqrt(np.mean((o - p) ** 2)))


def r_squared(observed, predicted) -> float:
    """``1 - SSE / SST``; negative for models worse than the mean predictor."""
    o, p = _pair(observed, predicted, 2)
    sst = float(np.sum((o - o.mean()) ** 2))
    if sst == 0.0:
        raise UndefinedVarianceError("observed values are constant; r-squared is undefined")
    return 1.0 - float(np.sum((o - p) ** 2)) / sst


def evaluate(model: TSModel, dataset: Dataset):
    """Return ``(rmse, r2, residuals)`` of ``model`` on a dataset.

    r2 is ``nan`` when the observed activity is constant.
    """
    ds = dataset.raw()
    pred = model.predict_batch(ds.descriptors)
    resid = ds.activity - pred
    try:
        r2 = r_squared(ds.activity, pred)
    except (UndefinedVarianceError, ShapeError):
        r2 = float("nan")
    return rmse(ds.activity, pred), r2, resid


def fold_seed(master: int, fold: int) -> int:
    return int(np.random.SeedSequence([int(master), int(fold)]).generate_state(1, np.uint64)[0])


def loo_crossval(dataset: Dataset, config: PipelineConfig) -> CrossValReport:
    """Leave-one-out estimate of the whole identification pipeline.

    Every fold re-centers, re-clusters and (if configured) re-selects on its
    N-1 training rows, then predicts the held-out row.  Train metrics come
    from a fit on all rows with the master seed.
    """
    ds = dataset.raw()
    N = ds.N
    c = config.clustering.cluster_count
    if N < c + 2:
        raise ConfigurationError(f"leave-one-out needs N >= c + 2 = {c + 2}, got N = {N}")
    config.check(ds.k)
    master = config.clustering.seed

    predicted = np.empty(N)
    folds = []
    for k in range(N):
        rows = np.delete(np.arange(N), k)
        seed = fold_seed(master, k)
        result = fit(ds.subset(rows), config.with_seed(seed))
        predicted[k] = result.model.predict(ds.descriptors[k]).value
        folds.append(
            FoldDiagnostics(
                index=k,
                seed=seed,
                converged=result.clustering.converged and result.full_clustering.converged,
                iterations=result.clustering.iterations,
                column_means=result.model.column_means,
            )
        )

    full = fit(ds, config)
    train_pred = full.model.predict_batch(ds.descriptors)
    metrics = Metrics(
        train_rmse=rmse(ds.activity, train_pred),
        test_rmse=rmse(ds.activity, predicted),
        train_r2=r_squared(ds.activity, train_pred),
        test_r2=r_squared(ds.activity, predicted),
    )
    return CrossValReport(metrics, ds.activity.copy(), predicted, train_pred, tuple(folds))
