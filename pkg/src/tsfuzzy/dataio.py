"""Descriptor tables, mean-centering, model files, exports and synthetic benchmarks."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    CorruptModelError,
    DataFormatError,
    SchemaVersionError,
    StateError,
)
from .model import GaussianAntecedent, LocalLinearModel, Rule, TSModel

SCHEMA_VERSION = 1

_DECIMAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class Dataset:
    descriptors: np.ndarray
    activity: np.ndarray
    column_names: tuple
    activity_name: str = "y"
    centered: bool = False
    column_means: np.ndarray = None
    activity_mean: float = 0.0

    def __post_init__(self):
        X = np.array(self.descriptors, dtype=float)
        y = np.array(self.activity, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataFormatError("dataset needs at least one row and one descriptor column")
        if X.shape[0] != y.size:
            raise DataFormatError("descriptor and activity row counts differ")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataFormatError("dataset contains non-finite values")
        names = tuple(str(s) for s in self.column_names)
        if len(names) != X.shape[1]:
            raise DataFormatError("one column name per descriptor is required")
        if len(set(names)) != len(names):
            raise DataFormatError("column names must be unique")
        means = (
            np.zeros(X.shape[1])
            if self.column_means is None
            else np.array(self.column_means, dtype=float).reshape(-1)
        )
        object.__setattr__(self, "descriptors", X)
        object.__setattr__(self, "activity", y)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "column_means", means)
        object.__setattr__(self, "activity_mean", float(self.activity_mean))

    @property
    def N(self) -> int:
        return self.descriptors.shape[0]

    @property
    def k(self) -> int:
        return self.descriptors.shape[1]

    def as_matrix(self) -> np.ndarray:
        """The N x (k+1) matrix ``[u y]``."""
        return np.column_stack([self.descriptors, self.activity])

    def subset(self, rows) -> "Dataset":
        """Rows of an uncentered dataset."""
        if self.centered:
            raise StateError("subset a raw dataset, then center it")
        return replace(self, descriptors=self.descriptors[rows], activity=self.activity[rows])

    def raw(self) -> "Dataset":
        """Undo centering."""
        if not self.centered:
            return self
        return replace(
            self,
            descriptors=self.descriptors + self.column_means,
            activity=self.activity + self.activity_mean,
            centered=False,
            column_means=None,
            activity_mean=0.0,
        )


def parse_cell(text, row, col):
    s = text.strip()
    if not _DECIMAL.match(s):
        raise DataFormatError(f"row {row}, column {col!r}: cannot parse {text!r} as a decimal real")
    value = float(s)
    if not math.isfinite(value):
        raise DataFormatError(f"row {row}, column {col!r}: non-finite value {text!r}")
    return value


def load_csv(path, activity_column=None) -> Dataset:
    """Read a comma-separated table with a header row.

    The activity is the last column unless ``activity_column`` names another.
    Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataFormatError("file is empty")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataFormatError("duplicate column names in header")
    if len(header) < 2:
        raise DataFormatError("need at least one descriptor and one activity column")
    if len(rows) < 2:
        raise DataFormatError("dataset has a header but no rows")
    if activity_column is None:
        target = len(header) - 1
    elif activity_column in header:
        target = header.index(activity_column)
    else:
        raise DataFormatError(f"activity column {activity_column!r} not in header")

    values = np.empty((len(rows) - 1, len(header)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(f"row {r} has {len(row)} cells, header has {len(header)}")
        for c, cell in enumerate(row):
            values[r - 2, c] = parse_cell(cell, r, header[c])
    keep = [j for j in range(len(header)) if j != target]
    return Dataset(
        descriptors=values[:, keep],
        activity=values[:, target],
        column_names=tuple(header[j] for j in keep),
        activity_name=header[target],
    )


def write_csv(dataset: Dataset, path) -> None:
    ds = dataset.raw()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.column_names) + [ds.activity_name])
        for u, y in zip(ds.descriptors, ds.activity):
            w.writerow([repr(float(v)) for v in u] + [repr(float(y))])


def mean_center(dataset: Dataset) -> Dataset:
    if dataset.centered:
        raise StateError("dataset is already mean-centered")
    means = dataset.descriptors.mean(axis=0)
    y_mean = float(dataset.activity.mean())
    return replace(
        dataset,
        descriptors=dataset.descriptors - means,
        activity=dataset.activity - y_mean,
        centered=True,
        column_means=means,
        activity_mean=y_mean,
    )


# -- model files -------------------------------------------------------------


def _model_payload(model: TSModel) -> dict:
    return {
        "antecedent_columns": list(model.antecedent_columns),
        "consequent_columns": list(model.consequent_columns),
        "column_names": list(model.column_names),
        "column_means": [float(v) for v in model.column_means],
        "activity_mean": model.activity_mean,
        "rules": [
            {
                "centers": [float(v) for v in r.antecedent.centers],
                "variances": [float(v) for v in r.antecedent.variances],
                "gains": [float(v) for v in r.consequent.gains],
                "offset": r.consequent.offset,
                "log_weight": r.log_weight,
            }
            for r in model.rules
        ],
    }


def dumps_model(model: TSModel, provenance=None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "model": _model_payload(model),
        "provenance": provenance or {},
    }
    # floats are written as shortest round-trip reprs; a zero weight becomes -Infinity
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads_model(text: str) -> TSModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptModelError("model file lacks a schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"model schema_version {doc['schema_version']!r} is not supported "
            f"(expected {SCHEMA_VERSION})"
        )
    try:
        m = doc["model"]
        rules = tuple(
            Rule(
                GaussianAntecedent(r["centers"], r["variances"]),
                LocalLinearModel(r["gains"], r["offset"]),
                r["log_weight"],
            )
            for r in m["rules"]
        )
        return TSModel(
            rules=rules,
            antecedent_columns=m["antecedent_columns"],
            consequent_columns=m["consequent_columns"],
            column_means=m["column_means"],
            activity_mean=m["activity_mean"],
            column_names=m["column_names"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelError(f"model payload is malformed: {exc}") from exc


def save_model(model: TSModel, path, provenance=None) -> None:
    Path(path).write_text(dumps_model(model, provenance), encoding="utf-8")


def load_model(path) -> TSModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorruptModelError(f"cannot read model file: {exc}") from exc
    return loads_model(text)


def load_provenance(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8")).get("provenance", {})


# -- exports -----------------------------------------------------------------


def selection_rows_csv(rows) -> str:
    """``rows`` are (rank, name, score, role) tuples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["role", "rank", "name", "score"])
    for rank, name, score, role in rows:
        w.writerow([role, rank, name, f"{score:.6g}"])
    return buf.getvalue()


def scatter_csv(observed, predicted, split: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for o, p in zip(observed, predicted):
        w.writerow([f"{o:.6g}", f"{p:.6g}", split])
    return buf.getvalue()


SCATTER_HEADER = "observed,predicted,split\n"


# -- synthetic benchmarks ----------------------------------------------------

BENCHMARK_KINDS = ("two-regime", "sigmoid-blend", "irrelevant-descriptor")


def _two_regime(x):
    return np.where(x < 0, 2.0 * x + 1.0, -x + 1.0)


def generate_benchmark(kind: str, N: int, noise_sigma: float = 0.0, seed=0):
    """Synthetic regression data with known ground truth.

    Kinds
    -----
    two-regime
        ``y = 2x + 1`` on ``[-2, 0)`` and ``y = -x + 1`` on ``[0, 2]``.
    sigmoid-blend
        Two planes in ``(x1, x2)`` blended by a logistic function of ``x1``.
    irrelevant-descriptor
        The two-regime data with an extra column drawn independently of ``y``.

    Returns ``(dataset, truth)``; ``truth`` holds the generating parameters.
    """
    if kind not in BENCHMARK_KINDS:
        raise DataFormatError(f"unknown benchmark kind {kind!r}; choose from {BENCHMARK_KINDS}")
    if N < 1:
        raise DataFormatError("N must be positive")
    rng = np.random.default_rng(seed)
    if kind in ("two-regime", "irrelevant-descriptor"):
        x = rng.uniform(-2.0, 2.0, N)
        y = _two_regime(x)
        truth = {
            "regimes": [
                {"interval": (-2.0, 0.0), "gain": 2.0, "offset": 1.0},
                {"interval": (0.0, 2.0), "gain": -1.0, "offset": 1.0},
            ]
        }
        cols, names = [x], ["x"]
        if kind == "irrelevant-descriptor":
            cols.append(rng.uniform(-2.0, 2.0, N))
            names.append("irrelevant")
            truth["irrelevant_column"] = "irrelevant"
    else:
        X = rng.uniform(-2.0, 2.0, (N, 2))
        s = 1.0 / (1.0 + np.exp(-4.0 * X[:, 0]))
        plane_a = (np.array([1.0, -0.5]), 0.5)
        plane_b = (np.array([-1.0, 1.5]), -0.5)
        y = (1 - s) * (X @ plane_a[0] + plane_a[1]) + s * (X @ plane_b[0] + plane_b[1])
        truth = {
            "planes": [
                {"gains": tuple(plane_a[0]), "offset": plane_a[1]},
                {"gains": tuple(plane_b[0]), "offset": plane_b[1]},
            ],
            "blend_slope": 4.0,
        }
        cols, names = [X[:, 0], X[:, 1]], ["x1", "x2"]
    if noise_sigma > 0:
        y = y + rng.normal(0.0, noise_sigma, N)
    ds = Dataset(np.column_stack(cols), y, tuple(names), activity_name="y")
    return ds, truth
