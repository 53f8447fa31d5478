"""Modified Gath-Geva clustering for Takagi-Sugeno model identification.

Each cluster carries a diagonal Gaussian over the antecedent variables, a
local affine model of the output, the variance of that model's error and a
prior probability.  The distance of a sample to a cluster is the reciprocal
of its joint likelihood, so the partition update favors clusters whose
local model explains the sample as well as clusters that are close to it.

All likelihoods are handled as logarithms; ``log D2 = -log likelihood``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import softmax

from .errors import ConfigurationError, ShapeError
from .model import GaussianAntecedent, LocalLinearModel, Rule, TSModel

_LOG_2PI = np.log(2.0 * np.pi)
DEGENERATE_MASS = 1e-12


class RankDeficientWarning(UserWarning):
    """Weighted normal matrix is rank deficient; a minimum-norm solution was used."""


@dataclass(frozen=True)
class ClusteringConfig:
    """Settings of one clustering run.

    ``variance_floor`` is relative: antecedent variances are floored at
    ``variance_floor * var(column)`` and model-error variances at
    ``variance_floor * var(y)``.  ``n_init`` random starts are run and the one
    with the lowest final objective is kept; start 0 uses ``seed`` itself.
    """

    cluster_count: int = 2
    fuzziness: float = 2.0
    tolerance: float = 1e-4
    max_iterations: int = 200
    seed: int = 42
    variance_floor: float = 1e-8
    n_init: int = 3

    def __post_init__(self):
        if int(self.cluster_count) != self.cluster_count or self.cluster_count < 1:
            raise ConfigurationError(f"cluster count must be >= 1, got {self.cluster_count}")
        if not self.fuzziness > 1:
            raise ConfigurationError(f"fuzziness must exceed 1, got {self.fuzziness}")
        if not self.tolerance > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigurationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if not self.variance_floor > 0:
            raise ConfigurationError("variance_floor must be positive")
        if int(self.n_init) != self.n_init or self.n_init < 1:
            raise ConfigurationError(f"n_init must be >= 1, got {self.n_init}")


@dataclass(frozen=True)
class ClusterPrototype:
    center: np.ndarray
    variances: np.ndarray
    theta: np.ndarray
    model_error_variance: float
    prior: float
    log_rule_weight: float

    @property
    def rule_weight(self) -> float:
        return float(np.exp(self.log_rule_weight))

    @property
    def gains(self) -> np.ndarray:
        return self.theta[:-1]

    @property
    def offset(self) -> float:
        return float(self.theta[-1])


@dataclass(frozen=True)
class ClusteringResult:
    prototypes: tuple
    partition: np.ndarray
    iterations: int
    converged: bool
    objective_trace: tuple
    antecedent_columns: tuple
    consequent_columns: tuple
    diagnostics: tuple = field(default=())


# -- building blocks ---------------------------------------------------------


def init_partition(N: int, c: int, seed) -> np.ndarray:
    """Random fuzzy partition: uniform draws normalized column-wise."""
    if c < 1 or N < c:
        raise ConfigurationError(f"need N >= c >= 1, got N={N}, c={c}")
    rng = np.random.default_rng(seed)
    U = rng.random((c, N))
    return U / U.sum(axis=0, keepdims=True)


def _wls(Phi_e, weights, y):
    """Weighted least squares via the sqrt-weighted system; returns (theta, rank)."""
    sw = np.sqrt(weights)
    theta, _, rank, _ = np.linalg.lstsq(Phi_e * sw[:, None], y * sw, rcond=None)
    return theta, int(rank)


def weighted_least_squares(Phi_e, weights, y) -> np.ndarray:
    """Minimize ``sum_k weights_k (y_k - Phi_e[k] @ theta)**2``.

    ``Phi_e`` must already contain the trailing unit column.  Rank-deficient
    problems get the minimum-norm solution and a :class:`RankDeficientWarning`.
    """
    Phi_e = np.asarray(Phi_e, dtype=float)
    weights = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    if Phi_e.ndim != 2 or Phi_e.shape[0] != y.size or weights.size != y.size:
        raise ShapeError("Phi_e, weights and y disagree in length")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise ConfigurationError("weights must be non-negative and not all zero")
    theta, rank = _wls(Phi_e, weights, y)
    if rank < Phi_e.shape[1]:
        warnings.warn(
            f"weighted normal matrix has rank {rank} < {Phi_e.shape[1]}",
            RankDeficientWarning,
            stacklevel=2,
        )
    return theta


def _split(Z, antecedent_columns, consequent_columns):
    Z = np.asarray(Z, dtype=float)
    u, y = Z[:, :-1], Z[:, -1]
    X = u[:, list(antecedent_columns)]
    Phi_e = np.column_stack([u[:, list(consequent_columns)], np.ones(len(y))])
    return X, Phi_e, y


def _floors(X, y, rel):
    tiny = np.finfo(float).tiny
    x_floor = np.maximum(rel * X.var(axis=0), tiny)
    e_floor = max(rel * float(y.var()), tiny)
    return x_floor, e_floor


def update_prototypes(
    Z,
    U,
    config: ClusteringConfig,
    antecedent_columns,
    consequent_columns,
    diagnostics: Optional[list] = None,
) -> list:
    """Cluster parameters from the current partition.

    ``Z`` is the N x (k+1) matrix ``[u y]``.  Centers, antecedent variances,
    local models and model-error variances all use ``mu**m`` weights; the
    prior uses plain memberships.
    """
    X, Phi_e, y = _split(Z, antecedent_columns, consequent_columns)
    U = np.asarray(U, dtype=float)
    N = y.size
    if U.ndim != 2 or U.shape[1] != N:
        raise ShapeError("partition width differs from the number of samples")
    x_floor, e_floor = _floors(X, y, config.variance_floor)
    W = U ** config.fuzziness
    mass = W.sum(axis=1)

    priors = U.sum(axis=1) / N
    degenerate = np.flatnonzero(mass < DEGENERATE_MASS)
    if degenerate.size:
        # a re-seeded cluster starts with one sample's worth of prior mass
        priors[degenerate] = 1.0 / N
        priors = priors / priors.sum()

    params = []
    worst_fit = None
    for i in range(U.shape[0]):
        if mass[i] < DEGENERATE_MASS:
            params.append(None)
            continue
        w = W[i]
        center = w @ X / mass[i]
        var = np.maximum(w @ (X - center) ** 2 / mass[i], x_floor)
        theta, rank = _wls(Phi_e, w, y)
        if rank < Phi_e.shape[1] and diagnostics is not None:
            diagnostics.append(f"cluster {i}: rank-deficient local model (rank {rank})")
        resid = y - Phi_e @ theta
        err_var = max(float(w @ resid**2 / mass[i]), e_floor)
        params.append((center, var, theta, err_var))

    if degenerate.size:
        live = [p for p in params if p is not None]
        if live:
            resid2 = np.min([(y - Phi_e @ p[2]) ** 2 for p in live], axis=0)
            worst_fit = int(np.argmax(resid2))
        else:
            worst_fit = 0
        theta_all, _ = _wls(Phi_e, np.ones(N), y)
        for i in degenerate:
            params[i] = (
                X[worst_fit].copy(),
                np.maximum(X.var(axis=0), x_floor),
                theta_all,
                max(float(y.var()), e_floor),
            )
            if diagnostics is not None:
                diagnostics.append(f"cluster {i}: degenerate, re-seeded at sample {worst_fit}")

    prototypes = []
    for i, (center, var, theta, err_var) in enumerate(params):
        log_w = float(np.log(priors[i]) - 0.5 * np.sum(_LOG_2PI + np.log(var)))
        prototypes.append(
            ClusterPrototype(
                center=center,
                variances=var,
                theta=np.asarray(theta, dtype=float),
                model_error_variance=err_var,
                prior=float(priors[i]),
                log_rule_weight=log_w,
            )
        )
    return prototypes


def compute_log_distances(Z, prototypes, antecedent_columns, consequent_columns) -> np.ndarray:
    """``log D2`` (c x N): the negative log joint likelihood of each sample."""
    X, Phi_e, y = _split(Z, antecedent_columns, consequent_columns)
    out = np.empty((len(prototypes), y.size))
    for i, p in enumerate(prototypes):
        ante = -0.5 * np.sum((X - p.center) ** 2 / p.variances, axis=1)
        r = y - Phi_e @ p.theta
        s2 = p.model_error_variance
        cons = -0.5 * (_LOG_2PI + np.log(s2)) - r * r / (2.0 * s2)
        out[i] = -(p.log_rule_weight + ante + cons)
    return out


def compute_distances(Z, prototypes, antecedent_columns, consequent_columns) -> np.ndarray:
    """Squared distances ``D2`` (c x N); may overflow for remote samples."""
    with np.errstate(over="ignore"):
        return np.exp(compute_log_distances(Z, prototypes, antecedent_columns, consequent_columns))


def update_partition_log(log_D2, m: float) -> np.ndarray:
    """Partition update from ``log D2``; a column-wise softmax of ``-log D2/(m-1)``."""
    return softmax(-np.asarray(log_D2, dtype=float) / (m - 1.0), axis=0)


def update_partition(D2, m: float) -> np.ndarray:
    """``mu_ik = 1 / sum_j (D_ik / D_jk) ** (2 / (m - 1))``."""
    D2 = np.asarray(D2, dtype=float)
    if np.any(D2 <= 0):
        raise ConfigurationError("distances must be strictly positive")
    return update_partition_log(np.log(D2), m)


def objective(U, D2, m: float) -> float:
    """``J = sum_ik mu_ik**m * D2_ik``."""
    U = np.asarray(U, dtype=float)
    D2 = np.asarray(D2, dtype=float)
    if U.shape != D2.shape:
        raise ShapeError("partition and distance shapes differ")
    return float(np.sum(U**m * D2))


def _log_objective_terms(U, log_D2, m):
    with np.errstate(divide="ignore", over="ignore"):
        return float(np.sum(np.exp(m * np.log(U) + log_D2)))


# -- main loop ---------------------------------------------------------------


def start_seed(seed: int, start: int) -> int:
    if start == 0:
        return int(seed)
    return int(np.random.SeedSequence([int(seed), start]).generate_state(1, np.uint64)[0])


def _run(Z, U, config, ante, cons, callback):
    diagnostics: list = []
    trace = []
    converged = False
    prototypes = None
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        prototypes = update_prototypes(Z, U, config, ante, cons, diagnostics)
        log_D2 = compute_log_distances(Z, prototypes, ante, cons)
        U_new = update_partition_log(log_D2, config.fuzziness)
        trace.append(_log_objective_terms(U_new, log_D2, config.fuzziness))
        delta = float(np.max(np.abs(U_new - U)))
        U = U_new
        if callback is not None:
            callback(iteration, U, prototypes)
        if delta < config.tolerance:
            converged = True
            break
    return ClusteringResult(
        prototypes=tuple(prototypes),
        partition=U,
        iterations=iteration,
        converged=converged,
        objective_trace=tuple(trace),
        antecedent_columns=ante,
        consequent_columns=cons,
        diagnostics=tuple(diagnostics),
    )


def cluster(
    Z,
    config: ClusteringConfig,
    antecedent_columns,
    consequent_columns,
    initial_partition=None,
    callback: Optional[Callable] = None,
) -> ClusteringResult:
    """Alternate prototype, distance and partition updates until U settles.

    ``Z`` is the centered N x (k+1) matrix ``[u y]`` (a :class:`Dataset` is
    accepted too).  A run stops when the largest absolute change of a
    membership falls below ``config.tolerance``.  Of ``config.n_init``
    random starts the one with the lowest final objective is returned;
    an explicit ``initial_partition`` gives a single run from that start.
    ``callback(iteration, U, prototypes)`` is invoked after every partition
    update of every run.
    """
    if hasattr(Z, "as_matrix"):
        Z = Z.as_matrix()
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] < 2:
        raise ShapeError("Z must be an N x (k+1) matrix")
    N, k = Z.shape[0], Z.shape[1] - 1
    c = config.cluster_count
    if N < c:
        raise ConfigurationError(f"need at least {c} samples, got {N}")
    ante = tuple(int(j) for j in antecedent_columns)
    cons = tuple(int(j) for j in consequent_columns)
    if not ante or any(not 0 <= j < k for j in ante + cons):
        raise ConfigurationError("column selection is empty or out of range")

    if initial_partition is not None:
        U = np.array(initial_partition, dtype=float)
        if U.shape != (c, N):
            raise ShapeError(f"initial partition must be {c} x {N}")
        return _run(Z, U, config, ante, cons, callback)

    # a single cluster has only one partition, restarts cannot differ
    starts = 1 if c == 1 else config.n_init
    best = None
    for start in range(starts):
        U = init_partition(N, c, start_seed(config.seed, start))
        result = _run(Z, U, config, ante, cons, callback)
        if best is None or result.objective_trace[-1] < best.objective_trace[-1]:
            best = result
    return best


def to_ts_model(
    result: ClusteringResult,
    column_means,
    activity_mean: float = 0.0,
    column_names=(),
) -> TSModel:
    """Assemble one rule per cluster prototype."""
    rules = tuple(
        Rule(
            GaussianAntecedent(p.center, p.variances),
            LocalLinearModel(p.theta[:-1], p.theta[-1]),
            p.log_rule_weight,
        )
        for p in result.prototypes
    )
    return TSModel(
        rules=rules,
        antecedent_columns=result.antecedent_columns,
        consequent_columns=result.consequent_columns,
        column_means=column_means,
        activity_mean=activity_mean,
        column_names=column_names,
    )
