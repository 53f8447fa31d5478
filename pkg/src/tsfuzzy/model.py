"""Takagi-Sugeno fuzzy model with Gaussian antecedents and affine consequents.

A model holds ``c`` rules of the form::

    R_i: if x is A_i(x) then y = a_i^T phi + b_i   [w_i]

where ``x`` (antecedent) and ``phi`` (consequent) are column subsets of the
full descriptor vector ``u``.  The global output is the activation-weighted
mean of the local outputs.  Inputs and output are handled in mean-centered
coordinates; the centering means are stored on the model so that
:meth:`TSModel.predict` accepts raw descriptor vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError, ShapeError

# Below this total activation the normalized mean is treated as 0/0.
ACTIVATION_FLOOR = 1e-300
_LOG_ACTIVATION_FLOOR = np.log(ACTIVATION_FLOOR)


def gaussian_mf(center, variance, x):
    """Gaussian membership ``exp(-0.5 * (x - center)**2 / variance)``.

    Broadcasts over array arguments.
    """
    variance = np.asarray(variance, dtype=float)
    if np.any(variance <= 0) or np.any(~np.isfinite(variance)):
        raise InvalidParameterError("variance must be strictly positive")
    d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    out = np.exp(-0.5 * d * d / variance)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianAntecedent:
    centers: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float).reshape(-1)
        variances = np.array(self.variances, dtype=float).reshape(-1)
        if centers.size < 1 or centers.shape != variances.shape:
            raise ShapeError("centers and variances must be equal-length, non-empty")
        if np.any(variances <= 0) or not np.all(np.isfinite(variances)):
            raise InvalidParameterError("antecedent variances must be strictly positive")
        centers.flags.writeable = False
        variances.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "variances", variances)

    @property
    def n(self) -> int:
        return self.centers.size


@dataclass(frozen=True)
class LocalLinearModel:
    gains: np.ndarray
    offset: float

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float).reshape(-1)
        gains.flags.writeable = False
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "offset", float(self.offset))

    def __call__(self, phi) -> float:
        return float(np.dot(self.gains, phi) + self.offset)


@dataclass(frozen=True)
class Rule:
    """One fuzzy rule.

    The rule weight is stored through its logarithm because trained weights
    carry Gaussian normalization constants that under- or overflow in high
    dimension.  ``weight`` is derived.
    """

    antecedent: GaussianAntecedent
    consequent: LocalLinearModel
    log_weight: float = 0.0

    def __post_init__(self):
        lw = float(self.log_weight)
        if np.isnan(lw) or lw == np.inf:
            raise InvalidParameterError("rule log-weight must be finite or -inf")
        object.__setattr__(self, "log_weight", lw)

    @classmethod
    def with_weight(cls, antecedent, consequent, weight: float) -> "Rule":
        if weight < 0:
            raise InvalidParameterError("rule weight must be non-negative")
        with np.errstate(divide="ignore"):
            return cls(antecedent, consequent, float(np.log(weight)))

    @property
    def weight(self) -> float:
        return float(np.exp(self.log_weight))

    def log_activation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != self.antecedent.centers.shape:
            raise ShapeError(
                f"expected {self.antecedent.n} antecedent values, got {x.shape}"
            )
        d = x - self.antecedent.centers
        return self.log_weight - 0.5 * float(np.sum(d * d / self.antecedent.variances))


def rule_activation(rule: Rule, x) -> float:
    """Degree of fulfilment ``w_i * prod_j A_ij(x_j)`` (log-space evaluation)."""
    return float(np.exp(rule.log_activation(x)))


@dataclass(frozen=True)
class Prediction:
    value: float
    rule_activations: np.ndarray


@dataclass(frozen=True)
class TSModel:
    """Trained Takagi-Sugeno model operating on raw descriptor vectors."""

    rules: tuple
    antecedent_columns: tuple
    consequent_columns: tuple
    column_means: np.ndarray
    activity_mean: float = 0.0
    column_names: tuple = field(default=())

    def __post_init__(self):
        rules = tuple(self.rules)
        if len(rules) < 1:
            raise InvalidParameterError("a model needs at least one rule")
        means = np.array(self.column_means, dtype=float).reshape(-1)
        k = means.size
        ante = tuple(int(j) for j in self.antecedent_columns)
        cons = tuple(int(j) for j in self.consequent_columns)
        for name, cols in (("antecedent", ante), ("consequent", cons)):
            if len(set(cols)) != len(cols):
                raise InvalidParameterError(f"duplicate {name} column index")
            if any(j < 0 or j >= k for j in cols):
                raise InvalidParameterError(f"{name} column index out of range for width {k}")
        if not ante:
            raise InvalidParameterError("at least one antecedent column is required")
        for r in rules:
            if r.antecedent.n != len(ante) or r.consequent.gains.size != len(cons):
                raise ShapeError("rule dimensions disagree with the selected columns")
        names = tuple(str(s) for s in self.column_names)
        if names and len(names) != k:
            raise ShapeError("column_names must have one entry per descriptor column")
        means.flags.writeable = False
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "antecedent_columns", ante)
        object.__setattr__(self, "consequent_columns", cons)
        object.__setattr__(self, "column_means", means)
        object.__setattr__(self, "activity_mean", float(self.activity_mean))
        object.__setattr__(self, "column_names", names)

    @property
    def k(self) -> int:
        return self.column_means.size

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    def _stacked(self):
        centers = np.array([r.antecedent.centers for r in self.rules])
        variances = np.array([r.antecedent.variances for r in self.rules])
        gains = np.array([r.consequent.gains for r in self.rules]).reshape(self.n_rules, -1)
        offsets = np.array([r.consequent.offset for r in self.rules])
        log_w = np.array([r.log_weight for r in self.rules])
        return centers, variances, gains, offsets, log_w

    def _evaluate(self, U: np.ndarray):
        """Return (predictions, log-activations) for a raw N x k matrix."""
        centers, variances, gains, offsets, log_w = self._stacked()
        Uc = U - self.column_means
        X = Uc[:, list(self.antecedent_columns)]
        Phi = Uc[:, list(self.consequent_columns)]
        # scaled squared distance, N x c
        scaled = np.einsum(
            "nci->nc", (X[:, None, :] - centers[None, :, :]) ** 2 / variances[None, :, :]
        )
        log_beta = log_w[None, :] - 0.5 * scaled
        local = Phi @ gains.T + offsets[None, :]
        with np.errstate(invalid="ignore"):
            total = logsumexp(log_beta, axis=1, keepdims=True)
        out = np.empty(U.shape[0])
        ok = total[:, 0] >= _LOG_ACTIVATION_FLOOR
        if np.any(ok):
            norm = np.exp(log_beta[ok] - total[ok])
            out[ok] = np.sum(norm * local[ok], axis=1)
        if np.any(~ok):
            nearest = np.argmin(scaled[~ok], axis=1)
            out[~ok] = local[~ok][np.arange(nearest.size), nearest]
        return out + self.activity_mean, log_beta

    def _check_width(self, U):
        U = np.asarray(U, dtype=float)
        if U.ndim != 2 or U.shape[1] != self.k:
            raise ShapeError(f"expected rows of width {self.k}, got shape {U.shape}")
        return U

    def predict(self, u) -> Prediction:
        u = np.asarray(u, dtype=float)
        if u.ndim != 1:
            raise ShapeError("predict expects a single descriptor vector")
        U = self._check_width(u[None, :])
        value, log_beta = self._evaluate(U)
        return Prediction(float(value[0]), np.exp(log_beta[0]))

    def predict_batch(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        if U.size == 0 and U.ndim <= 2:
            return np.empty(0)
        U = self._check_width(U)
        return self._evaluate(U)[0]

    @property
    def used_columns(self) -> tuple:
        """Descriptor columns read by at least one rule part, ascending."""
        return tuple(sorted(set(self.antecedent_columns) | set(self.consequent_columns)))

    def with_unit_weights(self) -> "TSModel":
        """Copy of the model with every rule weight set to one."""
        return replace(self, rules=tuple(replace(r, log_weight=0.0) for r in self.rules))

    def raw_consequents(self):
        """Local models expressed in raw (uncentered) descriptor units.

        Returns ``(gains, offsets)`` with shapes ``(c, n_r)`` and ``(c,)``.
        """
        _, _, gains, offsets, _ = self._stacked()
        phi_means = self.column_means[list(self.consequent_columns)]
        return gains.copy(), offsets + self.activity_mean - gains @ phi_means

    def raw_centers(self) -> np.ndarray:
        centers = np.array([r.antecedent.centers for r in self.rules])
        return centers + self.column_means[list(self.antecedent_columns)]


def predict_batch(model: TSModel, U) -> np.ndarray:
    return model.predict_batch(U)


def predict(model: TSModel, u) -> Prediction:
    return model.predict(u)

