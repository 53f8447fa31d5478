"""Model reduction: OLS ranking of consequents, Fisher elimination of antecedents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError, SingularityError, UndefinedRatioError

# residual norm (relative to the original column) below which a column is dependent
DEPENDENT_TOL = 1e-10
RIDGE = 1e-10
# eigenvalues of F_B below this fraction of the largest one count as zero
RANK_TOL = 1e-12


@dataclass(frozen=True)
class OlsDecomposition:
    W: np.ndarray
    A: np.ndarray
    dependent: tuple = ()


@dataclass(frozen=True)
class ConsequentRanking:
    per_cluster_ratios: np.ndarray  # c x n_r, descriptor columns only
    offset_ratios: np.ndarray  # c, ratio of the unit column
    aggregate_order: tuple
    aggregate_scores: np.ndarray


@dataclass(frozen=True)
class FisherTrace:
    elimination_order: tuple
    scores_after_removal: tuple
    kept: tuple
    F_W: np.ndarray
    F_B: np.ndarray
    F_T: np.ndarray
    V_0: np.ndarray


def gram_schmidt(B) -> OlsDecomposition:
    """Factor ``B = W A`` with orthogonal (unnormalized) ``W`` and unit upper-triangular ``A``.

    Uses the modified Gram-Schmidt update order.  A column that is linearly
    dependent on its predecessors yields a zero ``W`` column, its ``A`` row
    stays the identity row and its index is listed in ``dependent``.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[1] < 1 or B.shape[0] < B.shape[1]:
        raise ShapeError(f"need an N x p matrix with N >= p >= 1, got {B.shape}")
    p = B.shape[1]
    W = B.copy()
    A = np.eye(p)
    dependent = []
    for j in range(p):
        norm_b = np.linalg.norm(B[:, j])
        wj = W[:, j]
        if np.linalg.norm(wj) <= DEPENDENT_TOL * norm_b or norm_b == 0.0:
            W[:, j] = 0.0
            dependent.append(j)
            continue
        wtw = wj @ wj
        for l in range(j + 1, p):
            a = (wj @ W[:, l]) / wtw
            A[j, l] = a
            W[:, l] -= a * wj
    return OlsDecomposition(W, A, tuple(dependent))


def error_reduction_ratios(B, target) -> np.ndarray:
    """Share of ``target``'s energy explained by each orthogonalized column of ``B``."""
    target = np.asarray(target, dtype=float)
    energy = float(target @ target)
    if energy <= 0.0:
        raise UndefinedRatioError("output has zero energy; error-reduction ratios are undefined")
    dec = gram_schmidt(B)
    W = dec.W
    wtw = np.einsum("ij,ij->j", W, W)
    q = np.zeros(W.shape[1])
    nz = wtw > 0
    g = (W[:, nz].T @ target) / wtw[nz]
    q[nz] = g * g * wtw[nz] / energy
    return q


def ols_rank_consequents(Phi_e, weights, y) -> np.ndarray:
    """Error-reduction ratio of every column of ``Phi_e`` for one cluster.

    ``weights`` is the diagonal of the cluster's weighting matrix (the same
    ``mu**m`` used to fit its local model); rows and output are scaled by
    its square root before orthogonalization in column order.
    """
    Phi_e = np.asarray(Phi_e, dtype=float)
    weights = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    if Phi_e.ndim != 2 or Phi_e.shape[0] != y.size or weights.size != y.size:
        raise ShapeError("Phi_e, weights and y disagree in length")
    sw = np.sqrt(weights)
    return error_reduction_ratios(Phi_e * sw[:, None], y * sw)


def aggregate_ranking(per_cluster_ratios, priors):
    """Prior-weighted mean ratio per column; order is best first, ties to the lower index."""
    R = np.atleast_2d(np.asarray(per_cluster_ratios, dtype=float))
    priors = np.asarray(priors, dtype=float)
    if R.shape[0] != priors.size:
        raise ShapeError("one prior per cluster is required")
    scores = priors @ R
    order = tuple(int(j) for j in np.lexsort((np.arange(scores.size), -scores)))
    return order, scores


def rank_consequents(Z, partition, priors, consequent_columns, m: float = 2.0) -> ConsequentRanking:
    """OLS ranking of the consequent columns over all clusters of a clustering run.

    ``aggregate_order`` holds positions within ``consequent_columns``.
    """
    Z = np.asarray(Z, dtype=float)
    y = Z[:, -1]
    Phi_e = np.column_stack([Z[:, list(consequent_columns)], np.ones(y.size)])
    U = np.asarray(partition, dtype=float)
    ratios = np.array([ols_rank_consequents(Phi_e, U[i] ** m, y) for i in range(U.shape[0])])
    order, scores = aggregate_ranking(ratios[:, :-1], priors)
    return ConsequentRanking(ratios[:, :-1], ratios[:, -1], order, scores)


def fisher_covariances(prototypes):
    """Within-class, between-class and total covariance of the antecedent clusters.

    Returns ``(F_W, F_B, F_T, V_0)``; each prototype contributes its prior,
    center and diagonal variance matrix.
    """
    priors = np.array([p.prior for p in prototypes])
    V = np.array([p.center for p in prototypes])
    S = np.array([p.variances for p in prototypes])
    V_0 = priors @ V
    F_W = np.diag(priors @ S)
    D = V - V_0
    F_B = (D * priors[:, None]).T @ D
    return F_W, F_B, F_W + F_B, V_0


def _logdet_spd(M):
    """log det of a symmetric positive definite matrix via Cholesky."""
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def fisher_score(F_B, F_W) -> float:
    """``det(F_B) / det(F_W)``; ``F_W`` is ridged before factorization."""
    F_B = np.atleast_2d(np.asarray(F_B, dtype=float))
    F_W = np.atleast_2d(np.asarray(F_W, dtype=float))
    n = F_W.shape[0]
    if F_B.shape != (n, n) or F_W.shape != (n, n):
        raise ShapeError("F_B and F_W must be square and of equal size")
    ridged = F_W + RIDGE * np.trace(F_W) / n * np.eye(n)
    logdet_w = _logdet_spd(ridged)
    if logdet_w is None:
        diag = np.diag(ridged)
        bad = int(np.argmin(diag))
        raise SingularityError(
            f"within-class covariance is singular (dimension {bad})", dimension=bad
        )
    eig = np.linalg.eigvalsh((F_B + F_B.T) / 2.0)
    top = float(np.max(np.abs(eig))) if eig.size else 0.0
    if top == 0.0 or np.min(eig) <= RANK_TOL * top:
        return 0.0
    return float(np.exp(np.sum(np.log(eig)) - logdet_w))


def _reduced_score(F_B, F_W, keep):
    idx = np.ix_(keep, keep)
    return fisher_score(F_B[idx], F_W[idx])


def rank_antecedents(prototypes, keep: int) -> FisherTrace:
    """Backward elimination of antecedent dimensions by interclass separability.

    Each step drops the dimension whose removal leaves the highest score;
    ties go to the lowest index.  Indices refer to positions in the
    prototypes' antecedent vectors.
    """
    F_W, F_B, F_T, V_0 = fisher_covariances(prototypes)
    n = F_W.shape[0]
    if not 1 <= keep <= n:
        raise ConfigurationError(f"keep must lie in [1, {n}], got {keep}")
    remaining = list(range(n))
    order, scores = [], []
    while len(remaining) > keep:
        best, best_j = -np.inf, None
        for j in remaining:
            s = _reduced_score(F_B, F_W, [r for r in remaining if r != j])
            if s > best:
                best, best_j = s, j
        remaining.remove(best_j)
        order.append(best_j)
        scores.append(best)
    return FisherTrace(tuple(order), tuple(scores), tuple(remaining), F_W, F_B, F_T, V_0)
