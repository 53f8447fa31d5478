"""Reference computations kept independent of the package code paths."""

import numpy as np


def normal_equations(Phi_e, weights, y):
    """(Phi^T B Phi)^-1 Phi^T B y with an explicit diagonal B."""
    B = np.diag(weights)
    return np.linalg.solve(Phi_e.T @ B @ Phi_e, Phi_e.T @ B @ y)


def ordinary_least_squares(u, y):
    """Global LS of y on [u 1] through the normal equations."""
    A = np.column_stack([u, np.ones(len(y))])
    return np.linalg.solve(A.T @ A, A.T @ y)


def det_ratio(F_B, F_W):
    return np.linalg.det(F_B) / np.linalg.det(F_W)


def exhaustive_first_removal(priors, centers, variances):
    """Brute-force first Fisher elimination: recompute every covariance from scratch."""
    n = centers.shape[1]
    scores = []
    for drop in range(n):
        keep = [j for j in range(n) if j != drop]
        V = centers[:, keep]
        V0 = sum(p * v for p, v in zip(priors, V))
        F_W = sum(p * np.diag(s[keep]) for p, s in zip(priors, variances))
        F_B = sum(p * np.outer(v - V0, v - V0) for p, v in zip(priors, V))
        eig = np.linalg.eigvalsh(F_B)
        det_b = 0.0 if eig.min() <= 1e-12 * np.abs(eig).max() else np.prod(eig)
        scores.append(det_b / np.linalg.det(F_W))
    best = max(scores)
    # lowest index among the maximizers
    return next(j for j, s in enumerate(scores) if s == best), scores


def crisp_blob_means(x, labels):
    return np.array([x[labels == g].mean(axis=0) for g in np.unique(labels)])
