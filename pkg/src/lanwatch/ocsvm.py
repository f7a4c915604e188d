"""One-class SVM baseline detector.

The nu-parameterized dual is solved by libsvm (through scikit-learn) and
renormalized to the convention sum(alpha) = 1, 0 <= alpha_i <= 1/(nu*n),
so the decision function is sum_j alpha_j * K(x, sv_j) - rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.spatial.distance import cdist, pdist
from sklearn.svm import OneClassSVM

from .errors import InsufficientDataError


@dataclass
class OcsvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    gamma: float
    nu: float

    def decision(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        k = np.exp(-self.gamma * cdist(pts, self.support_vectors, "sqeuclidean"))
        return k @ self.alphas - self.rho


def default_gamma(points: np.ndarray) -> float:
    """1 / (2 * mean pairwise squared distance), guarding degenerate clouds."""
    d2 = pdist(np.asarray(points, dtype=float), "sqeuclidean")
    mean = float(d2.mean()) if len(d2) else 0.0
    if mean <= 0:
        return 1.0
    return 1.0 / (2.0 * mean)


def ocsvm_fit(points: np.ndarray, nu: float = 0.1,
              gamma: float = None) -> OcsvmModel:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise InsufficientDataError(f"need at least 2 points, got {len(pts)}")
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    if gamma is None:
        gamma = default_gamma(pts)
    clf = OneClassSVM(kernel="rbf", nu=nu, gamma=gamma, tol=1e-7)
    clf.fit(pts)
    dual = clf.dual_coef_.ravel()
    total = dual.sum()          # equals nu * n in the libsvm convention
    alphas = dual / total
    rho = float(-clf.intercept_[0] / total)
    return OcsvmModel(support_vectors=clf.support_vectors_.copy(),
                      alphas=alphas, rho=rho, gamma=gamma, nu=nu)


def ocsvm_flag(model: OcsvmModel, points: np.ndarray) -> List[int]:
    """Indices whose decision value is negative."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return []
    return [int(i) for i in np.flatnonzero(model.decision(pts) < 0)]
