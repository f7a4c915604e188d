"""EVT anomaly detector over 2D point clouds.

Pipeline: bandwidth from the minimum-spanning-tree edge-length quantile,
Gaussian kernel density with a leave-one-out correction, peaks-over-
threshold fit of a generalized Pareto distribution to the negative log
densities, and flagging of points whose tail survival falls below alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist, pdist

from .errors import InsufficientDataError

DENSITY_FLOOR = 1e-300
BANDWIDTH_FLOOR = 1e-6
MIN_EXCESSES = 5
XI_BOUNDS = (-0.95, 5.0)


@dataclass
class EvtFit:
    """Generalized Pareto tail fit on the negative-log-density scale."""

    u: float
    sigma: float
    xi: float
    zeta: float                       # exceedance fraction at u
    sample: Optional[np.ndarray] = None  # sorted fitting values, for the ECDF


@dataclass
class Detection:
    index: int
    probability: float
    score: float


@dataclass
class LookoutResult:
    detections: List[Detection]
    bandwidth: Optional[float] = None
    fit: Optional[EvtFit] = None
    n: int = 0
    probabilities: Optional[np.ndarray] = None
    neg_log_density: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    def flagged_indices(self) -> List[int]:
        return [d.index for d in self.detections]


def mst_edge_lengths(points: np.ndarray) -> np.ndarray:
    """Edge lengths of the Euclidean MST of a (multi)set of points.

    Duplicate points contribute zero-length edges; the MST proper is
    computed on the distinct points only.
    """
    pts = np.asarray(points, dtype=float)
    uniq = np.unique(pts, axis=0)
    n_dup = len(pts) - len(uniq)
    if len(uniq) < 2:
        return np.zeros(max(n_dup, 0))
    dist = cdist(uniq, uniq)
    tree = minimum_spanning_tree(csr_matrix(dist))
    edges = np.asarray(tree[tree.nonzero()]).ravel()
    if n_dup:
        edges = np.concatenate([np.zeros(n_dup), edges])
    return edges


def select_bandwidth(points: np.ndarray, quantile: float = 0.9) -> float:
    """Quantile of the MST edge lengths, floored for duplicate-heavy data.

    The 0-dimensional persistence death times of a Rips filtration are
    exactly the MST edge lengths, so this quantile is the scale at which
    most components have merged.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(pts)}")
    edges = mst_edge_lengths(pts)
    h = float(np.quantile(edges, quantile)) if len(edges) else 0.0
    return max(h, BANDWIDTH_FLOOR)


def kde(points: np.ndarray, h: float, chunk: int = 2048) -> np.ndarray:
    """Bivariate Gaussian KDE evaluated at each input point (self included)."""
    pts = np.asarray(points, dtype=float)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    n = len(pts)
    norm = 1.0 / (2.0 * math.pi * h * h)
    out = np.empty(n)
    inv = -0.5 / (h * h)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d2 = cdist(pts[lo:hi], pts, "sqeuclidean")
        out[lo:hi] = np.exp(inv * d2).mean(axis=1)
    return norm * out


def loo_kde(f: np.ndarray, h: float, n: int) -> np.ndarray:
    """Leave-one-out densities from the plain KDE via the algebraic identity."""
    f = np.asarray(f, dtype=float)
    if n <= 1:
        return np.zeros_like(f)
    k0 = 1.0 / (2.0 * math.pi * h * h)
    return (n * f - k0) / (n - 1)


_NLL_PENALTY = 1e18


def _gpd_nll(excesses: np.ndarray, sigma: float, xi: float) -> float:
    if sigma <= 0:
        return _NLL_PENALTY
    n = len(excesses)
    if abs(xi) < 1e-9:
        return n * math.log(sigma) + excesses.sum() / sigma
    z = 1.0 + xi * excesses / sigma
    if np.any(z <= 0):
        # Out of support for xi < 0; finite penalty keeps the scalar
        # optimizer's interpolation well defined.
        return _NLL_PENALTY
    return n * math.log(sigma) + (1.0 + 1.0 / xi) * np.log(z).sum()


def _moments_fit(excesses: np.ndarray) -> Tuple[float, float]:
    m = float(np.mean(excesses))
    s2 = float(np.var(excesses))
    if m <= 0:
        return max(m, BANDWIDTH_FLOOR), 0.0
    if s2 < 1e-12 * max(m * m, 1.0):
        # Constant excesses: bounded tail, scale from the mean relation.
        xi = XI_BOUNDS[0]
        return m * (1.0 - xi), xi
    r = m * m / s2
    xi = float(np.clip(0.5 * (1.0 - r), *XI_BOUNDS))
    sigma = 0.5 * m * (r + 1.0)
    return max(sigma, 1e-12), xi


def fit_gpd(excesses: Sequence[float]) -> Tuple[float, float]:
    """Maximum-likelihood (sigma, xi) via profile likelihood over xi.

    The search is derivative-free and bounded; the method-of-moments
    estimate is used as a fallback when the likelihood misbehaves.
    """
    exc = np.asarray(excesses, dtype=float)
    if len(exc) < MIN_EXCESSES:
        raise InsufficientDataError(
            f"need at least {MIN_EXCESSES} excesses, got {len(exc)}"
        )
    if np.any(exc <= 0):
        raise ValueError("excesses must be positive")
    sigma_m, xi_m = _moments_fit(exc)
    if float(np.var(exc)) < 1e-12 * max(float(np.mean(exc)) ** 2, 1.0):
        return sigma_m, xi_m

    log_s0 = math.log(max(sigma_m, 1e-12))

    def profile(xi: float) -> Tuple[float, float]:
        inner = minimize_scalar(
            lambda ls: _gpd_nll(exc, math.exp(ls), xi),
            bounds=(log_s0 - 10.0, log_s0 + 10.0), method="bounded",
            options={"xatol": 1e-10},
        )
        return float(inner.fun), math.exp(float(inner.x))

    outer = minimize_scalar(lambda xi: profile(xi)[0], bounds=XI_BOUNDS,
                            method="bounded", options={"xatol": 1e-8})
    xi_hat = float(outer.x)
    nll_hat, sigma_hat = profile(xi_hat)
    if not np.isfinite(nll_hat) or sigma_hat <= 0:
        return sigma_m, xi_m
    if nll_hat > _gpd_nll(exc, sigma_m, xi_m):
        return sigma_m, xi_m
    return sigma_hat, xi_hat


def gpd_survival(excess: np.ndarray, sigma: float, xi: float) -> np.ndarray:
    """P(X > excess) for a GPD excess variable, clamped past a finite endpoint."""
    x = np.asarray(excess, dtype=float)
    if abs(xi) < 1e-6:
        return np.exp(-x / sigma)
    z = 1.0 + xi * x / sigma
    out = np.where(z > 0, np.power(np.maximum(z, 1e-300), -1.0 / xi), 0.0)
    return out


def tail_probability(y: float, fit: EvtFit) -> float:
    """Unconditional exceedance probability of y under the fit.

    Above the threshold this is zeta times the GPD survival; at or below
    it, the empirical survival fraction of the fitting sample (which is
    exactly zeta at y = u).
    """
    if y > fit.u:
        return float(fit.zeta * gpd_survival(np.array(y - fit.u), fit.sigma, fit.xi))
    if y == fit.u:
        return float(fit.zeta)
    if fit.sample is None:
        raise ValueError("empirical survival below u requires the fitting sample")
    n = len(fit.sample)
    return float((n - np.searchsorted(fit.sample, y, side="right")) / n)


def lookout(points: np.ndarray, alpha: float = 0.1, *,
            bw_quantile: float = 0.9, pot_quantile: float = 0.9) -> LookoutResult:
    """Flag the deep-tail points of a 2D cloud.

    A point is flagged when the GPD survival of its negative log density
    beyond the POT threshold drops below alpha; the score maps survival 0
    to the maximum of 10 and survival alpha to 0.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n < 3:
        return LookoutResult([], n=n, warnings=[f"only {n} points, need 3"])
    h = select_bandwidth(pts, bw_quantile)
    f = kde(pts, h)
    floo = loo_kde(f, h, n)
    y = -np.log(np.maximum(floo, DENSITY_FLOOR))
    u = float(np.quantile(y, pot_quantile))
    excesses = y[y > u] - u
    if len(excesses) < MIN_EXCESSES:
        widened = max(0.0, 1.0 - MIN_EXCESSES / n)
        u = float(np.quantile(y, widened))
        excesses = y[y > u] - u
    if len(excesses) < MIN_EXCESSES:
        return LookoutResult([], bandwidth=h, n=n, neg_log_density=y,
                             warnings=["tail too small for a GPD fit"])
    try:
        sigma, xi = fit_gpd(excesses)
    except (InsufficientDataError, ValueError) as exc:
        return LookoutResult([], bandwidth=h, n=n, neg_log_density=y,
                             warnings=[f"GPD fit failed: {exc}"])
    zeta = float((y > u).sum() / n)
    fit = EvtFit(u=u, sigma=sigma, xi=xi, zeta=zeta, sample=np.sort(y))
    # Conditional survival of each point's tail excess; 1 below the
    # threshold. Only tail-of-tail points fall under alpha.
    p = np.ones(n)
    above = y > u
    p[above] = gpd_survival(y[above] - u, sigma, xi)
    scale = 10.0 / alpha
    detections = [
        Detection(index=int(i), probability=float(p[i]),
                  score=float((alpha - p[i]) * scale))
        for i in np.flatnonzero(p < alpha)
    ]
    return LookoutResult(detections, bandwidth=h, fit=fit, n=n,
                         probabilities=p, neg_log_density=y)
