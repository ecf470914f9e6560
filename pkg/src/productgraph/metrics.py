"""Evaluation metrics: normalized relative error, PR-AUC and rate fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSupport, InsufficientPoints, InvalidInput, ZeroTrace
from .graph import kron_sum, laplacian_from_weights

__all__ = [
    "RatePoint",
    "trace_normalize",
    "rel_err",
    "factor_errors",
    "pr_auc",
    "rate_regressor",
    "fit_rate_constant",
]


@dataclass(frozen=True)
class RatePoint:
    n: int
    p1: int
    p2: int
    rel_err: float

    @property
    def p(self) -> int:
        return self.p1 * self.p2


def trace_normalize(L, target: float) -> np.ndarray:
    """Rescale ``L`` so that its trace equals ``target``."""
    L = np.asarray(L, dtype=float)
    tr = np.trace(L)
    if not tr > 0:
        raise ZeroTrace("cannot normalize a matrix with nonpositive trace")
    return L * (target / tr)


def rel_err(L_hat, L_star, target: float) -> float:
    """Frobenius error of ``L_hat`` relative to ``L_star`` after trace normalization."""
    L_hat = np.asarray(L_hat, dtype=float)
    L_star = np.asarray(L_star, dtype=float)
    if L_hat.shape != L_star.shape:
        raise InvalidInput(f"shape mismatch: {L_hat.shape} vs {L_star.shape}")
    A = trace_normalize(L_hat, target)
    B = trace_normalize(L_star, target)
    return float(np.linalg.norm(A - B) / np.linalg.norm(B))


def factor_errors(w1_hat, w2_hat, w1_star, w2_star, p1=None, p2=None) -> dict:
    """Relative errors of the product and both factors.

    Targets are ``p1`` and ``p2`` for the factors and ``2 * p1 * p2`` for the
    product Laplacian.
    """
    L1h, L1s = laplacian_from_weights(w1_hat, p1), laplacian_from_weights(w1_star, p1)
    L2h, L2s = laplacian_from_weights(w2_hat, p2), laplacian_from_weights(w2_star, p2)
    p1, p2 = L1s.shape[0], L2s.shape[0]
    return {
        "product": rel_err(kron_sum(L1h, L2h), kron_sum(L1s, L2s), 2 * p1 * p2),
        "factor1": rel_err(L1h, L1s, p1),
        "factor2": rel_err(L2h, L2s, p2),
    }


def pr_auc(w_hat, w_star) -> float:
    """Area under the precision-recall curve for recovering the support of ``w_star``.

    Thresholds run over the distinct scores in decreasing order; entries with
    equal scores enter together. The curve starts at recall 0 with the
    precision of the top-scored group and is integrated by the trapezoid rule.
    """
    scores = np.asarray(w_hat, dtype=float).ravel()
    truth = np.asarray(w_star, dtype=float).ravel() > 0
    if scores.shape != truth.shape:
        raise InvalidInput("w_hat and w_star must have the same length")
    n_pos = int(truth.sum())
    if n_pos == 0 or n_pos == truth.size:
        raise DegenerateSupport("the true support must contain both edges and non-edges")

    order = np.argsort(-scores, kind="mergesort")
    s, t = scores[order], truth[order]
    # last index of each group of tied scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(t)[ends]
    predicted = ends + 1
    precision = tp / predicted
    recall = tp / n_pos
    recall = np.r_[0.0, recall]
    precision = np.r_[precision[0], precision]
    return float(np.sum(np.diff(recall) * (precision[1:] + precision[:-1]) / 2))


def rate_regressor(n, p1, p2) -> float:
    """``sqrt(log(p) / (n * min(p1, p2)))``."""
    return math.sqrt(math.log(p1 * p2) / (n * min(p1, p2)))


def fit_rate_constant(points) -> tuple[float, float, float]:
    """Fit ``rel_err = c * sqrt(log p / (n min(p1, p2)))`` through the origin.

    Returns ``(c, r_squared, slope_log_n)`` where ``r_squared`` is the usual
    centered coefficient of determination of the through-origin fit and
    ``slope_log_n`` the least-squares slope of ``log(rel_err)`` on ``log(n)``.
    """
    points = list(points)
    if len({pt.n for pt in points}) < 2:
        raise InsufficientPoints("need at least two distinct sample counts")
    x = np.array([rate_regressor(pt.n, pt.p1, pt.p2) for pt in points])
    y = np.array([pt.rel_err for pt in points], dtype=float)
    c = float(x @ y / (x @ x))
    ss_res = float(np.sum((y - c * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    if np.any(y <= 0):
        raise InvalidInput("log-log slope needs positive errors")
    slope = float(np.polyfit(np.log([pt.n for pt in points]), np.log(y), 1)[0])
    return c, r2, slope
