"""Joint graph learning and imputation under structural missingness.

A node ``(i1, i2)`` of the product graph is either observed in every sample or
in none. Masks are boolean ``(p1, p2)`` arrays, ``True`` where observed.
Values stored at missing positions are ignored (NaN is fine).
"""
from __future__ import annotations

import csv
import logging
import math

import numpy as np

from .exceptions import EmptyNeighborhood, InvalidInput, NoCleanFiber
from .graph import laplacian_from_weights
from .model import ModeCovariances, check_signals, mode_covariances
from .solver import (
    SolveResult,
    SolverConfig,
    _check_weights,
    _Descent,
    _Problem,
    initialize_weights,
    logger as _solver_logger,
)
from .spectral import FactorEigen, factor_eigendecomposition

logger = logging.getLogger(__name__)

__all__ = [
    "check_mask",
    "structural_mask",
    "load_mask",
    "save_mask",
    "initial_impute",
    "masked_mode_covariances",
    "tikhonov_refine",
    "mwgl_missing_solve",
]


def check_mask(mask, shape=None) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != bool:
        raise InvalidInput("mask must be a 2-D boolean array (True = observed)")
    if shape is not None and mask.shape != tuple(shape):
        raise InvalidInput(f"mask shape {mask.shape} does not match signals {tuple(shape)}")
    if not mask.any():
        raise InvalidInput("mask has no observed nodes")
    return mask


def structural_mask(p1: int, p2: int, fraction: float, pattern: str = "random", seed=None) -> np.ndarray:
    """Observation mask with about ``fraction`` of the nodes missing.

    ``"random"`` removes uniformly chosen nodes, redrawing until every missing
    node keeps an observed node in its row or column. ``"block"`` removes a
    top-left block, which leaves fully observed rows and columns.
    """
    if not 0 <= fraction < 1:
        raise InvalidInput("fraction must lie in [0, 1)")
    k = int(round(fraction * p1 * p2))
    mask = np.ones((p1, p2), dtype=bool)
    if k == 0:
        return mask
    if pattern == "block":
        a = min(p1 - 1, max(1, int(round(p1 * math.sqrt(fraction)))))
        b = min(p2 - 1, max(1, int(round(k / a))))
        mask[:a, :b] = False
        return mask
    if pattern != "random":
        raise InvalidInput(f"unknown mask pattern {pattern!r}")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        mask = np.ones(p1 * p2, dtype=bool)
        mask[rng.choice(p1 * p2, size=k, replace=False)] = False
        mask = mask.reshape(p1, p2)
        if _neighborhood_counts(mask)[~mask].min() > 0:
            return mask
    raise InvalidInput("could not draw a mask where every missing node has observed neighbours")


def load_mask(path, p1: int, p2: int) -> np.ndarray:
    """Read a CSV of missing pairs (header ``i1,i2``, 1-based)."""
    mask = np.ones((p1, p2), dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"i1", "i2"} - set(reader.fieldnames):
            raise InvalidInput(f"{path}: expected header i1,i2")
        for row in reader:
            i1, i2 = int(row["i1"]), int(row["i2"])
            if not (1 <= i1 <= p1 and 1 <= i2 <= p2):
                raise InvalidInput(f"{path}: pair ({i1},{i2}) out of range")
            mask[i1 - 1, i2 - 1] = False
    return check_mask(mask)


def save_mask(path, mask) -> None:
    mask = check_mask(mask)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i1", "i2"])
        for i1, i2 in zip(*np.nonzero(~mask)):
            writer.writerow([int(i1) + 1, int(i2) + 1])


def _neighborhood_counts(mask):
    return mask.sum(axis=1)[:, None] + mask.sum(axis=0)[None, :]


def _prepare(X, mask):
    X = check_signals(X, allow_nan=True)
    mask = check_mask(mask, X.shape[1:])
    if np.isnan(X[:, mask]).any():
        raise InvalidInput("observed entries contain NaN")
    return X, mask


def initial_impute(X, mask) -> np.ndarray:
    """Fill each missing node with the mean of the observed nodes in its row and column."""
    X, mask = _prepare(X, mask)
    if mask.all():
        return X.copy()
    counts = _neighborhood_counts(mask)
    if counts[~mask].min() == 0:
        bad = [tuple(int(v) + 1 for v in ij) for ij in zip(*np.nonzero((counts == 0) & ~mask))]
        raise EmptyNeighborhood(f"missing nodes without observed row/column neighbours: {bad}")
    Xo = np.where(mask, X, 0.0)
    totals = Xo.sum(axis=2)[:, :, None] + Xo.sum(axis=1)[:, None, :]
    filled = totals / np.maximum(counts, 1)
    return np.where(mask, X, filled)


def masked_mode_covariances(X, mask) -> ModeCovariances:
    """Mode covariances from fully observed columns (``S1``) and rows (``S2``)."""
    X, mask = _prepare(X, mask)
    clean_cols = np.flatnonzero(mask.all(axis=0))
    clean_rows = np.flatnonzero(mask.all(axis=1))
    if clean_cols.size == 0 or clean_rows.size == 0:
        raise NoCleanFiber("no fully observed column or no fully observed row")
    if mask.all():
        return mode_covariances(X)
    S1 = mode_covariances(X[:, :, clean_cols]).S1
    S2 = mode_covariances(X[:, clean_rows, :]).S2
    return ModeCovariances(S1, S2)


def _filter(e: FactorEigen, beta):
    return (e.U / (beta * e.lam + 1.0)) @ e.U.T


def tikhonov_refine(X, mask, w1, w2, beta: float = 1.0, eigs=None) -> np.ndarray:
    """One pass of factor-wise Tikhonov smoothing, written back to missing nodes only.

    Computes ``(beta L1 + I)^-1 X (beta L2 + I)^-1`` for every sample through
    the factor eigendecompositions (pass ``eigs`` to reuse them) and keeps
    the observed entries of ``X``.
    """
    if not beta >= 0:
        raise InvalidInput("beta must be nonnegative")
    X, mask = _prepare(X, mask)
    if mask.all() or beta == 0:
        return X.copy()
    if eigs is None:
        eigs = (
            factor_eigendecomposition(laplacian_from_weights(w1, X.shape[1])),
            factor_eigendecomposition(laplacian_from_weights(w2, X.shape[2])),
        )
    F1, F2 = _filter(eigs[0], beta), _filter(eigs[1], beta)
    smoothed = F1 @ X @ F2
    return np.where(mask, X, smoothed)


def _initial_covariances(X, mask):
    try:
        return masked_mode_covariances(X, mask)
    except NoCleanFiber:
        logger.info("no clean row/column fibers; initializing from the mean-imputed data")
        return mode_covariances(initial_impute(X, mask))


def mwgl_missing_solve(X, mask, cfg: SolverConfig = SolverConfig(), beta: float = 1.0, init=None) -> SolveResult:
    """Learn factor graphs while imputing structurally missing nodes.

    Each iteration smooths the imputed values with the current factor graphs,
    recomputes the mode covariances and takes one projected gradient step.
    The returned result carries the final imputed signals in ``imputed``.
    """
    if not beta >= 0:
        raise InvalidInput("beta must be nonnegative")
    X, mask = _prepare(X, mask)
    Xcur = initial_impute(X, mask)
    if init is None:
        w1, w2 = initialize_weights(_initial_covariances(X, mask))
    else:
        w1, w2 = init
    S = mode_covariances(Xcur)
    prob = _Problem(S, cfg)
    w1 = _check_weights(w1, prob.p1, "w1").copy()
    w2 = _check_weights(w2, prob.p2, "w2").copy()
    if np.any(w1 < 0) or np.any(w2 < 0):
        raise InvalidInput("initial weights must be nonnegative")

    descent = _Descent(prob, cfg, w1, w2)
    missing = ~mask
    refine = missing.any() and beta > 0
    n, p1, p2 = Xcur.shape
    # (p1, n, p2) layout turns both filters and both covariances into single GEMMs
    work = np.ascontiguousarray(Xcur.transpose(1, 0, 2))
    rows = work.reshape(p1, n * p2)
    cols = work.reshape(p1 * n, p2)
    samples = work.transpose(1, 0, 2)
    converged = False
    iterations = 0
    for t in range(1, cfg.max_iter + 1):
        if refine:
            e1, e2 = descent.it.eigs
            left = (_filter(e1, beta) @ rows).reshape(p1 * n, p2)
            smoothed = (left @ _filter(e2, beta)).reshape(p1, n, p2).transpose(1, 0, 2)
            samples[:, missing] = smoothed[:, missing]
            descent.update_covariances(ModeCovariances(rows @ rows.T / n, cols.T @ cols / n))
            descent.trace[-1] = descent.it.f
        delta = descent.step(t)
        iterations = t
        if delta <= cfg.tol:
            converged = True
            break
    if not converged:
        _solver_logger.warning("no convergence after %d iterations", iterations)
    record = descent.config_record()
    record["beta"] = beta
    return SolveResult(
        w1=descent.it.w1,
        w2=descent.it.w2,
        objective_trace=descent.trace,
        iterations=iterations,
        converged=converged,
        config=record,
        imputed=np.ascontiguousarray(samples),
    )
