"""Improper GMRF sampling on product graphs and mode covariances."""
from __future__ import annotations

import json
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidInput
from .graph import laplacian_from_weights
from .spectral import factor_eigendecomposition, inverse_pair_spectrum

__all__ = [
    "ModeCovariances",
    "check_signals",
    "sample_igmrf",
    "mode_covariances",
    "full_scm",
    "dirichlet_energy",
    "center_modes",
    "save_signals",
    "load_signals",
]


class ModeCovariances(NamedTuple):
    S1: np.ndarray
    S2: np.ndarray


def check_signals(X, allow_nan: bool = False) -> np.ndarray:
    """Validate an ``(n, p1, p2)`` stack of two-way signals."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise InvalidInput(f"signals must have shape (n, p1, p2), got {X.shape}")
    if X.shape[0] < 1:
        raise InvalidInput("at least one signal is required")
    bad = ~np.isfinite(X)
    if allow_nan:
        bad &= ~np.isnan(X)
    if bad.any():
        raise InvalidInput("signals contain non-finite values")
    return X


def sample_igmrf(w1, w2, n: int, seed=None, p1=None, p2=None) -> np.ndarray:
    """Draw ``n`` signals from ``N(0, (L1 ⊕ L2)†)``.

    Uses the low-pass filter form ``x = U sqrt(Λ†) z`` with ``U = U1 ⊗ U2``,
    applied as ``U1 C U2^T`` on the ``(p1, p2)`` coefficient grid. The
    constant mode is dropped, so each sample sums to zero. Returns an array of
    shape ``(n, p1, p2)``; Gaussian draws come from ``numpy.random.default_rng(seed)``.
    """
    if n < 1:
        raise InvalidInput("n must be at least 1")
    e1 = factor_eigendecomposition(laplacian_from_weights(w1, p1))
    e2 = factor_eigendecomposition(laplacian_from_weights(w2, p2))
    scale = np.sqrt(inverse_pair_spectrum(e1, e2))
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, scale.shape[0], scale.shape[1]))
    return e1.U @ (Z * scale) @ e2.U.T


def mode_covariances(X) -> ModeCovariances:
    """``S1 = mean_k X_k X_k^T`` and ``S2 = mean_k X_k^T X_k``."""
    return _mode_covariances(check_signals(X))


def _mode_covariances(X) -> ModeCovariances:
    n, p1, p2 = X.shape
    rows = X.transpose(1, 0, 2).reshape(p1, n * p2)
    cols = X.reshape(n * p1, p2)
    return ModeCovariances(rows @ rows.T / n, cols.T @ cols / n)


def full_scm(X) -> np.ndarray:
    """Sample covariance of the row-major vectorized signals."""
    X = check_signals(X)
    V = X.reshape(X.shape[0], -1)
    return V.T @ V / V.shape[0]


def dirichlet_energy(L1, L2, S: ModeCovariances) -> float:
    """``Tr(L1 S1) + Tr(L2 S2)``, the mean smoothness on ``L1 ⊕ L2``."""
    return float(np.sum(L1 * S.S1) + np.sum(L2 * S.S2))


def center_modes(X) -> np.ndarray:
    """Remove per-row and per-column means (averaged over samples).

    NaN entries (missing nodes) are skipped when averaging and stay NaN.
    """
    X = check_signals(X, allow_nan=True)
    X = X - np.nanmean(X, axis=(0, 2), keepdims=True)
    return X - np.nanmean(X, axis=(0, 1), keepdims=True)


def save_signals(csv_path, X, seed=None, manifest_path=None) -> None:
    """Write ``n`` rows of ``p1*p2`` values plus a JSON manifest.

    The manifest defaults to the CSV path with a ``.json`` suffix.
    """
    X = check_signals(X, allow_nan=True)
    n, p1, p2 = X.shape
    csv_path = Path(csv_path)
    np.savetxt(csv_path, X.reshape(n, -1), delimiter=",", fmt="%.17g")
    manifest_path = csv_path.with_suffix(".json") if manifest_path is None else Path(manifest_path)
    manifest = {"p1": p1, "p2": p2, "n": n, "seed": None if seed is None else int(seed)}
    manifest_path.write_text(json.dumps(manifest))


def load_signals(csv_path, manifest_path=None) -> tuple[np.ndarray, dict]:
    csv_path = Path(csv_path)
    manifest_path = csv_path.with_suffix(".json") if manifest_path is None else Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    try:
        p1, p2, n = int(manifest["p1"]), int(manifest["p2"]), int(manifest["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{manifest_path}: bad signal manifest ({exc})") from exc
    data = np.loadtxt(csv_path, delimiter=",", ndmin=2)
    if data.shape != (n, p1 * p2):
        raise InvalidInput(
            f"{csv_path}: expected {n} rows of {p1 * p2} values, got {data.shape}"
        )
    return data.reshape(n, p1, p2), manifest
