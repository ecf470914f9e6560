"""Spectral utilities for Kronecker-sum Laplacians.

The product Laplacian ``L1 ⊕ L2`` has eigenvectors ``U1 ⊗ U2`` and eigenvalues
``lam1[i] + lam2[j]``, so everything the solver needs (pseudo-log-determinant,
gradient matrices, sampling filters) is computed from the two factor
eigendecompositions without ever forming the ``p1*p2`` square matrix.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import DisconnectedGraph, InvalidInput
from .graph import is_connected, kron_sum, project_to_laplacian_weights

__all__ = [
    "FactorEigen",
    "factor_eigendecomposition",
    "product_spectrum",
    "default_zero_tol",
    "inverse_pair_spectrum",
    "product_pseudo_logdet",
    "logdet_and_inverse",
    "H_from_inverse_spectrum",
    "compute_H_matrices",
    "naive_H_matrices",
    "dense_pseudo_inverse",
]


class FactorEigen(NamedTuple):
    U: np.ndarray
    lam: np.ndarray


def factor_eigendecomposition(L) -> FactorEigen:
    """Full symmetric eigendecomposition with ascending eigenvalues."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {L.shape}")
    if not np.all(np.isfinite(L)):
        raise InvalidInput("matrix has non-finite entries")
    lam, U = np.linalg.eigh(L)
    return FactorEigen(U, lam)


def _pair_sums(e1, e2):
    return e1.lam[:, None] + e2.lam[None, :]


def product_spectrum(e1: FactorEigen, e2: FactorEigen) -> np.ndarray:
    """The ``p1*p2`` eigenvalues ``lam1[i] + lam2[j]`` of ``L1 ⊕ L2``.

    Entry ``i*p2 + j`` pairs with the eigenvector column of ``U1 ⊗ U2``.
    """
    return _pair_sums(e1, e2).ravel()


def default_zero_tol(pair_sums) -> float:
    return 1e-9 * max(1.0, float(np.max(pair_sums, initial=0.0)))


def _zero_mask(e1, e2, zero_tol):
    sums = _pair_sums(e1, e2)
    if sums.size == 1:
        raise DisconnectedGraph("a single-node product graph has no edges")
    tol = default_zero_tol(sums) if zero_tol is None else zero_tol
    if tol <= 0:
        raise InvalidInput("zero_tol must be positive")
    zero = sums <= tol
    if np.count_nonzero(zero) > 1:
        raise DisconnectedGraph(
            f"{int(zero.sum())} product eigenvalues below {tol:.3g}; "
            "a factor graph is disconnected"
        )
    return sums, zero


def inverse_pair_spectrum(e1: FactorEigen, e2: FactorEigen, zero_tol=None) -> np.ndarray:
    """Pseudo-inverse of the product spectrum as a ``(p1, p2)`` array."""
    sums, zero = _zero_mask(e1, e2, zero_tol)
    inv = np.zeros_like(sums)
    np.divide(1.0, sums, out=inv, where=~zero)
    return inv


def logdet_and_inverse(e1: FactorEigen, e2: FactorEigen, zero_tol=None):
    """Pseudo-log-determinant and inverse pair spectrum in one pass."""
    sums, zero = _zero_mask(e1, e2, zero_tol)
    sums = np.where(zero, 1.0, sums)
    return float(np.sum(np.log(sums))), np.where(zero, 0.0, 1.0 / sums)


def product_pseudo_logdet(e1: FactorEigen, e2: FactorEigen, zero_tol=None) -> float:
    """``log det†(L1 ⊕ L2)`` from factor spectra.

    Raises :class:`DisconnectedGraph` if more than one pairwise sum is zero.
    """
    sums, zero = _zero_mask(e1, e2, zero_tol)
    return float(np.sum(np.log(sums[~zero])))


def H_from_inverse_spectrum(e1: FactorEigen, e2: FactorEigen, inv):
    H1 = (e1.U * inv.sum(axis=1)) @ e1.U.T
    H2 = (e2.U * inv.sum(axis=0)) @ e2.U.T
    return H1, H2


def compute_H_matrices(e1: FactorEigen, e2: FactorEigen, zero_tol=None):
    """Partial traces of ``(L1 ⊕ L2)†`` over each mode.

    ``H1 = U1 diag(sum_j 1/(lam1 + lam2[j])) U1^T`` with the single zero pair
    contributing nothing, and symmetrically for ``H2``. Cost is dominated by
    the factor eigendecompositions.
    """
    return H_from_inverse_spectrum(e1, e2, inverse_pair_spectrum(e1, e2, zero_tol))


def dense_pseudo_inverse(L) -> np.ndarray:
    """``L† = (L + J)^{-1} - J`` for the Laplacian of a connected graph."""
    L = np.asarray(L, dtype=float)
    p = L.shape[0]
    J = np.full((p, p), 1.0 / p)
    return scipy.linalg.inv(L + J, check_finite=False) - J


def naive_H_matrices(L1, L2):
    """Reference computation of ``H1, H2`` through the dense product Laplacian.

    Forms ``L1 ⊕ L2``, inverts it and sums the diagonal blocks. Memory and time
    grow like ``(p1*p2)**2`` and ``(p1*p2)**3``; intended for validation.
    """
    L1 = np.asarray(L1, dtype=float)
    L2 = np.asarray(L2, dtype=float)
    p1, p2 = L1.shape[0], L2.shape[0]
    L = kron_sum(L1, L2)
    if p1 * p2 == 1 or not is_connected(project_to_laplacian_weights(L)):
        raise DisconnectedGraph("product graph is not connected")
    P = dense_pseudo_inverse(L).reshape(p1, p2, p1, p2)
    H1 = np.einsum("albl->ab", P)
    H2 = np.einsum("lalb->ab", P)
    return H1, H2
