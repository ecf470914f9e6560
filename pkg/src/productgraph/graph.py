"""Weight vectors, combinatorial Laplacians and Cartesian products.

A graph on ``p`` nodes is stored as a nonnegative vector of length
``p * (p - 1) / 2``. Entry ``l`` (1-based) holds ``W[i, j]`` for ``i > j`` with
``l = i - j + (j - 1) * (2p - j) / 2``, i.e. the strict lower triangle read
column by column. Two-way signals ``X`` of shape ``(p1, p2)`` are vectorized
row-major, so node ``(i1, i2)`` of the product graph has index
``i1 * p2 + i2`` (0-based).
"""
from __future__ import annotations

import csv
import json
import math
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exceptions import InvalidInput

__all__ = [
    "n_edges",
    "n_nodes",
    "edge_index",
    "laplacian_from_weights",
    "adjoint_on_matrix",
    "kron_sum",
    "product_weights",
    "validate_laplacian",
    "project_to_laplacian_weights",
    "is_connected",
    "save_graph",
    "load_graph",
    "export_edge_list",
]


def n_edges(p: int) -> int:
    return p * (p - 1) // 2


def n_nodes(m: int) -> int:
    """Node count ``p`` for a weight vector of length ``m``."""
    p = int(round((1 + math.sqrt(1 + 8 * m)) / 2))
    if n_edges(p) != m:
        raise InvalidInput(f"length {m} is not p(p-1)/2 for any integer p")
    return p


@lru_cache(maxsize=64)
def edge_index(p: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based ``(i, j)`` arrays with ``i > j`` in weight-vector order."""
    rows, cols = np.triu_indices(p, k=1)
    i, j = cols.copy(), rows.copy()
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


@lru_cache(maxsize=64)
def _flat_index(p: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = edge_index(p)
    return i * p + j, j * p + i


def _as_weights(w, p=None) -> tuple[np.ndarray, int]:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise InvalidInput(f"weight vector must be 1-D, got shape {w.shape}")
    if p is None:
        p = n_nodes(w.size)
    elif w.size != n_edges(p):
        raise InvalidInput(
            f"weight vector has length {w.size}, expected {n_edges(p)} for p={p}"
        )
    return w, p


def laplacian_from_weights(w, p: int | None = None) -> np.ndarray:
    """Combinatorial Laplacian ``D - W`` of the graph with weights ``w``.

    ``p`` is inferred from ``len(w)`` when omitted; note that ``len(w) == 0``
    is ambiguous (p = 0 or 1) and resolves to ``p = 1``.
    """
    w, p = _as_weights(w, p)
    lower, upper = _flat_index(p)
    L = np.zeros(p * p)
    L[lower] = -w
    L[upper] = -w
    L = L.reshape(p, p)
    L.flat[:: p + 1] = -L.sum(axis=1)
    return L


def adjoint_on_matrix(Q) -> np.ndarray:
    """Adjoint of :func:`laplacian_from_weights` applied to a square matrix.

    Entry ``l`` equals ``Q[i,i] - Q[i,j] - Q[j,i] + Q[j,j]`` for the pair
    ``(i, j)`` stored at ``l``.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {Q.shape}")
    i, j = edge_index(Q.shape[0])
    d = np.diagonal(Q)
    return d[i] - Q[i, j] - Q[j, i] + d[j]


def kron_sum(A, B) -> np.ndarray:
    """Dense Kronecker sum ``A ⊗ I + I ⊗ B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return np.kron(A, np.eye(B.shape[0])) + np.kron(np.eye(A.shape[0]), B)


def product_weights(w1, w2, p1: int | None = None, p2: int | None = None) -> np.ndarray:
    """Weight vector of the Cartesian product of two factor graphs.

    Nodes ``(a, b)`` and ``(c, d)`` are adjacent iff ``a == c`` and ``b ~ d``
    in the second factor, or ``b == d`` and ``a ~ c`` in the first.
    """
    w1, p1 = _as_weights(w1, p1)
    w2, p2 = _as_weights(w2, p2)
    p = p1 * p2
    W = np.zeros((p, p))
    i1, j1 = edge_index(p1)
    i2, j2 = edge_index(p2)
    base = np.arange(p1) * p2
    # copies of factor 2 inside each row block
    hi = (base[:, None] + i2[None, :]).ravel()
    lo = (base[:, None] + j2[None, :]).ravel()
    W[hi, lo] = np.tile(w2, p1)
    # copies of factor 1 across row blocks
    off = np.arange(p2)
    hi = (i1[:, None] * p2 + off[None, :]).ravel()
    lo = (j1[:, None] * p2 + off[None, :]).ravel()
    W[hi, lo] = np.repeat(w1, p2)
    i, j = edge_index(p)
    return W[i, j]


def validate_laplacian(M, tol: float = 1e-10) -> bool:
    """Check symmetry, zero row sums and nonpositive off-diagonals.

    ``tol`` is relative to ``max(1, ||M||_F)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if not np.all(np.isfinite(M)):
        return False
    scale = tol * max(1.0, float(np.linalg.norm(M)))
    if np.max(np.abs(M - M.T), initial=0.0) > scale:
        return False
    if np.max(np.abs(M.sum(axis=1)), initial=0.0) > scale:
        return False
    off = M - np.diag(np.diagonal(M))
    return bool(np.max(off, initial=0.0) <= scale)


def project_to_laplacian_weights(M) -> np.ndarray:
    """Keep the negative strict-lower-triangle entries as edge weights."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {M.shape}")
    i, j = edge_index(M.shape[0])
    return np.maximum(0.0, -M[i, j])


def is_connected(w, p: int | None = None) -> bool:
    """Graph connectivity from the edge support (weights > 0)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    w, p = _as_weights(w, p)
    if p <= 1:
        return True
    i, j = edge_index(p)
    keep = w > 0
    A = coo_matrix((np.ones(keep.sum()), (i[keep], j[keep])), shape=(p, p))
    n_comp, _ = connected_components(A, directed=False)
    return n_comp == 1


def save_graph(path, w, p: int | None = None) -> None:
    w, p = _as_weights(w, p)
    Path(path).write_text(json.dumps({"p": p, "w": [float(x) for x in w]}))


def load_graph(path) -> tuple[np.ndarray, int]:
    """Read a ``{"p": int, "w": [...]}`` file; returns ``(w, p)``."""
    data = json.loads(Path(path).read_text())
    try:
        p = int(data["p"])
        w = np.asarray(data["w"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: not a graph file ({exc})") from exc
    w, p = _as_weights(w, p)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidInput(f"{path}: weights must be finite and nonnegative")
    return w, p


def export_edge_list(path, w, p: int | None = None) -> None:
    """Write nonzero edges as ``i,j,weight`` rows (1-based, ``i > j``)."""
    w, p = _as_weights(w, p)
    i, j = edge_index(p)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "weight"])
        for a, b, x in zip(i, j, w):
            if x != 0:
                writer.writerow([int(a) + 1, int(b) + 1, repr(float(x))])
