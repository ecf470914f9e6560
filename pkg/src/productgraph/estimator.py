"""scikit-learn compatible front end."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidInput
from .graph import kron_sum, laplacian_from_weights
from .missing import check_mask, mwgl_missing_solve
from .model import dirichlet_energy, mode_covariances
from .solver import SolverConfig, mwgl_solve
from .spectral import factor_eigendecomposition, product_pseudo_logdet


def _as_tensor(X, factor_shape):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if factor_shape is None:
            raise InvalidInput("2-D input needs factor_shape=(p1, p2)")
        p1, p2 = factor_shape
        if X.shape[1] != p1 * p2:
            raise InvalidInput(f"expected {p1 * p2} columns, got {X.shape[1]}")
        return X.reshape(X.shape[0], p1, p2)
    if X.ndim != 3:
        raise InvalidInput(f"expected (n, p1, p2) or (n, p1*p2) input, got shape {X.shape}")
    if factor_shape is not None and X.shape[1:] != tuple(factor_shape):
        raise InvalidInput(f"input shape {X.shape[1:]} does not match factor_shape {factor_shape}")
    return X


def _mask_from_nan(X):
    nan = np.isnan(X)
    missing = nan.all(axis=0)
    if (nan.any(axis=0) & ~missing).any():
        raise InvalidInput("NaN entries must cover whole fibers (a node missing in every sample)")
    return ~missing


class ProductGraphLearner(TransformerMixin, BaseEstimator):
    """Learn the two factor graphs of a Cartesian product graph from two-way signals.

    Parameters
    ----------
    factor_shape : tuple of int, optional
        ``(p1, p2)``; required when ``X`` is passed as ``(n, p1*p2)`` with
        row-major vectorization.
    alpha : float
        Sparsity weight; the factor penalties default to ``p2*alpha`` and
        ``p1*alpha``.
    alpha1, alpha2 : float, optional
        Explicit per-factor penalties.
    eta, tol, max_iter, backtracking
        Projected gradient descent settings.
    beta : float
        Smoothing strength for imputing structurally missing nodes.

    Attributes
    ----------
    w1_, w2_ : ndarray
        Learned factor weight vectors.
    laplacian1_, laplacian2_ : ndarray
        The corresponding Laplacians.
    mask_ : ndarray of bool, shape (p1, p2)
        Observed nodes seen during ``fit``.
    imputed_ : ndarray or None
        Imputed training signals when some nodes were missing.
    """

    def __init__(
        self,
        factor_shape=None,
        alpha=0.0,
        alpha1=None,
        alpha2=None,
        eta=1e-3,
        tol=1e-6,
        max_iter=20000,
        backtracking=False,
        beta=1.0,
    ):
        self.factor_shape = factor_shape
        self.alpha = alpha
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.eta = eta
        self.tol = tol
        self.max_iter = max_iter
        self.backtracking = backtracking
        self.beta = beta

    def _config(self):
        return SolverConfig(
            alpha=self.alpha,
            alpha1=self.alpha1,
            alpha2=self.alpha2,
            eta=self.eta,
            tol=self.tol,
            max_iter=self.max_iter,
            backtracking=self.backtracking,
        )

    def fit(self, X, y=None, mask=None):
        """Fit on ``X``; missing nodes come from ``mask`` or all-NaN fibers."""
        X = _as_tensor(X, self.factor_shape)
        if mask is None:
            mask = _mask_from_nan(X)
        mask = check_mask(np.asarray(mask, dtype=bool), X.shape[1:])
        cfg = self._config()
        if mask.all():
            if not np.all(np.isfinite(X)):
                raise InvalidInput("signals contain non-finite values")
            result = mwgl_solve(X, cfg)
        else:
            result = mwgl_missing_solve(X, mask, cfg, beta=self.beta)
        self.factor_shape_ = X.shape[1:]
        self.mask_ = mask
        self.w1_ = result.w1
        self.w2_ = result.w2
        self.laplacian1_ = laplacian_from_weights(result.w1, X.shape[1])
        self.laplacian2_ = laplacian_from_weights(result.w2, X.shape[2])
        self.objective_trace_ = np.asarray(result.objective_trace)
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.imputed_ = result.imputed
        return self

    @property
    def laplacian_(self):
        """Product Laplacian ``L1 ⊕ L2``."""
        check_is_fitted(self, "w1_")
        return kron_sum(self.laplacian1_, self.laplacian2_)

    def transform(self, X):
        """Fill all-NaN fibers with their conditional mean under the learned graph.

        Observed entries are returned unchanged. The output has the same shape
        as the input.
        """
        check_is_fitted(self, "w1_")
        shape = np.shape(X)
        X = _as_tensor(X, self.factor_shape_)
        mask = _mask_from_nan(X)
        if mask.all():
            return X.reshape(shape).copy()
        check_mask(mask, X.shape[1:])
        L = self.laplacian_
        obs = mask.ravel()
        V = X.reshape(X.shape[0], -1).copy()
        rhs = L[np.ix_(~obs, obs)] @ V[:, obs].T
        V[:, ~obs] = -np.linalg.solve(L[np.ix_(~obs, ~obs)], rhs).T
        return V.reshape(shape)

    def score(self, X, y=None):
        """Mean log-likelihood of fully observed signals under ``N(0, L†)``."""
        check_is_fitted(self, "w1_")
        X = _as_tensor(X, self.factor_shape_)
        S = mode_covariances(X)
        e1 = factor_eigendecomposition(self.laplacian1_)
        e2 = factor_eigendecomposition(self.laplacian2_)
        p = X.shape[1] * X.shape[2]
        energy = dirichlet_energy(self.laplacian1_, self.laplacian2_, S)
        return 0.5 * (product_pseudo_logdet(e1, e2) - energy - (p - 1) * math.log(2 * math.pi))
