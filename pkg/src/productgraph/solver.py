"""Penalized maximum likelihood for Cartesian product Laplacians.

Minimizes, over nonnegative factor weights ``w1`` and ``w2``::

    w1 . L*(S1) + w2 . L*(S2) - logdet†(L(w1) ⊕ L(w2)) + a1 * sum(w1) + a2 * sum(w2)

by projected gradient descent. Both factors are updated simultaneously from
the gradient at the current iterate.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DisconnectedGraph,
    DisconnectedIterate,
    InvalidInput,
    NonFiniteObjective,
    StepTooLarge,
)
from .graph import (
    adjoint_on_matrix,
    is_connected,
    laplacian_from_weights,
    n_edges,
    project_to_laplacian_weights,
)
from .model import ModeCovariances, mode_covariances
from .spectral import (
    FactorEigen,
    H_from_inverse_spectrum,
    factor_eigendecomposition,
    inverse_pair_spectrum,
    logdet_and_inverse,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SolveResult",
    "objective",
    "gradient",
    "pgd_step",
    "initialize_weights",
    "mwgl_solve",
]

#: uniform weight added to every edge of a disconnected initial factor
REPAIR_WEIGHT = 1e-2
#: smallest step size reachable by backtracking
MIN_ETA = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.0
    alpha1: float | None = None
    alpha2: float | None = None
    eta: float = 1e-3
    tol: float = 1e-6
    max_iter: int = 20000
    backtracking: bool = False
    # consecutive objective increases tolerated at a fixed step
    patience: int = 25

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidInput("eta must be positive")
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")
        if self.max_iter < 1:
            raise InvalidInput("max_iter must be at least 1")
        for name in ("alpha", "alpha1", "alpha2"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise InvalidInput(f"{name} must be nonnegative")

    def penalties(self, p1: int, p2: int) -> tuple[float, float]:
        """Per-factor penalties; defaults are ``p2 * alpha`` and ``p1 * alpha``."""
        a1 = p2 * self.alpha if self.alpha1 is None else self.alpha1
        a2 = p1 * self.alpha if self.alpha2 is None else self.alpha2
        return float(a1), float(a2)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SolveResult:
    w1: np.ndarray
    w2: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    config: dict = field(default_factory=dict)
    imputed: np.ndarray | None = None

    @property
    def p1(self) -> int:
        return self.L1.shape[0]

    @property
    def p2(self) -> int:
        return self.L2.shape[0]

    @property
    def L1(self) -> np.ndarray:
        return laplacian_from_weights(self.w1, self.config.get("p1"))

    @property
    def L2(self) -> np.ndarray:
        return laplacian_from_weights(self.w2, self.config.get("p2"))

    def to_dict(self) -> dict:
        return {
            "w1": [float(x) for x in self.w1],
            "w2": [float(x) for x in self.w2],
            "objective_trace": [float(x) for x in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "config": self.config,
        }


def _check_covariances(S) -> ModeCovariances:
    S1 = np.asarray(S[0], dtype=float)
    S2 = np.asarray(S[1], dtype=float)
    for name, M in (("S1", S1), ("S2", S2)):
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidInput(f"{name} must be square, got shape {M.shape}")
    return ModeCovariances(S1, S2)


def _check_weights(w, p, name):
    w = np.asarray(w, dtype=float)
    if w.shape != (n_edges(p),):
        raise InvalidInput(f"{name} has shape {w.shape}, expected ({n_edges(p)},)")
    return w


class _Problem:
    """Objective and gradient evaluation with cached linear terms."""

    def __init__(self, S: ModeCovariances, cfg: SolverConfig):
        self.S = _check_covariances(S)
        self.p1 = self.S.S1.shape[0]
        self.p2 = self.S.S2.shape[0]
        self.a1, self.a2 = cfg.penalties(self.p1, self.p2)
        self.set_covariances(self.S)

    def set_covariances(self, S: ModeCovariances):
        self.S = S
        self.c1 = adjoint_on_matrix(S.S1) + self.a1
        self.c2 = adjoint_on_matrix(S.S2) + self.a2

    def eig(self, w1, w2) -> tuple[FactorEigen, FactorEigen]:
        e1 = factor_eigendecomposition(laplacian_from_weights(w1, self.p1))
        e2 = factor_eigendecomposition(laplacian_from_weights(w2, self.p2))
        return e1, e2

    def combine(self, w1, w2, logdet) -> float:
        f = w1 @ self.c1 + w2 @ self.c2 - logdet
        if not np.isfinite(f):
            raise NonFiniteObjective(f"objective evaluated to {f}")
        return float(f)

    def evaluate(self, w1, w2):
        """Returns ``(eigs, logdet, inverse pair spectrum)``."""
        eigs = self.eig(w1, w2)
        logdet, inv = logdet_and_inverse(*eigs)
        return eigs, logdet, inv

    def value(self, w1, w2) -> float:
        _, logdet, _ = self.evaluate(w1, w2)
        return self.combine(w1, w2, logdet)

    def grad(self, eigs, inv=None):
        if inv is None:
            inv = inverse_pair_spectrum(*eigs)
        H1, H2 = H_from_inverse_spectrum(*eigs, inv)
        return self.c1 - adjoint_on_matrix(H1), self.c2 - adjoint_on_matrix(H2)


def objective(w1, w2, S, cfg: SolverConfig = SolverConfig()) -> float:
    """Penalized negative log-likelihood at ``(w1, w2)``.

    Raises :class:`DisconnectedGraph` on the boundary where a factor is
    disconnected (the objective is infinite there).
    """
    prob = _Problem(S, cfg)
    w1 = _check_weights(w1, prob.p1, "w1")
    w2 = _check_weights(w2, prob.p2, "w2")
    return prob.value(w1, w2)


def gradient(w1, w2, S, cfg: SolverConfig = SolverConfig()):
    """Gradient ``(g1, g2)`` of :func:`objective`."""
    prob = _Problem(S, cfg)
    w1 = _check_weights(w1, prob.p1, "w1")
    w2 = _check_weights(w2, prob.p2, "w2")
    return prob.grad(prob.eig(w1, w2))


def _project_step(w, g, eta):
    return np.maximum(w - eta * g, 0.0)


def pgd_step(w1, w2, S, cfg: SolverConfig = SolverConfig()):
    """One projected gradient step with step size ``cfg.eta``."""
    g1, g2 = gradient(w1, w2, S, cfg)
    return _project_step(np.asarray(w1, float), g1, cfg.eta), _project_step(
        np.asarray(w2, float), g2, cfg.eta
    )


def _inverse_for_init(S):
    p = S.shape[0]
    scale = np.trace(S) / p
    if not scale > 0:
        return None
    smallest = np.linalg.eigvalsh(S)[0]
    if smallest < 1e-10 * scale:
        S = S + 1e-3 * scale * np.eye(p)
    return np.linalg.inv(S)


def initialize_weights(S):
    """Starting weights from the negative off-diagonals of ``S1^-1``, ``S2^-1``.

    Near-singular covariances are ridge-regularized before inversion, and a
    factor whose projected weights leave it disconnected gets
    :data:`REPAIR_WEIGHT` added to every edge.
    """
    S = _check_covariances(S)
    out = []
    for M in S:
        p = M.shape[0]
        inv = _inverse_for_init(M)
        w = np.zeros(n_edges(p)) if inv is None else project_to_laplacian_weights(inv)
        if not is_connected(w, p):
            w = w + REPAIR_WEIGHT
        out.append(w)
    return out[0], out[1]


def _disconnected_factor(prob, w1, w2) -> int:
    for k, (w, p) in enumerate(((w1, prob.p1), (w2, prob.p2)), start=1):
        if not is_connected(w, p):
            return k
    # connected support but numerically singular spectrum: pick the weaker factor
    e1, e2 = prob.eig(w1, w2)
    f1 = e1.lam[1] if prob.p1 > 1 else np.inf
    f2 = e2.lam[1] if prob.p2 > 1 else np.inf
    return 1 if f1 <= f2 else 2


class _Iterate:
    __slots__ = ("w1", "w2", "eigs", "logdet", "inv", "f")

    def __init__(self, prob, w1, w2):
        self.w1, self.w2 = w1, w2
        self.eigs, self.logdet, self.inv = prob.evaluate(w1, w2)
        self.f = prob.combine(w1, w2, self.logdet)


def _evaluate(prob, w1, w2, iteration, eta):
    try:
        return _Iterate(prob, w1, w2)
    except DisconnectedGraph as exc:
        k = _disconnected_factor(prob, w1, w2)
        raise DisconnectedIterate(
            f"factor {k} became disconnected at iteration {iteration} "
            f"(eta={eta:g}); try a smaller step size",
            factor=k,
            iteration=iteration,
        ) from exc


def _slack(f):
    # objective changes below this are round-off, not increases
    return 1e-12 * max(1.0, abs(f))


class _Descent:
    """Projected gradient descent state shared by the complete and missing-data solvers."""

    def __init__(self, prob: _Problem, cfg: SolverConfig, w1, w2):
        self.prob = prob
        self.cfg = cfg
        self.eta = cfg.eta
        self.it = _evaluate(prob, w1, w2, 0, self.eta)
        self.trace = [self.it.f]
        self.increases = 0

    def update_covariances(self, S: ModeCovariances) -> None:
        """Swap in new mode covariances and re-score the current iterate."""
        self.prob.set_covariances(S)
        self.it.f = self.prob.combine(self.it.w1, self.it.w2, self.it.logdet)

    def step(self, iteration: int) -> float:
        """Advance one iteration; returns the infinity-norm weight change."""
        prob, cur = self.prob, self.it
        g1, g2 = prob.grad(cur.eigs, cur.inv)
        while True:
            w1 = _project_step(cur.w1, g1, self.eta)
            w2 = _project_step(cur.w2, g2, self.eta)
            if not self.cfg.backtracking:
                nxt = _evaluate(prob, w1, w2, iteration, self.eta)
                break
            try:
                nxt = _Iterate(prob, w1, w2)
                if nxt.f <= cur.f + _slack(cur.f):
                    break
            except DisconnectedGraph:
                pass
            self.eta /= 2
            if self.eta < MIN_ETA:
                raise StepTooLarge(
                    f"backtracking reduced the step below {MIN_ETA:g} at iteration {iteration}"
                )
        self.increases = self.increases + 1 if nxt.f > cur.f + _slack(cur.f) else 0
        if self.increases >= self.cfg.patience:
            raise StepTooLarge(
                f"objective increased for {self.increases} consecutive iterations "
                f"(eta={self.eta:g}); use a smaller step or enable backtracking"
            )
        self.it = nxt
        self.trace.append(nxt.f)
        return float(max(np.max(np.abs(w1 - cur.w1), initial=0.0),
                         np.max(np.abs(w2 - cur.w2), initial=0.0)))

    def config_record(self) -> dict:
        record = self.cfg.to_dict()
        record.update(p1=self.prob.p1, p2=self.prob.p2, eta_final=self.eta)
        return record


def mwgl_solve(data, cfg: SolverConfig = SolverConfig(), init=None) -> SolveResult:
    """Learn both factor graphs by projected gradient descent.

    ``data`` is either an ``(n, p1, p2)`` signal array or a precomputed
    :class:`ModeCovariances`. Iterates until the largest weight change is at
    most ``cfg.tol`` or ``cfg.max_iter`` steps have been taken.
    """
    if isinstance(data, ModeCovariances):
        S = _check_covariances(data)
    else:
        S = mode_covariances(data)
    prob = _Problem(S, cfg)
    w1, w2 = initialize_weights(S) if init is None else init
    w1 = _check_weights(w1, prob.p1, "w1").copy()
    w2 = _check_weights(w2, prob.p2, "w2").copy()
    if np.any(w1 < 0) or np.any(w2 < 0):
        raise InvalidInput("initial weights must be nonnegative")

    descent = _Descent(prob, cfg, w1, w2)
    converged = False
    iterations = 0
    for t in range(1, cfg.max_iter + 1):
        delta = descent.step(t)
        iterations = t
        if delta <= cfg.tol:
            converged = True
            break
    if not converged:
        logger.warning("no convergence after %d iterations", iterations)
    return SolveResult(
        w1=descent.it.w1,
        w2=descent.it.w2,
        objective_trace=descent.trace,
        iterations=iterations,
        converged=converged,
        config=descent.config_record(),
    )
