"""Seeded random factor graphs: Erdős-Rényi, Barabási-Albert, Watts-Strogatz, grid.

Every generator returns a binary weight vector (see :mod:`productgraph.graph`
for the ordering) of a connected graph. Random families are resampled until
connected, at most :data:`MAX_ATTEMPTS` times.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConnectivityFailure, InvalidInput
from .graph import edge_index, is_connected, n_edges

__all__ = [
    "FAMILIES",
    "GraphRecipe",
    "generate_topology",
    "assign_weights",
    "make_factor",
]

MAX_ATTEMPTS = 100
FAMILIES = ("erdos_renyi", "barabasi_albert", "watts_strogatz", "grid")

_DEFAULT_PARAMS = {
    "erdos_renyi": {"prob": 0.3},
    "barabasi_albert": {"m": 2},
    "watts_strogatz": {"k": 2, "rewire": 0.1},
    "grid": {},
}


@dataclass(frozen=True)
class GraphRecipe:
    family: str
    p: int | None = None
    rows: int | None = None
    cols: int | None = None
    params: dict = field(default_factory=dict)
    weight_low: float = 0.1
    weight_high: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInput(f"unknown graph family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "grid":
            if self.rows is None or self.cols is None:
                raise InvalidInput("grid recipes need rows and cols")
            if self.p is not None and self.p != self.rows * self.cols:
                raise InvalidInput("grid p must equal rows * cols")
            object.__setattr__(self, "p", self.rows * self.cols)
        if self.p is None or self.p < 2:
            raise InvalidInput("a recipe needs p >= 2")
        if not self.weight_low > 0 or self.weight_high < self.weight_low:
            raise InvalidInput("weights need 0 < weight_low <= weight_high")
        unknown = set(self.params) - set(_DEFAULT_PARAMS[self.family])
        if unknown:
            raise InvalidInput(f"unknown parameters for {self.family}: {sorted(unknown)}")

    def param(self, name):
        return self.params.get(name, _DEFAULT_PARAMS[self.family][name])

    @classmethod
    def from_dict(cls, data: dict, seed: int | None = None) -> "GraphRecipe":
        data = dict(data)
        if seed is not None:
            data["seed"] = seed
        keys = {"family", "p", "rows", "cols", "params", "weight_low", "weight_high", "seed"}
        extra = {k: data.pop(k) for k in list(data) if k not in keys}
        params = {**data.pop("params", {}), **extra}
        return cls(params=params, **data)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "rows": self.rows,
            "cols": self.cols,
            "params": dict(self.params),
            "weight_low": self.weight_low,
            "weight_high": self.weight_high,
            "seed": self.seed,
        }


def _to_vector(p, edges) -> np.ndarray:
    A = np.zeros((p, p))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    i, j = edge_index(p)
    return A[i, j]


def _erdos_renyi(p, rng, prob):
    if not 0 <= prob <= 1:
        raise InvalidInput("edge probability must lie in [0, 1]")
    return (rng.random(n_edges(p)) < prob).astype(float)


def _barabasi_albert(p, rng, m):
    if m < 1:
        raise InvalidInput("attachment count m must be >= 1")
    edges = [(1, 0)]
    degree = np.zeros(p)
    degree[:2] = 1
    for v in range(2, p):
        k = min(m, v)
        targets = rng.choice(v, size=k, replace=False, p=degree[:v] / degree[:v].sum())
        for u in targets:
            edges.append((v, int(u)))
            degree[u] += 1
        degree[v] = k
    return _to_vector(p, edges)


def _watts_strogatz(p, rng, k, rewire):
    if k < 2 or k % 2 or k >= p:
        raise InvalidInput("ring degree k must be even with 2 <= k < p")
    if not 0 <= rewire <= 1:
        raise InvalidInput("rewiring probability must lie in [0, 1]")
    adj = [set() for _ in range(p)]
    ring = []
    for u in range(p):
        for d in range(1, k // 2 + 1):
            v = (u + d) % p
            if v not in adj[u]:
                adj[u].add(v)
                adj[v].add(u)
                ring.append((u, v))
    for u, v in ring:
        if rng.random() >= rewire:
            continue
        choices = [x for x in range(p) if x != u and x not in adj[u]]
        if not choices:
            continue
        x = choices[rng.integers(len(choices))]
        adj[u].discard(v)
        adj[v].discard(u)
        adj[u].add(x)
        adj[x].add(u)
    return _to_vector(p, [(u, v) for u in range(p) for v in adj[u] if u > v])


def _grid(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                edges.append((node, node + 1))
            if r + 1 < rows:
                edges.append((node, node + cols))
    return _to_vector(rows * cols, edges)


def generate_topology(recipe: GraphRecipe) -> np.ndarray:
    """Binary edge indicator of a connected graph drawn from ``recipe``."""
    if recipe.family == "grid":
        topo = _grid(recipe.rows, recipe.cols)
        if not is_connected(topo, recipe.p):
            raise ConnectivityFailure("grid is not connected")
        return topo
    rng = np.random.default_rng(recipe.seed)
    for _ in range(MAX_ATTEMPTS):
        if recipe.family == "erdos_renyi":
            topo = _erdos_renyi(recipe.p, rng, recipe.param("prob"))
        elif recipe.family == "barabasi_albert":
            topo = _barabasi_albert(recipe.p, rng, recipe.param("m"))
        else:
            topo = _watts_strogatz(recipe.p, rng, recipe.param("k"), recipe.param("rewire"))
        if is_connected(topo, recipe.p):
            return topo
    raise ConnectivityFailure(
        f"no connected {recipe.family} graph on {recipe.p} nodes after {MAX_ATTEMPTS} attempts"
    )


def assign_weights(topology, low: float = 0.1, high: float = 2.0, seed=None) -> np.ndarray:
    """Replace each edge indicator by an independent ``Uniform(low, high)`` draw."""
    topology = np.asarray(topology, dtype=float)
    if not np.all((topology == 0) | (topology == 1)):
        raise InvalidInput("topology must be a 0/1 vector")
    if not low > 0 or high < low:
        raise InvalidInput("weights need 0 < low <= high")
    edges = topology == 1
    w = np.zeros_like(topology)
    if low == high:
        w[edges] = low
    else:
        w[edges] = np.random.default_rng(seed).uniform(low, high, size=int(edges.sum()))
    return w


def make_factor(recipe: GraphRecipe) -> np.ndarray:
    """Weighted factor graph; weights use a stream derived from ``recipe.seed``."""
    topo = generate_topology(recipe)
    return assign_weights(topo, recipe.weight_low, recipe.weight_high, seed=[recipe.seed, 1])
