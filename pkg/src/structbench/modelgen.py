"""Parameter samplers for a given DAG and i.i.d. data simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import GraphError, LabeledGraph, is_dag, topological_order
from .io import DataMatrix


@dataclass(frozen=True, eq=False)
class DiscreteBN:
    """Discrete Bayesian network.

    ``cpts[j]`` has shape ``(q_j, r_j)``: one probability row per parent
    configuration. Parents are taken in increasing node index and the
    configuration index is mixed-radix with the first parent most
    significant.
    """

    graph: LabeledGraph
    cardinalities: tuple[int, ...]
    cpts: tuple[np.ndarray, ...]

    def parents(self, j: int) -> list[int]:
        return self.graph.parents(j)


@dataclass(frozen=True, eq=False)
class GaussianSEM:
    """Linear Gaussian SEM.

    ``weights[i, j]`` is the coefficient of parent ``i`` in the equation of
    node ``j`` (the adjacency-matrix orientation), so the nonzero pattern of
    ``weights`` equals the DAG's adjacency matrix.
    """

    graph: LabeledGraph
    weights: np.ndarray
    noise_mean: float = 0.0
    noise_sd: float = 1.0

    def implied_covariance(self) -> np.ndarray:
        p = self.graph.p
        inv = np.linalg.inv(np.eye(p) - self.weights.T)
        return self.noise_sd**2 * inv @ inv.T


def _require_dag(g):
    if not is_dag(g):
        raise GraphError("parameters can only be sampled for a DAG")


def config_index(values: np.ndarray, cards) -> np.ndarray:
    """Mixed-radix index of parent configurations, one per row of ``values``."""
    idx = np.zeros(values.shape[0], dtype=np.int64)
    for col, c in zip(values.T, cards):
        idx = idx * int(c) + col
    return idx


def sample_bin_bn(g: LabeledGraph, a: float, b: float, seed) -> DiscreteBN:
    """Binary BN with ``P(node = 0 | config) ~ Unif[a, b]`` per configuration."""
    _require_dag(g)
    if not (0 <= a < b <= 1):
        raise ValueError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    rng = np.random.default_rng(seed)
    cpts = []
    for j in range(g.p):
        q = 2 ** len(g.parents(j))
        p0 = rng.uniform(a, b, size=q)
        cpts.append(np.column_stack([p0, 1.0 - p0]))
    return DiscreteBN(g, (2,) * g.p, tuple(cpts))


def sample_sem_params(g: LabeledGraph, a: float, b: float, seed) -> GaussianSEM:
    """Weights ``Unif[a, b] * Unif{-1, 1}`` on edges, zero elsewhere."""
    _require_dag(g)
    if not (0 <= a < b):
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    rng = np.random.default_rng(seed)
    rows, cols = np.nonzero(g.adj)
    mags = rng.uniform(a, b, size=len(rows))
    signs = rng.choice(np.array([-1.0, 1.0]), size=len(rows))
    w = np.zeros((g.p, g.p))
    w[rows, cols] = mags * signs
    return GaussianSEM(g, w)


def sample_iid_discrete(model: DiscreteBN, n: int, seed) -> DataMatrix:
    """Ancestral sampling of ``n`` rows."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = model.graph
    rng = np.random.default_rng(seed)
    x = np.zeros((n, g.p), dtype=np.int64)
    for j in topological_order(g):
        pa = model.parents(j)
        cfg = config_index(x[:, pa], [model.cardinalities[k] for k in pa])
        probs = model.cpts[j][cfg]
        u = rng.random(n)
        # inverse-CDF draw per row
        x[:, j] = (u[:, None] >= np.cumsum(probs, axis=1)[:, :-1]).sum(axis=1)
    return DataMatrix(g.labels, x, model.cardinalities)


def sample_iid_gaussian(model: GaussianSEM, n: int, standardized: bool, seed) -> DataMatrix:
    """Solve the SEM in topological order; optionally standardize each column.

    Standardization uses the (n - 1) sample standard deviation.
    """
    if n < 1 or (standardized and n < 2):
        raise ValueError("need n >= 1, and n >= 2 when standardizing")
    g = model.graph
    rng = np.random.default_rng(seed)
    noise = rng.normal(model.noise_mean, model.noise_sd, size=(n, g.p))
    x = np.zeros((n, g.p))
    for j in topological_order(g):
        pa = np.nonzero(model.weights[:, j])[0]
        x[:, j] = x[:, pa] @ model.weights[pa, j] + noise[:, j]
    if standardized:
        sd = x.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise ValueError("cannot standardize a zero-variance column")
        x = (x - x.mean(axis=0)) / sd
    return DataMatrix(g.labels, x)
