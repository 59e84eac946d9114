"""Ground-truth graph generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import LabeledGraph


@dataclass(frozen=True)
class RandDagSpec:
    """Erdos-Renyi DAG with an optional cap on parents per node.

    ``par1``/``par2`` exist for config compatibility and must be None for the
    "er" method.
    """

    n: int
    d: float
    max_parents: int | None = None
    method: str = "er"
    seed: int = 0
    par1: object = None
    par2: object = None

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.d < 0 or (self.n > 1 and self.d > self.n - 1) or (self.n == 1 and self.d > 0):
            raise ValueError(f"d must lie in [0, n-1], got {self.d}")
        if self.max_parents is not None and (int(self.max_parents) != self.max_parents or self.max_parents < 0):
            raise ValueError(f"max_parents must be a non-negative integer, got {self.max_parents}")
        if self.method != "er":
            raise ValueError(f"unsupported randdag method {self.method!r}; only 'er' is available")
        if self.par1 is not None or self.par2 is not None:
            raise ValueError("par1/par2 have no meaning for method 'er' and must be null")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class BandSpec:
    p: int
    bandwidth: int
    seed: int = 0

    def validate(self):
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.bandwidth < 0 or self.bandwidth > self.p - 1:
            raise ValueError(f"bandwidth must lie in [0, p-1], got {self.bandwidth}")


def _labels(n):
    return tuple(str(k) for k in range(1, n + 1))


def gen_rand_dag(spec: RandDagSpec) -> LabeledGraph:
    """Random DAG: ER skeleton oriented along a random permutation, then parent-capped.

    Each unordered pair is an edge with probability ``d / (n - 1)``. Edges
    point from the earlier to the later node of a uniform random permutation.
    Nodes with more than ``max_parents`` parents lose a uniformly chosen
    subset of their in-edges.
    """
    spec.validate()
    n = int(spec.n)
    rng = np.random.default_rng(int(spec.seed))
    prob = spec.d / (n - 1) if n > 1 else 0.0
    upper = np.triu(rng.random((n, n)) < prob, 1)
    perm = rng.permutation(n)
    # node perm[k] takes position k in the causal order
    adj = np.zeros((n, n), dtype=np.int8)
    rows, cols = np.nonzero(upper)
    adj[perm[rows], perm[cols]] = 1
    if spec.max_parents is not None:
        cap = int(spec.max_parents)
        for j in range(n):
            pa = np.nonzero(adj[:, j])[0]
            if len(pa) > cap:
                drop = rng.choice(pa, size=len(pa) - cap, replace=False)
                adj[drop, j] = 0
    return LabeledGraph(_labels(n), adj)


def gen_bandmat(spec: BandSpec) -> LabeledGraph:
    spec.validate()
    idx = np.arange(spec.p)
    dist = np.abs(idx[:, None] - idx[None, :])
    adj = ((dist > 0) & (dist <= spec.bandwidth)).astype(np.int8)
    return LabeledGraph(_labels(spec.p), adj)


def gen_rand_bandmat(spec: BandSpec) -> LabeledGraph:
    """Band graph where node i reaches forward ``b_i ~ Unif{0..max_bandwidth}`` steps.

    ``spec.bandwidth`` is the maximum width. Each node's forward
    neighbourhood is a contiguous run, which keeps the graph chordal.
    """
    spec.validate()
    p = spec.p
    rng = np.random.default_rng(int(spec.seed))
    widths = rng.integers(0, spec.bandwidth, size=p, endpoint=True)
    adj = np.zeros((p, p), dtype=np.int8)
    for i in range(p):
        for j in range(i + 1, min(p, i + widths[i] + 1)):
            adj[i, j] = adj[j, i] = 1
    return LabeledGraph(_labels(p), adj)
