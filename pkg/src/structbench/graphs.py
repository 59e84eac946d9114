"""Graph representations and structural transforms.

A graph is stored as a labelled 0/1 adjacency matrix. The entry pair
``(adj[i, j], adj[j, i])`` encodes the edge kind between nodes ``i`` and ``j``:

* ``(1, 0)``: directed edge ``i -> j``
* ``(1, 1)``: undirected edge ``i - j``
* ``(0, 0)``: no edge

This is the same layout as the adjacency-matrix CSV files, so serialization is
a direct dump of the matrix.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class EdgeKind(enum.Enum):
    ABSENT = 0
    DIRECTED = 1
    UNDIRECTED = 2


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Immutable labelled adjacency matrix.

    Parameters
    ----------
    labels : sequence of str
        Node names, unique.
    adj : array_like of shape (p, p)
        0/1 matrix. Copied and made read-only on construction.
    """

    labels: tuple[str, ...]
    adj: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        adj = np.array(self.adj, dtype=np.int8, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError(f"adjacency matrix must be square, got shape {adj.shape}")
        if adj.shape[0] != len(labels):
            raise GraphError(f"{len(labels)} labels for a {adj.shape[0]}-node matrix")
        if len(set(labels)) != len(labels):
            raise GraphError("node labels must be unique")
        if not np.isin(adj, (0, 1)).all():
            raise GraphError("adjacency entries must be 0 or 1")
        if np.any(np.diag(adj)):
            raise GraphError("adjacency matrix must have a zero diagonal")
        adj.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "adj", adj)

    @classmethod
    def empty(cls, labels: Sequence[str]) -> "LabeledGraph":
        p = len(labels)
        return cls(tuple(labels), np.zeros((p, p), dtype=np.int8))

    @classmethod
    def from_edges(
        cls,
        labels: Sequence[str],
        directed: Iterable[tuple[str, str]] = (),
        undirected: Iterable[tuple[str, str]] = (),
    ) -> "LabeledGraph":
        index = {name: k for k, name in enumerate(labels)}
        adj = np.zeros((len(labels), len(labels)), dtype=np.int8)
        for a, b in directed:
            adj[index[a], index[b]] = 1
        for a, b in undirected:
            adj[index[a], index[b]] = adj[index[b], index[a]] = 1
        return cls(tuple(labels), adj)

    @property
    def p(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.labels, self.adj.tobytes()))

    def __repr__(self):
        parts = [f"{self.labels[i]}->{self.labels[j]}" for i, j in self.directed_edges()]
        parts += [f"{self.labels[i]}-{self.labels[j]}" for i, j in self.undirected_edges()]
        return f"LabeledGraph({', '.join(parts) or 'empty'}; p={self.p})"

    def kind(self, i: int, j: int) -> EdgeKind:
        a, b = self.adj[i, j], self.adj[j, i]
        if a and b:
            return EdgeKind.UNDIRECTED
        if a or b:
            return EdgeKind.DIRECTED
        return EdgeKind.ABSENT

    def directed_edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero((self.adj == 1) & (self.adj.T == 0))
        return list(zip(rows.tolist(), cols.tolist()))

    def undirected_edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adj & self.adj.T, 1))
        return list(zip(rows.tolist(), cols.tolist()))

    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adj | self.adj.T, 1)))

    def parents(self, j: int) -> list[int]:
        return [i for i in range(self.p) if self.adj[i, j] and not self.adj[j, i]]

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j] or self.adj[j, i])

    def with_adj(self, adj: np.ndarray) -> "LabeledGraph":
        return LabeledGraph(self.labels, adj)

    def relabel(self, order: Sequence[int]) -> "LabeledGraph":
        """Return the graph with nodes permuted so new node k is old node order[k]."""
        order = list(order)
        return LabeledGraph(tuple(self.labels[k] for k in order), self.adj[np.ix_(order, order)])


def skeleton(g: LabeledGraph) -> LabeledGraph:
    return g.with_adj(g.adj | g.adj.T)


def _has_directed_cycle(adj: np.ndarray) -> bool:
    # Kahn's algorithm on the directed part only.
    directed = (adj == 1) & (adj.T == 0)
    indeg = directed.sum(axis=0)
    stack = [v for v in range(adj.shape[0]) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in np.nonzero(directed[v])[0]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(int(w))
    return seen != adj.shape[0]


def is_dag(g: LabeledGraph) -> bool:
    if np.any(g.adj & g.adj.T):
        return False
    return not _has_directed_cycle(g.adj)


def has_directed_cycle(g: LabeledGraph) -> bool:
    """Cycle check on the directed part of a partially directed graph."""
    return _has_directed_cycle(g.adj)


def topological_order(g: LabeledGraph) -> list[int]:
    """Topological order of a DAG; ties broken by smallest node index."""
    if not is_dag(g):
        raise GraphError("graph is not a DAG")
    adj = g.adj
    indeg = adj.sum(axis=0).astype(int)
    ready = sorted(v for v in range(g.p) if indeg[v] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in np.nonzero(adj[v])[0]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
        ready.sort()
    return order


def v_structures(g: LabeledGraph) -> set[tuple[int, int, int]]:
    """Unshielded colliders ``i -> k <- j`` as triples ``(i, k, j)`` with ``i < j``."""
    adj = g.adj
    directed = (adj == 1) & (adj.T == 0)
    out = set()
    for k in range(g.p):
        pa = np.nonzero(directed[:, k])[0]
        for i, j in itertools.combinations(pa.tolist(), 2):
            if not (adj[i, j] or adj[j, i]):
                out.add((i, k, j))
    return out


def pattern_graph(g: LabeledGraph) -> LabeledGraph:
    """Skeleton of a DAG with only the v-structure arrows kept directed."""
    if not is_dag(g):
        raise GraphError("pattern_graph requires a DAG")
    adj = g.adj | g.adj.T
    for i, k, j in v_structures(g):
        adj[k, i] = 0
        adj[k, j] = 0
    return g.with_adj(adj)


def meek_closure(adj: np.ndarray) -> np.ndarray:
    """Apply Meek's orientation rules R1-R4 until nothing changes.

    Works on a copy of a partially directed adjacency matrix. Rules are tried
    in node-index order; the fixpoint itself does not depend on that order.
    """
    a = np.array(adj, dtype=np.int8, copy=True)
    p = a.shape[0]

    def und(x, y):
        return a[x, y] == 1 and a[y, x] == 1

    def dire(x, y):
        return a[x, y] == 1 and a[y, x] == 0

    def adjc(x, y):
        return a[x, y] == 1 or a[y, x] == 1

    changed = True
    while changed:
        changed = False
        for x in range(p):
            for y in range(p):
                if x == y or not und(x, y):
                    continue
                orient = False
                # R1: z -> x - y, z and y non-adjacent
                for z in range(p):
                    if z != y and dire(z, x) and not adjc(z, y):
                        orient = True
                        break
                # R2: x -> z -> y with x - y
                if not orient:
                    for z in range(p):
                        if dire(x, z) and dire(z, y):
                            orient = True
                            break
                # R3: x - z1 -> y, x - z2 -> y, z1 and z2 non-adjacent
                if not orient:
                    zs = [z for z in range(p) if und(x, z) and dire(z, y)]
                    for z1, z2 in itertools.combinations(zs, 2):
                        if not adjc(z1, z2):
                            orient = True
                            break
                # R4: x - y, c -> d -> y, x adjacent to c and d, c and y non-adjacent
                if not orient:
                    for d in range(p):
                        if not (dire(d, y) and adjc(x, d)):
                            continue
                        for c in range(p):
                            if c not in (x, y) and dire(c, d) and adjc(x, c) and not adjc(c, y):
                                orient = True
                                break
                        if orient:
                            break
                if orient:
                    a[y, x] = 0
                    changed = True
    return a


def cpdag(g: LabeledGraph) -> LabeledGraph:
    """Essential graph (CPDAG) of the Markov equivalence class of a DAG."""
    pat = pattern_graph(g)
    return g.with_adj(meek_closure(pat.adj))


def _undirected_adjacency(g: LabeledGraph) -> list[set[int]]:
    if np.any(g.adj != g.adj.T):
        raise GraphError("chordality is only defined for undirected graphs")
    return [set(np.nonzero(g.adj[v])[0].tolist()) for v in range(g.p)]


def max_cardinality_search(g: LabeledGraph) -> list[int]:
    """Maximum-cardinality search order (first visited first)."""
    nbrs = _undirected_adjacency(g)
    weight = [0] * g.p
    unvisited = set(range(g.p))
    order = []
    while unvisited:
        v = max(unvisited, key=lambda u: (weight[u], -u))
        unvisited.remove(v)
        order.append(v)
        for w in nbrs[v]:
            if w in unvisited:
                weight[w] += 1
    return order


def is_chordal(g: LabeledGraph) -> bool:
    """True iff the undirected graph is chordal (decomposable).

    Uses the reverse of a maximum-cardinality search order as a candidate
    perfect elimination ordering and verifies it (Tarjan & Yannakakis).
    """
    nbrs = _undirected_adjacency(g)
    order = max_cardinality_search(g)
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        earlier = [w for w in nbrs[v] if pos[w] < pos[v]]
        if not earlier:
            continue
        # the latest earlier neighbour must be adjacent to all other earlier ones
        u = max(earlier, key=pos.__getitem__)
        if any(w != u and w not in nbrs[u] for w in earlier):
            return False
    return True
