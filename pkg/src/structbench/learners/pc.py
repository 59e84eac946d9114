"""PC algorithm with the order-independent ("stable") adjacency search."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

import numpy as np

from ..citests import G2, CITestError, FisherZ
from ..graphs import LabeledGraph, meek_closure
from ..io import DataMatrix
from .common import check_cancel

_TESTS = {
    "fisher_z": FisherZ,
    "fisherz": FisherZ,
    "gaussCItest": FisherZ,
    "g2": G2,
    "binCItest": G2,
    "disCItest": G2,
}


@dataclass
class PCResult:
    graph: LabeledGraph
    ntests: int
    sepsets: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)
    conflicts: int = 0


def make_test(name: str, data: DataMatrix):
    try:
        cls = _TESTS[name]
    except KeyError:
        raise CITestError(f"unknown independence test {name!r}") from None
    return cls(data)


def pc(data: DataMatrix, test: str = "fisher_z", alpha: float = 0.01,
       max_cond: int | None = None, cancel: threading.Event | None = None) -> PCResult:
    """Estimate a CPDAG by the PC algorithm.

    Columns are processed in sorted-label order, so the output does not
    depend on the column order of ``data``. Conflicting v-structure
    orientations are resolved in favour of the later triple and counted.
    """
    order = sorted(range(data.p), key=lambda k: data.labels[k])
    labels = [data.labels[k] for k in order]
    perm_data = DataMatrix(labels, data.values[:, order], None if data.cardinalities is None
                           else [data.cardinalities[k] for k in order])
    ci = make_test(test, perm_data)
    p = perm_data.p

    adj = np.ones((p, p), dtype=bool)
    np.fill_diagonal(adj, False)
    sepset: dict[tuple[int, int], tuple[int, ...]] = {}
    ntests = 0
    level = 0
    while max_cond is None or level <= max_cond:
        snapshot = [np.nonzero(adj[i])[0].tolist() for i in range(p)]
        if all(len(snapshot[i]) - 1 < level for i in range(p) if snapshot[i]):
            break
        for i in range(p):
            for j in snapshot[i]:
                if not adj[i, j]:
                    continue
                others = [k for k in snapshot[i] if k != j]
                if len(others) < level:
                    continue
                for cond in itertools.combinations(others, level):
                    check_cancel(cancel)
                    ntests += 1
                    if ci(i, j, cond, alpha).independent:
                        adj[i, j] = adj[j, i] = False
                        sepset[(min(i, j), max(i, j))] = cond
                        break
        level += 1

    pdag = adj.astype(np.int8)
    conflicts = 0
    for k in range(p):
        nb = np.nonzero(adj[k])[0].tolist()
        for i, j in itertools.combinations(nb, 2):
            if adj[i, j] or k in sepset.get((i, j), ()):
                continue
            for a in (i, j):
                if pdag[k, a] == 1 and pdag[a, k] == 0:
                    conflicts += 1
                pdag[a, k] = 1
                pdag[k, a] = 0
    pdag = meek_closure(pdag)

    back = np.argsort(order)
    graph = LabeledGraph(tuple(labels), pdag).relabel(back.tolist())
    named = {(labels[i], labels[j]): tuple(labels[c] for c in s) for (i, j), s in sepset.items()}
    return PCResult(graph, ntests, named, conflicts)
