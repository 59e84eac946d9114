"""Greedy score-based search over DAGs: hill climbing and tabu search."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..graphs import LabeledGraph
from ..io import DataMatrix
from ..scores import Scorer
from .common import check_cancel, reachability

ADD, DELETE, REVERSE = "add", "delete", "reverse"
_TYPE_RANK = {ADD: 0, DELETE: 1, REVERSE: 2}

# improvements below this are treated as float noise
EPS = 1e-9


@dataclass
class SearchResult:
    graph: LabeledGraph
    score: float
    trace: list[float] = field(default_factory=list)
    iterations: int = 0


def make_scorer(data: DataMatrix, score: str = "bdeu", ess: float = 1.0, am: float = 1.0,
                aw: float | None = None, scorer: Scorer | None = None) -> Scorer:
    return scorer if scorer is not None else Scorer(data, score, ess=ess, am=am, aw=aw)


def legal_masks(adj: np.ndarray, reach: np.ndarray, maxp: int | None = None) -> dict[str, np.ndarray]:
    """Boolean masks of the legal add, delete and reverse moves from a DAG."""
    a = adj.astype(bool)
    npar = a.sum(axis=0)
    add_ok = ~(a | a.T) & ~reach.T
    np.fill_diagonal(add_ok, False)
    if maxp is not None:
        add_ok &= (npar < maxp)[None, :]
    # reversing i->j is legal iff no other directed path i ~> j exists;
    # (a @ reach)[i, j] counts children c of i reaching j, c = j included
    paths = a.astype(np.int64) @ reach.astype(np.int64)
    rev_ok = a & (paths <= 1)
    if maxp is not None:
        rev_ok &= (npar < maxp)[:, None]
    return {ADD: add_ok, DELETE: a, REVERSE: rev_ok}


class MoveTable:
    """Local-score deltas of every single-edge move from a DAG.

    ``add[i, j]`` is the change from adding ``i -> j`` and ``delete[i, j]`` from
    removing it; reversing ``i -> j`` costs ``delete[i, j] + add[j, i]``.
    Columns are refreshed only for nodes whose parent set changed.
    """

    def __init__(self, scorer: Scorer, adj: np.ndarray, maxp: int | None = None):
        self.scorer = scorer
        self.p = adj.shape[0]
        self.adj = adj.astype(np.int8).copy()
        self.maxp = maxp
        self.local = np.zeros(self.p)
        self.add = np.full((self.p, self.p), -np.inf)
        self.delete = np.full((self.p, self.p), -np.inf)
        for j in range(self.p):
            self._refresh(j)
        self.reach = reachability(self.adj)

    def _refresh(self, j: int) -> None:
        pa = set(np.nonzero(self.adj[:, j])[0].tolist())
        base = self.scorer.local(j, pa)
        self.local[j] = base
        for i in range(self.p):
            if i == j:
                continue
            if i in pa:
                self.delete[i, j] = self.scorer.local(j, pa - {i}) - base
                self.add[i, j] = -np.inf
            else:
                self.add[i, j] = self.scorer.local(j, pa | {i}) - base
                self.delete[i, j] = -np.inf

    @property
    def score(self) -> float:
        return float(self.local.sum())

    def legal(self) -> dict[str, np.ndarray]:
        return legal_masks(self.adj, self.reach, self.maxp)

    def deltas(self) -> dict[str, np.ndarray]:
        return {ADD: self.add, DELETE: self.delete, REVERSE: self.delete + self.add.T}

    def candidates(self) -> list[tuple[float, str, int, int]]:
        """All legal moves sorted best-first; ties by (type, i, j)."""
        legal = self.legal()
        deltas = self.deltas()
        out = []
        for kind in (ADD, DELETE, REVERSE):
            rows, cols = np.nonzero(legal[kind])
            vals = deltas[kind][rows, cols]
            out.extend(zip(vals.tolist(), [kind] * len(rows), rows.tolist(), cols.tolist()))
        out.sort(key=lambda m: (-m[0], _TYPE_RANK[m[1]], m[2], m[3]))
        return out

    def best(self) -> tuple[float, str, int, int] | None:
        legal = self.legal()
        deltas = self.deltas()
        best = None
        for kind in (ADD, DELETE, REVERSE):
            masked = np.where(legal[kind], deltas[kind], -np.inf)
            if not np.isfinite(masked).any():
                continue
            top = masked.max()
            # row-major argmax gives the smallest (i, j) among ties
            i, j = np.unravel_index(int(np.argmax(masked == top)), masked.shape)
            if best is None or top > best[0]:
                best = (float(top), kind, int(i), int(j))
        return best

    def resulting(self, kind: str, i: int, j: int) -> np.ndarray:
        adj = self.adj.copy()
        if kind == ADD:
            adj[i, j] = 1
        elif kind == DELETE:
            adj[i, j] = 0
        else:
            adj[i, j] = 0
            adj[j, i] = 1
        return adj

    def apply(self, kind: str, i: int, j: int) -> None:
        self.adj = self.resulting(kind, i, j)
        self._refresh(j)
        if kind == REVERSE:
            self._refresh(i)
        self.reach = reachability(self.adj)


def _search(data, labels, scorer, maxp, tabu_len, stagnation_max, cancel) -> SearchResult:
    p = len(labels)
    table = MoveTable(scorer, np.zeros((p, p), dtype=np.int8), maxp)
    current = table.score
    best_adj, best_score = table.adj.copy(), current
    trace = [current]
    tabu_list: deque[bytes] = deque([table.adj.tobytes()], maxlen=tabu_len) if tabu_len else deque(maxlen=0)
    stagnant = 0
    iterations = 0
    while True:
        check_cancel(cancel)
        if tabu_len:
            move = None
            for cand in table.candidates():
                if table.resulting(*cand[1:]).tobytes() not in tabu_list:
                    move = cand
                    break
        else:
            move = table.best()
        if move is None:
            break
        delta, kind, i, j = move
        improving = current + delta > best_score + EPS
        if not improving:
            if stagnant >= stagnation_max:
                break
            stagnant += 1
        else:
            stagnant = 0
        table.apply(kind, i, j)
        iterations += 1
        current = table.score
        trace.append(current)
        if tabu_len:
            tabu_list.append(table.adj.tobytes())
        if current > best_score + EPS:
            best_adj, best_score = table.adj.copy(), current
    return SearchResult(LabeledGraph(labels, best_adj), best_score, trace, iterations)


def hill_climb(data: DataMatrix, score: str = "bdeu", ess: float = 1.0, am: float = 1.0,
               aw: float | None = None, maxp: int | None = None, scorer: Scorer | None = None,
               cancel: threading.Event | None = None) -> SearchResult:
    """Greedy search from the empty DAG.

    Each step applies the best strictly improving add, delete or reverse move
    (ties broken by the smallest ``(type, i, j)``) and stops at a local optimum.
    """
    scorer = make_scorer(data, score, ess, am, aw, scorer)
    return _search(data, data.labels, scorer, maxp, 0, 0, cancel)


def tabu(data: DataMatrix, score: str = "bdeu", ess: float = 1.0, am: float = 1.0,
         aw: float | None = None, tabu_len: int = 10, stagnation_max: int = 10,
         maxp: int | None = None, scorer: Scorer | None = None,
         cancel: threading.Event | None = None) -> SearchResult:
    """Hill climbing that keeps moving through non-improving steps.

    Moves leading back to one of the last ``tabu_len`` visited graphs are
    forbidden. The search ends after ``stagnation_max`` consecutive moves
    that fail to beat the best score so far, and returns the best DAG seen.
    """
    scorer = make_scorer(data, score, ess, am, aw, scorer)
    return _search(data, data.labels, scorer, maxp, tabu_len, stagnation_max, cancel)
