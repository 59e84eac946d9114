"""Metropolis-Hastings structure MCMC over DAGs."""

from __future__ import annotations

import math
import threading

import numpy as np

from ..io import DataMatrix, GraphTrajectory, TrajectoryRecord
from ..scores import Scorer
from .common import check_cancel, reachability
from .search import ADD, DELETE, REVERSE, MoveTable, legal_masks, make_scorer


class _MoveLists:
    """Legal-move lists keyed by graph; small chains revisit the same graphs often."""

    def __init__(self, maxp, limit=100_000):
        self.maxp = maxp
        self.limit = limit
        self._store: dict[bytes, list[tuple[str, int, int]]] = {}

    def __call__(self, adj: np.ndarray, reach: np.ndarray | None = None):
        key = adj.tobytes()
        hit = self._store.get(key)
        if hit is None:
            masks = legal_masks(adj, reachability(adj) if reach is None else reach, self.maxp)
            hit = []
            for kind in (ADD, DELETE, REVERSE):
                rows, cols = np.nonzero(masks[kind])
                hit.extend(zip([kind] * len(rows), rows.tolist(), cols.tolist()))
            if len(self._store) >= self.limit:
                self._store.clear()
            self._store[key] = hit
        return hit


def structure_mcmc(data: DataMatrix, M: int, seed, score: str = "bdeu", ess: float = 1.0,
                   am: float = 1.0, aw: float | None = None, maxp: int | None = None,
                   scorer: Scorer | None = None,
                   cancel: threading.Event | None = None) -> GraphTrajectory:
    """Sample DAGs with single-edge add/delete/reverse proposals.

    A move is drawn uniformly from the legal moves of the current graph and
    accepted with probability ``min(1, exp(delta) * |moves(G)| / |moves(G')|)``.
    The chain starts from the empty DAG and only accepted moves are recorded,
    each with the score of the graph after the move.
    """
    if M < 0:
        raise ValueError("number of iterations must be non-negative")
    scorer = make_scorer(data, score, ess, am, aw, scorer)
    p = data.p
    rng = np.random.default_rng(seed)
    table = MoveTable(scorer, np.zeros((p, p), dtype=np.int8), maxp)
    records = [TrajectoryRecord(0, table.score, [], [])]
    moves_of = _MoveLists(maxp)
    current = moves_of(table.adj, table.reach)
    for it in range(1, M + 1):
        if it % 256 == 0:
            check_cancel(cancel)
        if not current:
            continue
        kind, i, j = current[int(rng.integers(len(current)))]
        u = rng.random()
        if kind == ADD:
            delta = table.add[i, j]
        elif kind == DELETE:
            delta = table.delete[i, j]
        else:
            delta = table.delete[i, j] + table.add[j, i]
        n_proposed = len(moves_of(table.resulting(kind, i, j)))
        log_ratio = delta + math.log(len(current)) - math.log(n_proposed)
        if log_ratio >= 0 or u < math.exp(log_ratio):
            table.apply(kind, i, j)
            current = moves_of(table.adj, table.reach)
            if kind == ADD:
                rec = TrajectoryRecord(it, table.score, [(i, j)], [])
            elif kind == DELETE:
                rec = TrajectoryRecord(it, table.score, [], [(i, j)])
            else:
                rec = TrajectoryRecord(it, table.score, [(j, i)], [(i, j)])
            records.append(rec)
    return GraphTrajectory(data.labels, records, directed=True, length=M)
