"""Decomposable marginal-likelihood scores: BDeu (discrete) and BGe (Gaussian)."""

from __future__ import annotations

import hashlib
import math
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from .io import DataMatrix
from .modelgen import config_index


class ScoreError(ValueError):
    pass


def data_fingerprint(data: DataMatrix) -> str:
    h = hashlib.sha256()
    h.update("\x1f".join(data.labels).encode())
    h.update(repr(data.cardinalities).encode())
    h.update(np.ascontiguousarray(data.values).tobytes())
    return h.hexdigest()


class ScoreCache:
    """Insert-only map from ``(node, parents)`` to local score for one dataset.

    Plain dict reads and writes are atomic under the GIL, so sharing an
    instance between threads is safe; two workers may compute the same entry
    twice, which only costs time.
    """

    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        self._store: dict[tuple[int, frozenset], float] = {}
        self.hits = 0
        self.misses = 0

    def get(self, key):
        value = self._store.get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, key, value: float) -> None:
        self._store.setdefault(key, value)

    def __len__(self):
        return len(self._store)


def bdeu_local(data: DataMatrix, node: int, parents: Iterable[int], ess: float) -> float:
    """BDeu log marginal likelihood of ``node`` given ``parents``."""
    parents = sorted(parents)
    if ess <= 0:
        raise ScoreError(f"equivalent sample size must be positive, got {ess}")
    if node in parents:
        raise ScoreError("a node cannot be its own parent")
    if not data.categorical:
        raise ScoreError("BDeu needs categorical data")
    if data.n == 0:
        return 0.0
    card = data.cardinalities
    r = card[node]
    q = int(np.prod([card[k] for k in parents])) if parents else 1
    cfg = config_index(data.values[:, parents], [card[k] for k in parents])
    counts = np.bincount(cfg * r + data.values[:, node], minlength=q * r).reshape(q, r)
    n_j = counts.sum(axis=1)
    a_j = ess / q
    a_jk = ess / (q * r)
    # unobserved configurations contribute exactly zero
    seen = n_j > 0
    score = np.sum(gammaln(a_j) - gammaln(a_j + n_j[seen]))
    score += np.sum(gammaln(a_jk + counts[seen]) - gammaln(a_jk))
    return float(score)


class BGeStats:
    """Sufficient statistics and hyperparameters for BGe scoring of one dataset.

    Prior: zero mean vector, ``am`` pseudo-observations for the mean, ``aw``
    Wishart degrees of freedom and scale ``T0 = t I`` with
    ``t = am (aw - p - 1) / (am + 1)``.
    """

    def __init__(self, data: DataMatrix, am: float = 1.0, aw: float | None = None):
        if data.categorical:
            raise ScoreError("BGe needs continuous data")
        n, p = data.values.shape
        if n < 1:
            raise ScoreError("BGe needs at least one observation")
        aw = p + 2.0 if aw is None else float(aw)
        if aw <= p - 1:
            raise ScoreError(f"aw must exceed p - 1 = {p - 1}, got {aw}")
        if am <= 0:
            raise ScoreError(f"am must be positive, got {am}")
        x = data.values
        xbar = x.mean(axis=0)
        centered = x - xbar
        s_n = centered.T @ centered
        t = am * (aw - p - 1) / (am + 1)
        # posterior scale; prior mean is zero
        self.t0 = t
        self.tn = t * np.eye(p) + s_n + (am * n / (am + n)) * np.outer(xbar, xbar)
        self.n, self.p, self.am, self.aw = n, p, float(am), aw
        self._cache: dict[frozenset, float] = {frozenset(): 0.0}

    def log_marginal(self, subset: Iterable[int]) -> float:
        """Log marginal likelihood of the data restricted to ``subset``."""
        key = frozenset(subset)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        idx = sorted(key)
        l = len(idx)
        n, p, am, aw = self.n, self.p, self.am, self.aw
        sign, logdet = np.linalg.slogdet(self.tn[np.ix_(idx, idx)])
        if sign <= 0:
            raise ScoreError("posterior scale matrix is singular")
        a_prior = (aw - p + l) / 2.0
        a_post = (aw - p + l + n) / 2.0
        j = np.arange(l)
        value = (
            -0.5 * l * n * math.log(math.pi)
            + 0.5 * l * math.log(am / (am + n))
            + float(np.sum(gammaln(a_post - j / 2.0) - gammaln(a_prior - j / 2.0)))
            + a_prior * l * math.log(self.t0)
            - a_post * logdet
        )
        self._cache[key] = value
        return value


def bge_local(data: DataMatrix, node: int, parents: Iterable[int], am: float = 1.0,
              aw: float | None = None, stats: BGeStats | None = None) -> float:
    parents = frozenset(parents)
    if node in parents:
        raise ScoreError("a node cannot be its own parent")
    stats = stats or BGeStats(data, am, aw)
    return stats.log_marginal(parents | {node}) - stats.log_marginal(parents)


class Scorer:
    """Cached local scores for one dataset and one score function.

    Parameters
    ----------
    data : DataMatrix
    score : {"bdeu", "bde", "bge"}
        "bde" is accepted as an alias of "bdeu".
    ess : float
        BDeu equivalent sample size.
    am, aw : float
        BGe hyperparameters; ``aw`` defaults to ``p + 2``.
    """

    def __init__(self, data: DataMatrix, score: str = "bdeu", ess: float = 1.0,
                 am: float = 1.0, aw: float | None = None, cache: ScoreCache | None = None):
        score = score.lower()
        if score == "bde":
            score = "bdeu"
        if score not in ("bdeu", "bge"):
            raise ScoreError(f"unknown score {score!r}")
        if score == "bdeu" and not data.categorical:
            raise ScoreError("BDeu needs categorical data")
        if score == "bge" and data.categorical:
            raise ScoreError("BGe needs continuous data")
        self.data = data
        self.score = score
        self.ess = ess
        self._bge = BGeStats(data, am, aw) if score == "bge" else None
        self.cache = cache or ScoreCache(data_fingerprint(data))

    @property
    def p(self) -> int:
        return self.data.p

    def local(self, node: int, parents) -> float:
        key = (node, frozenset(parents))
        value = self.cache.get(key)
        if value is None:
            if self.score == "bdeu":
                value = bdeu_local(self.data, node, key[1], self.ess)
            else:
                value = bge_local(self.data, node, key[1], stats=self._bge)
            self.cache.put(key, value)
        return value

    def total(self, adj: np.ndarray) -> float:
        """Sum of local scores of a DAG given by its adjacency matrix."""
        return float(sum(self.local(j, np.nonzero(adj[:, j])[0].tolist()) for j in range(adj.shape[0])))
