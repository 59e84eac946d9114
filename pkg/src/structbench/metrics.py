"""Comparison of an estimated graph against the true graph.

Mixed graphs are handled edge-pair by edge-pair. For every unordered pair
adjacent in the estimate:

* same kind and direction as in the truth: TP 1
* adjacent in the truth with another orientation: TP 1/2, FP 1/2
* not adjacent in the truth: FP 1

Pairs adjacent in the truth but not in the estimate count as FN. With these
definitions ``SHD = P - TP + FP`` holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import LabeledGraph


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ComparisonScores:
    tp: float
    fp: float
    fn: float
    P: int
    tpr: float
    fprp: float
    shd: int
    precision: float
    recall: float
    f1: float

    @property
    def fnr(self) -> float:
        return self.fn / self.P if self.P else math.nan


def _check(truth: LabeledGraph, est: LabeledGraph) -> LabeledGraph:
    if truth.labels == est.labels:
        return est
    if set(truth.labels) != set(est.labels) or len(truth.labels) != len(est.labels):
        raise MetricError("true and estimated graphs have different node labels")
    pos = {name: k for k, name in enumerate(est.labels)}
    return est.relabel([pos[name] for name in truth.labels])


def _pair_codes(adj: np.ndarray) -> np.ndarray:
    # 0 absent, 1 i->j, 2 j->i, 3 undirected, on the strict upper triangle
    return adj + 2 * adj.T


def edge_scores(truth: LabeledGraph, est: LabeledGraph) -> tuple[float, float, float]:
    """Half-credit TP, FP and FN counts."""
    est = _check(truth, est)
    iu = np.triu_indices(truth.p, 1)
    t = _pair_codes(truth.adj.astype(int))[iu]
    e = _pair_codes(est.adj.astype(int))[iu]
    both = (t > 0) & (e > 0)
    same = both & (t == e)
    differ = both & (t != e)
    tp = float(same.sum()) + 0.5 * float(differ.sum())
    fp = 0.5 * float(differ.sum()) + float(((e > 0) & (t == 0)).sum())
    fn = float(((t > 0) & (e == 0)).sum())
    return tp, fp, fn


def tpr_fprp(tp: float, fp: float, P: int) -> tuple[float, float]:
    """TP/P and FP/P; both NaN when the true graph has no edges."""
    if P == 0:
        return math.nan, math.nan
    return tp / P, fp / P


def shd(truth: LabeledGraph, est: LabeledGraph) -> int:
    est = _check(truth, est)
    iu = np.triu_indices(truth.p, 1)
    t = _pair_codes(truth.adj.astype(int))[iu]
    e = _pair_codes(est.adj.astype(int))[iu]
    return int(np.count_nonzero(t != e))


def f_beta(tp: float, fp: float, fn: float, beta: float = 1.0) -> float:
    """F-beta score; 0 when nothing is recovered, NaN when all counts are 0."""
    if beta < 0:
        raise MetricError("beta must be non-negative")
    if tp == 0:
        return math.nan if fp == 0 and fn == 0 else 0.0
    pr = tp / (tp + fp)
    re = tp / (tp + fn)
    b2 = beta * beta
    return (1 + b2) * pr * re / (b2 * pr + re)


def compare(truth: LabeledGraph, est: LabeledGraph, beta: float = 1.0) -> ComparisonScores:
    tp, fp, fn = edge_scores(truth, est)
    P = truth.n_edges()
    tpr, fprp = tpr_fprp(tp, fp, P)
    precision = tp / (tp + fp) if tp + fp > 0 else math.nan
    recall = tp / (tp + fn) if tp + fn > 0 else math.nan
    return ComparisonScores(tp, fp, fn, P, tpr, fprp, shd(truth, est), precision, recall,
                            f_beta(tp, fp, fn, beta))
