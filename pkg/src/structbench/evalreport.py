"""Benchmark tables, ROC aggregation, true-graph statistics and MCMC diagnostics."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import LabeledGraph, cpdag, is_dag, pattern_graph, skeleton
from .io import GraphTrajectory, format_number
from .learners.common import OK, LearnerResult
from .metrics import compare

BENCHMARK_COLUMNS = ["id", "params_hash", "seed", "status", "time_s", "ntests", "tp", "fp", "fn",
                     "tpr", "fprp", "fnr", "shd", "f1"]
ROC_COLUMNS = ["id", "param", "median_fprp", "median_tpr", "tpr_q05", "tpr_q95", "n_ok"]
GRAPH_TYPES = ("cpdag", "pattern", "skeleton", "raw")


class EvaluationError(ValueError):
    pass


@dataclass
class RunRecord:
    """One learner run as seen by the evaluation stage."""

    id: str
    params_hash: str
    param: str
    seed: object
    result: LearnerResult


@dataclass
class BenchmarkRow:
    id: str
    params_hash: str
    seed: object
    status: str
    time_s: float | None = None
    ntests: int | None = None
    tp: float | None = None
    fp: float | None = None
    fn: float | None = None
    tpr: float | None = None
    fprp: float | None = None
    fnr: float | None = None
    shd: int | None = None
    f1: float | None = None
    param: str = field(default="", compare=False)


@dataclass
class RocPoint:
    id: str
    param: str
    median_fprp: float
    median_tpr: float
    tpr_q05: float
    tpr_q95: float
    n_ok: int


def as_comparable(g: LabeledGraph, mode: str) -> LabeledGraph:
    """Graph used for comparison: CPDAG, pattern, skeleton or as-is.

    Graphs that are not DAGs (e.g. PC output) are already partially directed
    and are passed through unchanged for "cpdag" and "pattern".
    """
    if mode not in GRAPH_TYPES:
        raise EvaluationError(f"unknown graph type {mode!r}")
    if mode == "skeleton":
        return skeleton(g)
    if mode == "raw" or not is_dag(g):
        return g
    return cpdag(g) if mode == "cpdag" else pattern_graph(g)


def map_graph(traj: GraphTrajectory) -> LabeledGraph:
    """Highest-scoring graph of a trajectory (earliest on ties)."""
    best_score, best_adj = -math.inf, None
    for _, score, adj in traj.replay():
        if score > best_score:
            best_score, best_adj = score, adj
    return LabeledGraph(traj.labels, best_adj)


def benchmarks_table(results: Iterable[RunRecord], truths: Mapping[object, LabeledGraph] | None,
                     graph_type: str = "cpdag", f1_graph_type: str = "skeleton") -> list[BenchmarkRow]:
    """One row per run; runs that did not finish get a row with empty metrics.

    ``truths`` maps the run's seed to the true graph. SHD, TP/FP/FN and the
    rates are computed on ``graph_type`` views of both graphs, F1 on
    ``f1_graph_type`` views.
    """
    rows = []
    for rec in results:
        res = rec.result
        row = BenchmarkRow(rec.id, rec.params_hash, rec.seed, res.status, param=rec.param)
        if res.status == OK:
            if truths is None or rec.seed not in truths:
                raise EvaluationError(f"no true graph for seed {rec.seed!r}")
            truth = truths[rec.seed]
            est = res.estimate
            if isinstance(est, GraphTrajectory):
                est = map_graph(est)
            main = compare(as_comparable(truth, graph_type), as_comparable(est, graph_type))
            f1 = compare(as_comparable(truth, f1_graph_type), as_comparable(est, f1_graph_type)).f1
            row.time_s, row.ntests = res.wall_time, res.ntests
            row.tp, row.fp, row.fn = main.tp, main.fp, main.fn
            row.tpr, row.fprp, row.fnr = main.tpr, main.fprp, main.fnr
            row.shd, row.f1 = main.shd, f1
        elif res.wall_time:
            row.time_s = res.wall_time
        rows.append(row)
    rows.sort(key=lambda r: (r.id, _param_order(r.param), _seed_key(r.seed)))
    return rows


def _seed_key(seed):
    return (0, seed, "") if isinstance(seed, (int, np.integer)) else (1, 0, str(seed))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format_number(value) if isinstance(value, (int, float, np.integer, np.floating)) else str(value)


def write_benchmarks_csv(rows: Sequence[BenchmarkRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCHMARK_COLUMNS)
        for r in rows:
            w.writerow([_cell(getattr(r, c)) for c in BENCHMARK_COLUMNS])


def _param_order(param: str):
    try:
        return (0, float(param.split("=", 1)[-1]), param)
    except ValueError:
        return (1, 0.0, param)


def roc_aggregate(rows: Iterable[BenchmarkRow]) -> list[RocPoint]:
    """Median FPRp/TPR and 5%/95% TPR quantiles per (id, parameter value).

    Only ``ok`` rows enter the statistics; ``n_ok`` records how many did.
    Quantiles interpolate linearly between order statistics.
    """
    groups: dict[tuple[str, str], list[BenchmarkRow]] = defaultdict(list)
    for r in rows:
        groups[(r.id, r.param)].append(r)
    points = []
    for (alg, param), members in groups.items():
        ok = [r for r in members if r.status == OK and r.tpr is not None and not math.isnan(r.tpr)]
        if not ok:
            points.append(RocPoint(alg, param, math.nan, math.nan, math.nan, math.nan, 0))
            continue
        tpr = np.array([r.tpr for r in ok])
        fprp = np.array([r.fprp for r in ok])
        points.append(RocPoint(alg, param, float(np.median(fprp)), float(np.median(tpr)),
                               float(np.quantile(tpr, 0.05)), float(np.quantile(tpr, 0.95)), len(ok)))
    points.sort(key=lambda pt: (pt.id, _param_order(pt.param)))
    return points


def write_roc_csv(points: Sequence[RocPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROC_COLUMNS)
        for pt in points:
            w.writerow([_cell(getattr(pt, c)) for c in ROC_COLUMNS])


def graph_stats(truths: Iterable[tuple[str, object, LabeledGraph]]) -> list[dict]:
    """Node count, edge count, density |E|/|V| and max in-degree per graph.

    In-degree counts directed in-edges plus undirected neighbours.
    """
    out = []
    for graph_id, seed, g in truths:
        edges = g.n_edges()
        indeg = g.adj.sum(axis=0)
        out.append({
            "graph_id": graph_id,
            "seed": seed,
            "nodes": g.p,
            "edges": edges,
            "density": edges / g.p if g.p else 0.0,
            "max_indegree": int(indeg.max()) if g.p else 0,
        })
    return out


def write_graph_stats_csv(stats: Sequence[dict], path) -> None:
    cols = ["graph_id", "seed", "nodes", "edges", "density", "max_indegree"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in stats:
            w.writerow([_cell(row[c]) for c in cols])


# --- MCMC diagnostics ------------------------------------------------------------

def _segments(traj: GraphTrajectory, last_index: int | None):
    """Yield (first_index, last_index, score, adj) for each constant stretch of the chain."""
    end = traj.last_index if last_index is None else last_index
    states = list(traj.replay())
    for k, (idx, score, adj) in enumerate(states):
        stop = states[k + 1][0] - 1 if k + 1 < len(states) else end
        if stop >= idx:
            yield idx, stop, score, adj


def edge_posterior(traj: GraphTrajectory, burn_in: int = 0, last_index: int | None = None) -> np.ndarray:
    """Fraction of iterations ``burn_in..M`` in which each edge is present.

    The graph persists between recorded moves. ``last_index`` (M) defaults
    to the trajectory's known length or its last recorded index.
    """
    end = traj.last_index if last_index is None else last_index
    if burn_in < 0 or burn_in > end:
        raise EvaluationError(f"burn_in {burn_in} outside [0, {end}]")
    p = len(traj.labels)
    total = np.zeros((p, p))
    for first, last, _, adj in _segments(traj, end):
        lo, hi = max(first, burn_in), min(last, end)
        if hi >= lo:
            total += (hi - lo + 1) * adj
    return total / (end + 1 - burn_in)


FUNCTIONALS = ("size", "score")


def traj_functional(traj: GraphTrajectory, functional: str, burn_in: int = 0, thinning: int = 1,
                    last_index: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Edge count or score at indices ``burn_in, burn_in + thinning, ...``."""
    if functional not in FUNCTIONALS:
        raise EvaluationError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")
    if thinning < 1:
        raise EvaluationError("thinning must be at least 1")
    end = traj.last_index if last_index is None else last_index
    idx, vals = [], []
    for first, last, score, adj in _segments(traj, end):
        if functional == "size":
            value = float(adj.sum()) if traj.directed else float(np.triu(adj, 1).sum())
        else:
            value = score
        start = max(first, burn_in)
        # first retained index at or after start
        offset = (-(start - burn_in)) % thinning
        for t in range(start + offset, last + 1, thinning):
            idx.append(t)
            vals.append(value)
    return np.array(idx, dtype=np.int64), np.array(vals)


class ConstantSeriesError(ValueError):
    pass


def autocorr(series: Sequence[float], lags: int) -> np.ndarray:
    """Sample autocorrelation ``r_0..r_lags``.

    ``r_k`` is the lag-k autocovariance averaged over its ``n - k`` terms,
    divided by the lag-0 variance.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if lags < 0 or n <= lags:
        raise EvaluationError(f"need a series longer than lags={lags}, got {n} points")
    d = x - x.mean()
    var = float(d @ d) / n
    if var == 0:
        raise ConstantSeriesError("autocorrelation of a constant series is undefined")
    return np.array([float(d[: n - k] @ d[k:]) / (n - k) / var for k in range(lags + 1)])
