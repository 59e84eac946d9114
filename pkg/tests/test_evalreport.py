import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from structbench.evalreport import (BENCHMARK_COLUMNS, ROC_COLUMNS, BenchmarkRow, ConstantSeriesError,
                                    EvaluationError, RunRecord, as_comparable, autocorr, benchmarks_table,
                                    edge_posterior, graph_stats, map_graph, roc_aggregate, traj_functional,
                                    write_benchmarks_csv, write_roc_csv)
from structbench.graphs import LabeledGraph
from structbench.io import GraphTrajectory, TrajectoryRecord, read_trajectory
from structbench.learners.common import FAILED, OK, TIMED_OUT, LearnerResult

from conftest import FIXTURES, dags

CHAIN = LabeledGraph.from_edges("abc", directed=[("a", "b"), ("b", "c")])


@pytest.fixture
def example_traj():
    return read_trajectory(FIXTURES / "trajectory_example.csv")


def rec(status=OK, est=CHAIN, seed=1, alg="hc", param=""):
    res = LearnerResult(est if status == OK else None, 0.5, 4 if status == OK else None, status)
    return RunRecord(alg, "abc123", param, seed, res)


def test_perfect_estimate_row():
    (row,) = benchmarks_table([rec()], {1: CHAIN})
    assert (row.tpr, row.fprp, row.shd, row.f1, row.status) == (1.0, 0.0, 0, 1.0, OK)


def test_timed_out_row_has_empty_metrics(tmp_path):
    rows = benchmarks_table([rec(TIMED_OUT), rec(FAILED, seed=2)], {1: CHAIN, 2: CHAIN})
    assert [r.status for r in rows] == [TIMED_OUT, FAILED]
    assert all(r.tpr is None and r.shd is None for r in rows)
    write_benchmarks_csv(rows, tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == ",".join(BENCHMARK_COLUMNS)
    assert lines[1].startswith("hc,abc123,1,timed_out,0.5,,,")


def test_missing_truth_is_an_error():
    with pytest.raises(EvaluationError):
        benchmarks_table([rec(seed=9)], {1: CHAIN})


def test_cpdag_comparison_ignores_equivalent_orientation():
    # a <- b <- c is Markov equivalent to the chain
    rev = LabeledGraph.from_edges("abc", directed=[("b", "a"), ("c", "b")])
    (row,) = benchmarks_table([rec(est=rev)], {1: CHAIN})
    assert row.shd == 0
    (raw,) = benchmarks_table([rec(est=rev)], {1: CHAIN}, graph_type="raw")
    assert raw.shd == 2
    assert as_comparable(rev, "skeleton").undirected_edges() == [(0, 1), (1, 2)]
    with pytest.raises(EvaluationError):
        as_comparable(rev, "moral")


def test_trajectory_estimates_use_highest_scoring_graph(example_traj):
    best = map_graph(example_traj)
    # last row scores highest: a-d, c-d
    assert best.undirected_edges() == [(0, 3), (2, 3)]


def row(tpr, fprp, alg="pc", param="alpha=0.05", status=OK):
    return BenchmarkRow(alg, "h", 0, status, tpr=tpr, fprp=fprp, param=param)


def test_roc_single_seed_collapses():
    (pt,) = roc_aggregate([row(0.6, 0.1)])
    assert (pt.median_tpr, pt.median_fprp, pt.tpr_q05, pt.tpr_q95, pt.n_ok) == (0.6, 0.1, 0.6, 0.6, 1)


def test_roc_median_of_three():
    (pt,) = roc_aggregate([row(0.1, 0.0), row(0.3, 0.0), row(0.2, 0.0)])
    assert pt.median_tpr == 0.2


def test_roc_failed_run_excluded_but_counted(tmp_path):
    rows = [row(0.4, 0.1), row(0.8, 0.3), BenchmarkRow("pc", "h", 0, FAILED, param="alpha=0.05")]
    (pt,) = roc_aggregate(rows)
    assert pt.n_ok == 2 and pt.median_tpr == pytest.approx(0.6)
    # linear interpolation between the two order statistics
    assert pt.tpr_q05 == pytest.approx(0.42) and pt.tpr_q95 == pytest.approx(0.78)
    write_roc_csv([pt], tmp_path / "roc.csv")
    assert (tmp_path / "roc.csv").read_text().splitlines()[0] == ",".join(ROC_COLUMNS)


def test_roc_points_ordered_by_numeric_parameter():
    pts = roc_aggregate([row(0.5, 0.1, param="alpha=0.1"), row(0.4, 0.0, param="alpha=0.05"),
                         row(0.7, 0.2, param="alpha=0.5")])
    assert [pt.param for pt in pts] == ["alpha=0.05", "alpha=0.1", "alpha=0.5"]


def test_roc_group_without_ok_rows():
    (pt,) = roc_aggregate([BenchmarkRow("pc", "h", 0, TIMED_OUT, param="alpha=0.05")])
    assert pt.n_ok == 0 and math.isnan(pt.median_tpr)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 3)), min_size=1, max_size=15), st.randoms())
def test_roc_quantile_order_and_permutation_invariance(vals, rnd):
    rows = [row(t, f) for t, f in vals]
    (pt,) = roc_aggregate(rows)
    assert pt.tpr_q05 <= pt.median_tpr + 1e-12 and pt.median_tpr <= pt.tpr_q95 + 1e-12
    rnd.shuffle(rows)
    (again,) = roc_aggregate(rows)
    assert again == pt


def test_graph_stats_examples():
    path = LabeledGraph.from_edges("abcd", undirected=[("a", "b"), ("b", "c"), ("c", "d")])
    empty, line = graph_stats([("e", 1, LabeledGraph.empty("abc")), ("p", 1, path)])
    assert empty["density"] == 0 and empty["edges"] == 0
    assert line["density"] == 0.75 and line["nodes"] == 4 and line["max_indegree"] == 2
    (dag,) = graph_stats([("d", 2, CHAIN)])
    assert dag["max_indegree"] == 1


def test_edge_posterior_a23(example_traj):
    post = edge_posterior(example_traj)
    assert example_traj.last_index == 89
    assert Fraction(post[1, 2]).limit_denominator(1000) == Fraction(34, 90)
    assert post[0, 3] == 1.0
    assert post[2, 3] == pytest.approx(1 / 90)
    last = edge_posterior(example_traj, burn_in=89)
    assert set(np.unique(last)) <= {0.0, 1.0}
    assert last[2, 3] == 1 and last[1, 2] == 0
    with pytest.raises(EvaluationError):
        edge_posterior(example_traj, burn_in=90)


def test_edge_posterior_of_static_chain():
    traj = GraphTrajectory(("a", "b", "c"), [TrajectoryRecord(0, -5.0, [(0, 1)])], length=50)
    for b in (0, 10, 50):
        post = edge_posterior(traj, burn_in=b)
        assert post[0, 1] == 1.0 and post.sum() == 1.0


@given(dags(min_p=2, max_p=5), st.integers(1, 30), st.integers(0, 2**16))
def test_edge_posterior_bounds(g, steps, seed):
    rng = np.random.default_rng(seed)
    records, adj, idx = [TrajectoryRecord(0, 0.0)], np.zeros((g.p, g.p), dtype=np.int8), 0
    edges = g.directed_edges()
    for _ in range(steps):
        if not edges:
            break
        i, j = edges[int(rng.integers(len(edges)))]
        idx += int(rng.integers(1, 5))
        if adj[i, j]:
            records.append(TrajectoryRecord(idx, 0.0, [], [(i, j)]))
        else:
            records.append(TrajectoryRecord(idx, 0.0, [(i, j)], []))
        adj[i, j] ^= 1
    post = edge_posterior(GraphTrajectory(g.labels, records))
    assert np.all((post >= 0) & (post <= 1)) and not np.diag(post).any()


def test_size_series_a23(example_traj):
    idx, vals = traj_functional(example_traj, "size")
    assert idx.tolist() == list(range(90))
    assert vals[:34].tolist() == [2] * 34 and vals[34:89].tolist() == [1] * 55 and vals[89] == 2
    idx, _ = traj_functional(example_traj, "size", thinning=89)
    assert idx.tolist() == [0, 89]


def test_score_series_a23(example_traj):
    idx, vals = traj_functional(example_traj, "score")
    assert vals[0] == example_traj.records[0].score
    assert set(vals.tolist()) == {-2325.52, -2311.94, -2310.81}
    idx, vals = traj_functional(example_traj, "score", burn_in=40, thinning=10)
    assert idx.tolist() == [40, 50, 60, 70, 80]
    with pytest.raises(EvaluationError):
        traj_functional(example_traj, "entropy")
    with pytest.raises(EvaluationError):
        traj_functional(example_traj, "size", thinning=0)


def test_autocorr_examples():
    alt = np.tile([1.0, -1.0], 50)
    r = autocorr(alt, 3)
    assert r[0] == 1.0 and r[1] == pytest.approx(-1.0)
    noise = np.random.default_rng(0).normal(size=10000)
    assert np.all(np.abs(autocorr(noise, 20)[1:]) < 0.05)
    with pytest.raises(ConstantSeriesError):
        autocorr(np.ones(10), 2)
    with pytest.raises(EvaluationError):
        autocorr([1.0, 2.0], 5)


def test_benchmarks_csv_uses_lf_and_dot_decimal(tmp_path):
    rows = benchmarks_table([rec(param="alpha=0.1"), rec(seed=2, param="alpha=0.1")], {1: CHAIN, 2: CHAIN})
    write_benchmarks_csv(rows, tmp_path / "b.csv")
    raw = (tmp_path / "b.csv").read_bytes()
    assert b"\r" not in raw
    parsed = list(csv.DictReader(raw.decode().splitlines()))
    assert [r["seed"] for r in parsed] == ["1", "2"] and parsed[0]["tpr"] == "1.0"
