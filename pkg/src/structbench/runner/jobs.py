"""What each job does. Jobs read upstream outputs from ``results/<stage>/<key>/``
and write their own outputs into a fresh directory handed to them."""

from __future__ import annotations

import csv
import json
import shutil
from pathlib import Path

import numpy as np

from .. import plots
from ..evalreport import (ConstantSeriesError, RunRecord, autocorr, benchmarks_table, edge_posterior,
                          graph_stats, map_graph, roc_aggregate, traj_functional, write_benchmarks_csv,
                          write_graph_stats_csv, write_roc_csv)
from ..graphs import LabeledGraph
from ..io import (GraphTrajectory, format_number, read_adjmat, read_data, read_trajectory, read_weights,
                  write_adjmat, write_data, write_trajectory, write_weights)
from ..learners import OK, LearnerResult, LearnerSpec, run_learner
from ..modelgen import (DiscreteBN, GaussianSEM, sample_bin_bn, sample_iid_discrete, sample_iid_gaussian,
                        sample_sem_params)
from ..netgen import BandSpec, RandDagSpec, gen_bandmat, gen_rand_bandmat, gen_rand_dag


class JobError(RuntimeError):
    pass


def stage_dir(root: Path, stage: str, key: str) -> Path:
    return Path(root) / stage / key


def _unbounded(v):
    return None if v in (None, "Inf") else int(v)


# --- graph / parameters / data ---------------------------------------------------

def load_graph(root, key) -> LabeledGraph:
    return read_adjmat(stage_dir(root, "graph", key) / "adjmat.csv")


def run_graph(job: dict, root: Path, out: Path) -> None:
    module, pl = job["module"], job["payload"]
    if module == "fixed":
        g = read_adjmat(job["files"]["input"])
    elif module == "pcalg_randdag":
        p = pl["params"]
        spec = RandDagSpec(n=p["n"], d=p["d"], max_parents=_unbounded(p.get("max_parents")),
                           method=p.get("method", "er"), seed=pl["rng"], par1=p.get("par1"), par2=p.get("par2"))
        g = gen_rand_dag(spec)
    elif module == "bandmat":
        p = pl["params"]
        g = gen_bandmat(BandSpec(p["dim"], p.get("bandwith", p.get("bandwidth"))))
    elif module == "rand_bandmat":
        p = pl["params"]
        g = gen_rand_bandmat(BandSpec(p["dim"], p.get("max_bandwith", p.get("max_bandwidth")), seed=pl["rng"]))
    else:
        raise JobError(f"unknown graph module {module!r}")
    write_adjmat(g, out / "adjmat.csv")


def _write_bn(model: DiscreteBN, path: Path) -> None:
    doc = {
        "labels": list(model.graph.labels),
        "cardinalities": list(model.cardinalities),
        "cpts": [t.tolist() for t in model.cpts],
    }
    path.write_text(json.dumps(doc) + "\n")


def load_model(root, params_key: str, graph: LabeledGraph) -> DiscreteBN | GaussianSEM:
    d = stage_dir(root, "parameters", params_key)
    if (d / "bn.json").exists():
        doc = json.loads((d / "bn.json").read_text())
        return DiscreteBN(graph, tuple(doc["cardinalities"]), tuple(np.array(t) for t in doc["cpts"]))
    labels, w = read_weights(d / "weights.csv")
    if tuple(labels) != graph.labels:
        raise JobError(f"weight labels {labels} differ from graph labels {graph.labels}")
    return GaussianSEM(graph, w)


def run_parameters(job: dict, root: Path, out: Path) -> None:
    module, pl = job["module"], job["payload"]
    g = load_graph(root, pl["graph"])
    if module == "bin_bn":
        _write_bn(sample_bin_bn(g, pl["params"]["min"], pl["params"]["max"], pl["rng"]), out / "bn.json")
    elif module == "sem_params":
        model = sample_sem_params(g, pl["params"]["min"], pl["params"]["max"], pl["rng"])
        write_weights(g.labels, model.weights, out / "weights.csv")
    elif module == "fixed":
        labels, w = read_weights(job["files"]["input"])
        if tuple(labels) != g.labels:
            raise JobError(f"weight labels {list(labels)} differ from graph labels {list(g.labels)}")
        if np.any((w != 0) & (g.adj == 0)):
            raise JobError("weight matrix has nonzero entries outside the graph's edges")
        write_weights(labels, w, out / "weights.csv")
    else:
        raise JobError(f"unknown parameters module {module!r}")


def run_data(job: dict, root: Path, out: Path) -> None:
    module, pl = job["module"], job["payload"]
    if module == "fixed":
        read_data(job["files"]["input"])  # validate before accepting
        shutil.copyfile(job["files"]["input"], out / "data.csv")
        return
    if module != "iid":
        raise JobError(f"unknown data module {module!r}")
    g = load_graph(root, pl["graph"])
    model = load_model(root, pl["parameters"], g)
    n = pl["params"]["sample_sizes"]
    if isinstance(model, DiscreteBN):
        data = sample_iid_discrete(model, n, pl["rng"])
    else:
        data = sample_iid_gaussian(model, n, bool(pl["params"].get("standardized", False)), pl["rng"])
    write_data(data, out / "data.csv")


# --- learners ----------------------------------------------------------------------

def run_learner_job(job: dict, root: Path, out: Path) -> str:
    module, pl = job["module"], job["payload"]
    params = dict(pl["params"])
    if "rng" in pl:
        params["seed"] = pl["rng"]
    data_path = stage_dir(root, "data", pl["data"]) / "data.csv"
    data = read_data(data_path)
    timeout = params.get("timeout")
    spec = LearnerSpec(params["id"], module, params, None if timeout is None else float(timeout))
    work = out / "work"
    res = run_learner(spec, data, data_path, work, pl["replicate"])
    if (work / "stderr.txt").exists() and res.status != OK:
        shutil.copyfile(work / "stderr.txt", out / "stderr.txt")
    shutil.rmtree(work, ignore_errors=True)
    (out / "status.txt").write_text(res.status + ("\n" + res.diagnostic if res.diagnostic else "") + "\n")
    (out / "time.txt").write_text(format_number(float(res.wall_time)) + "\n")
    (out / "ntests.txt").write_text(("None" if res.ntests is None else str(res.ntests)) + "\n")
    if isinstance(res.estimate, GraphTrajectory):
        write_trajectory(res.estimate, out / "trajectory.csv")
    elif res.estimate is not None:
        write_adjmat(res.estimate, out / "adjmat.csv")
    return res.status


def load_learner_result(root, key: str, n_iterations=None) -> LearnerResult:
    d = stage_dir(root, "learner", key)
    status, _, diag = (d / "status.txt").read_text().rstrip("\n").partition("\n")
    wall = float((d / "time.txt").read_text())
    nt = (d / "ntests.txt").read_text().strip()
    ntests = None if nt == "None" else int(nt)
    estimate = None
    if status == OK:
        if (d / "trajectory.csv").exists():
            traj = read_trajectory(d / "trajectory.csv")
            estimate = GraphTrajectory(traj.labels, traj.records, traj.directed, length=n_iterations)
        else:
            estimate = read_adjmat(d / "adjmat.csv")
    return LearnerResult(estimate, wall, ntests, status, diag)


def learner_status(root, key: str) -> str:
    return (stage_dir(root, "learner", key) / "status.txt").read_text().split("\n", 1)[0]


# --- evaluations -------------------------------------------------------------------

def _runs(root, payload) -> list[RunRecord]:
    return [RunRecord(r["id"], r["params_hash"], r["param"], r["seed"],
                      load_learner_result(root, r["learner"], r.get("n_iterations")))
            for r in payload["runs"]]


def _run_name(r: RunRecord) -> str:
    return f"{r.id}__{r.params_hash}__{r.seed}"


def _truths(root, payload) -> dict:
    return {g["seed"]: load_graph(root, g["graph"]) for g in payload["graphs"]}


def eval_benchmarks(job: dict, root: Path, out: Path) -> None:
    pl = job["payload"]
    cfg = pl["config"]
    rows = benchmarks_table(_runs(root, pl), _truths(root, pl), cfg["graph_type"], cfg["f1_graph_type"])
    write_benchmarks_csv(rows, out / "benchmarks.csv")
    points = roc_aggregate(rows)
    write_roc_csv(points, out / "roc.csv")
    with open(out / "params.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["params_hash", "id", "param"])
        w.writerows(sorted({(r["params_hash"], r["id"], r["param"]) for r in pl["runs"]}))
    plots.roc_svg(points, out / "roc.svg", title=pl["setup"])


def eval_graph_true_stats(job: dict, root: Path, out: Path) -> None:
    pl = job["payload"]
    truths = [(pl["config"]["graph_id"], g["seed"], load_graph(root, g["graph"])) for g in pl["graphs"]]
    write_graph_stats_csv(graph_stats(truths), out / "graph_stats.csv")


def eval_graph_true_plots(job: dict, root: Path, out: Path) -> None:
    for g in job["payload"]["graphs"]:
        graph = load_graph(root, g["graph"])
        plots.heatmap_svg(graph.adj, graph.labels, out / f"true_graph_{g['seed']}.svg",
                          title=f"true graph {g['seed']}")


def eval_graph_plots(job: dict, root: Path, out: Path) -> None:
    for r in _runs(root, job["payload"]):
        if r.result.status != OK:
            continue
        est = r.result.estimate
        if isinstance(est, GraphTrajectory):
            est = map_graph(est)
        write_adjmat(est, out / f"{_run_name(r)}.csv")
        plots.heatmap_svg(est.adj, est.labels, out / f"{_run_name(r)}.svg", title=_run_name(r))


def _write_matrix(labels, m, path):
    lines = [",".join(labels)] + [",".join(format_number(float(v)) for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def eval_mcmc_heatmaps(job: dict, root: Path, out: Path) -> None:
    cfg = job["payload"]["config"]
    for r in _runs(root, job["payload"]):
        if r.result.status != OK:
            continue
        traj = r.result.estimate
        probs = edge_posterior(traj, min(cfg["burn_in"], traj.last_index))
        _write_matrix(traj.labels, probs, out / f"{_run_name(r)}_edge_probs.csv")
        plots.heatmap_svg(probs, traj.labels, out / f"{_run_name(r)}_edge_probs.svg", title=_run_name(r))


def _series_csv(idx, vals, path, header=("index", "value")):
    lines = [",".join(header)] + [f"{format_number(int(i))},{format_number(float(v))}" for i, v in zip(idx, vals)]
    Path(path).write_text("\n".join(lines) + "\n")


def eval_mcmc_traj_plots(job: dict, root: Path, out: Path) -> None:
    cfg = job["payload"]["config"]
    for r in _runs(root, job["payload"]):
        if r.result.status != OK:
            continue
        traj = r.result.estimate
        for fn in cfg["functionals"]:
            idx, vals = traj_functional(traj, fn, min(cfg["burn_in"], traj.last_index), cfg["thinning"])
            _series_csv(idx, vals, out / f"{_run_name(r)}_{fn}.csv")
            plots.series_svg(idx, vals, out / f"{_run_name(r)}_{fn}.svg", title=_run_name(r), ylabel=fn)


def eval_mcmc_autocorr_plots(job: dict, root: Path, out: Path) -> None:
    cfg = job["payload"]["config"]
    for r in _runs(root, job["payload"]):
        if r.result.status != OK:
            continue
        traj = r.result.estimate
        for fn in cfg["functionals"]:
            _, vals = traj_functional(traj, fn, min(cfg["burn_in"], traj.last_index), cfg["thinning"])
            lags = min(cfg["lags"], len(vals) - 1)
            name = f"{_run_name(r)}_{fn}_autocorr"
            try:
                acf = autocorr(vals, lags) if lags >= 0 else np.array([])
            except ConstantSeriesError:
                (out / f"{name}.txt").write_text("autocorrelation undefined: the series is constant\n")
                continue
            _series_csv(range(len(acf)), acf, out / f"{name}.csv", header=("lag", "r"))
            plots.stems_svg(acf, out / f"{name}.svg", title=f"{_run_name(r)} {fn}")


EVALUATIONS = {
    "benchmarks": eval_benchmarks,
    "graph_true_stats": eval_graph_true_stats,
    "graph_true_plots": eval_graph_true_plots,
    "graph_plots": eval_graph_plots,
    "mcmc_heatmaps": eval_mcmc_heatmaps,
    "mcmc_traj_plots": eval_mcmc_traj_plots,
    "mcmc_autocorr_plots": eval_mcmc_autocorr_plots,
}


def run_job(job: dict, root: Path, out: Path) -> str:
    """Execute one job into ``out``; returns the learner status for learner jobs, else "ok"."""
    stage = job["stage"]
    if stage == "graph":
        run_graph(job, root, out)
    elif stage == "parameters":
        run_parameters(job, root, out)
    elif stage == "data":
        run_data(job, root, out)
    elif stage == "learner":
        return run_learner_job(job, root, out)
    elif stage == "evaluation":
        EVALUATIONS[job["module"]](job, root, out)
    else:
        raise JobError(f"unknown stage {stage!r}")
    return OK
