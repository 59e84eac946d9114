"""Structure-learning algorithms and the uniform way the runner calls them."""

from __future__ import annotations

import time

from ..io import DataMatrix
from .common import (FAILED, OK, TIMED_OUT, Cancelled, LearnerResult, LearnerSpec,
                     with_timeout)
from .external import run_external
from .mcmc import structure_mcmc
from .pc import PCResult, pc
from .search import SearchResult, hill_climb, tabu

NATIVE = ("pcalg_pc", "bnlearn_hc", "bnlearn_tabu", "structure_mcmc")

__all__ = [
    "FAILED", "OK", "TIMED_OUT", "Cancelled", "LearnerResult", "LearnerSpec", "NATIVE",
    "PCResult", "SearchResult", "hill_climb", "pc", "run_external", "run_learner",
    "structure_mcmc", "tabu", "with_timeout",
]


def _unbounded(value):
    return None if value in (None, "Inf", "inf") else int(value)


def _score_kwargs(params: dict, data: DataMatrix) -> dict:
    default = "bdeu" if data.categorical else "bge"
    return {
        "score": params.get("score") or default,
        "ess": float(params.get("iss", 1.0)),
        "am": float(params.get("iss.mu", 1.0)),
        "aw": None if params.get("iss.w") is None else float(params["iss.w"]),
        "maxp": _unbounded(params.get("maxp")),
    }


def _native(spec: LearnerSpec, data: DataMatrix, replicate, cancel) -> LearnerResult:
    params = spec.params
    start = time.perf_counter()
    if spec.algorithm == "pcalg_pc":
        test = params.get("indepTest") or ("binCItest" if data.categorical else "gaussCItest")
        res = pc(data, test=test, alpha=float(params["alpha"]),
                 max_cond=_unbounded(params.get("mmax")), cancel=cancel)
        return LearnerResult(res.graph, time.perf_counter() - start, res.ntests)
    if spec.algorithm == "bnlearn_hc":
        res = hill_climb(data, cancel=cancel, **_score_kwargs(params, data))
        return LearnerResult(res.graph, time.perf_counter() - start, None)
    if spec.algorithm == "bnlearn_tabu":
        res = tabu(data, tabu_len=int(params.get("tabu", 10)),
                   stagnation_max=int(params.get("max.tabu", params.get("tabu", 10))),
                   cancel=cancel, **_score_kwargs(params, data))
        return LearnerResult(res.graph, time.perf_counter() - start, None)
    if spec.algorithm == "structure_mcmc":
        traj = structure_mcmc(data, int(params["n_iterations"]), seed=params.get("seed", replicate), cancel=cancel,
                              **_score_kwargs(params, data))
        return LearnerResult(traj, time.perf_counter() - start, None)
    raise ValueError(f"unknown native algorithm {spec.algorithm!r}")


def run_learner(spec: LearnerSpec, data: DataMatrix, data_path, workdir, replicate=0) -> LearnerResult:
    """Run a native or external learner under its timeout."""
    if spec.algorithm in NATIVE:
        thunk = lambda cancel: _native(spec, data, replicate, cancel)  # noqa: E731
    else:
        thunk = lambda cancel: run_external(spec, data_path, workdir, replicate, cancel)  # noqa: E731
    return with_timeout(spec.timeout, thunk)
