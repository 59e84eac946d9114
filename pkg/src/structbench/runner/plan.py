"""Job graph construction.

Stages run in the order graph -> parameters -> data -> learner -> evaluation.
Every job is identified by a key: the canonical JSON of its stage, module,
parameters, seed and the keys of the jobs it reads from. Fixed input files
enter the key through their content hash.
"""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path

from .config import BenchmarkConfig, DataSetup, Ref, Resource, canonical_json

STAGES = ("graph", "parameters", "data", "learner", "evaluation")
_LEARNER_META = ("id", "timeout")


@dataclass
class Job:
    stage: str
    module: str
    payload: dict
    deps: tuple[str, ...] = ()
    label: str = ""
    files: dict[str, str] = field(default_factory=dict)  # resolved paths, not part of the key

    @property
    def canonical(self) -> str:
        return canonical_json({"stage": self.stage, "module": self.module, "payload": self.payload})

    @property
    def key(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()[:32]


@dataclass
class Plan:
    jobs: dict[str, Job] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)

    def add(self, job: Job) -> str:
        key = job.key
        if key not in self.jobs:
            for d in job.deps:
                assert d in self.jobs, f"dependency {d} of {job.label} planned after it"
            self.jobs[key] = job
            self.order.append(key)
        return key

    def count(self, stage: str) -> int:
        return sum(1 for j in self.jobs.values() if j.stage == stage)

    def by_stage(self, stage: str) -> list[Job]:
        return [self.jobs[k] for k in self.order if self.jobs[k].stage == stage]


def stream_seed(*parts) -> int:
    """64-bit seed hashed from a stage tag, an object id and a replicate number."""
    digest = hashlib.sha256(canonical_json(list(parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def params_hash(params: dict) -> str:
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()[:12]


def expand_learner(res: Resource) -> list[tuple[dict, str]]:
    """Cartesian expansion of list-valued parameters.

    Returns (parameters, label) pairs; the label names the varied parameters,
    e.g. ``alpha=0.05``, and is empty when nothing varies.
    """
    varied = sorted(k for k, v in res.params.items() if isinstance(v, list) and k not in _LEARNER_META)
    out = []
    for combo in itertools.product(*(res.params[k] for k in varied)):
        params = dict(res.params)
        params.update(zip(varied, combo))
        label = ",".join(f"{k}={_show(v)}" for k, v in zip(varied, combo))
        out.append((params, label))
    return out


def _show(v) -> str:
    return canonical_json(v).strip('"')


def _name(ref: Ref) -> str:
    if ref.resource is not None:
        return ref.resource.id
    if ref.file is not None:
        return ref.file.name
    return "null"


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=+-]+", "_", text)


def setup_label(setup: DataSetup) -> str:
    return _safe(f"{_name(setup.graph)}__{_name(setup.parameters)}__{_name(setup.data)}")


@dataclass
class _Replicate:
    seed: int | None
    graph_key: str | None
    data_key: str
    data_name: str
    sample_size: int | None


def _fixed_job(stage: str, path: Path, extra: dict | None = None) -> Job:
    payload = {"file": path.name, "sha256": file_digest(path), **(extra or {})}
    return Job(stage, "fixed", payload, tuple(v for k, v in (extra or {}).items() if k in STAGES),
               label=f"{stage}:{path.name}", files={"input": str(path)})


def _plan_data(plan: Plan, setup: DataSetup) -> list[_Replicate]:
    reps = []
    if setup.data.file is not None:
        graph_key = plan.add(_fixed_job("graph", setup.graph.file)) if setup.graph.file else None
        path = setup.data.file
        files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix == ".csv") if path.is_dir() else [path]
        for f in files:
            reps.append(_Replicate(None, graph_key, plan.add(_fixed_job("data", f)), f.name, None))
        return reps

    fixed_graph = plan.add(_fixed_job("graph", setup.graph.file)) if setup.graph.file else None
    for seed in setup.seeds:
        if fixed_graph is not None:
            graph_key = fixed_graph
        else:
            g = setup.graph.resource
            graph_key = plan.add(Job("graph", g.module, {"params": g.params, "seed": seed,
                                                         "rng": stream_seed("graph", g.id, seed)},
                                     label=f"graph:{g.id}:seed{seed}"))
        if setup.parameters.file is not None:
            params_key = plan.add(_fixed_job("parameters", setup.parameters.file, {"graph": graph_key}))
        else:
            pr = setup.parameters.resource
            params_key = plan.add(Job("parameters", pr.module,
                                      {"params": pr.params, "seed": seed, "graph": graph_key,
                                       "rng": stream_seed("parameters", pr.id, seed)},
                                      deps=(graph_key,), label=f"parameters:{pr.id}:seed{seed}"))
        d = setup.data.resource
        sizes = d.params["sample_sizes"]
        for n in sizes if isinstance(sizes, list) else [sizes]:
            params = {**d.params, "sample_sizes": n}
            data_key = plan.add(Job("data", d.module,
                                    {"params": params, "seed": seed, "parameters": params_key, "graph": graph_key,
                                     "rng": stream_seed("data", d.id, seed)},
                                    deps=(graph_key, params_key), label=f"data:{d.id}:n{n}:seed{seed}"))
            reps.append(_Replicate(seed, graph_key, data_key, f"seed{seed}", n))
    return reps


def plan(cfg: BenchmarkConfig) -> Plan:
    """Expand a config into jobs; every job is added after the jobs it reads."""
    out = Plan()
    settings = [(res, params, label) for res in cfg.learners() for params, label in expand_learner(res)]
    ev = cfg.evaluation
    for setup in cfg.setups:
        reps = _plan_data(out, setup)
        runs_by_size: dict[int | None, list[dict]] = {}
        graphs_by_size: dict[int | None, list[dict]] = {}
        for rep in reps:
            if rep.graph_key is not None:
                graphs_by_size.setdefault(rep.sample_size, []).append(
                    {"seed": rep.seed if rep.seed is not None else rep.data_name, "graph": rep.graph_key})
            else:
                graphs_by_size.setdefault(rep.sample_size, [])
            for res, params, label in settings:
                payload = {"params": params, "data": rep.data_key,
                           "replicate": rep.seed if rep.seed is not None else 0}
                if res.module == "structure_mcmc":
                    payload["rng"] = stream_seed("learner", res.id, params_hash(params), payload["replicate"])
                key = out.add(Job("learner", res.module, payload, deps=(rep.data_key,),
                                  label=f"learner:{res.id}:{label or '-'}:{rep.data_name}"))
                runs_by_size.setdefault(rep.sample_size, []).append({
                    "id": res.id, "module": res.module, "params_hash": params_hash(params), "param": label,
                    "seed": rep.seed if rep.seed is not None else rep.data_name,
                    "learner": key, "graph": rep.graph_key,
                    "n_iterations": params.get("n_iterations"),
                })
        for size, runs in runs_by_size.items():
            label = setup_label(setup) + (f"__n{size}" if size is not None else "")
            _plan_evaluations(out, ev, label, _name(setup.graph), runs, graphs_by_size.get(size, []))
    return out


def _plan_evaluations(out: Plan, ev, label: str, graph_name: str, runs: list[dict], graphs: list[dict]) -> None:
    graph_keys = tuple(dict.fromkeys(g["graph"] for g in graphs))

    def add(module: str, config: dict, chosen: list[dict], need_graphs: bool):
        deps = tuple(r["learner"] for r in chosen) + (graph_keys if need_graphs else ())
        payload = {"config": config, "setup": label, "runs": chosen, "graphs": graphs if need_graphs else []}
        out.add(Job("evaluation", module, payload, deps=tuple(dict.fromkeys(deps)),
                    label=f"evaluation:{module}:{label}"))

    if ev.benchmarks is not None:
        ids = set(ev.benchmarks["ids"])
        add("benchmarks", ev.benchmarks, [r for r in runs if r["id"] in ids], True)
    if ev.graph_true_stats and graphs:
        add("graph_true_stats", {"graph_id": graph_name}, [], True)
    if ev.graph_true_plots and graphs:
        add("graph_true_plots", {}, [], True)
    if ev.graph_plots:
        ids = set(ev.graph_plots)
        add("graph_plots", {"ids": sorted(ids)}, [r for r in runs if r["id"] in ids], False)
    for m in ev.mcmc:
        cfg = {"id": m.id, "burn_in": m.burn_in, "thinning": m.thinning,
               "functionals": list(m.functionals), "lags": m.lags}
        add(m.module, cfg, [r for r in runs if r["id"] == m.id], False)
