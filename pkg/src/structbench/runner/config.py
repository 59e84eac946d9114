"""Benchmark configuration: JSON parsing, schema checks and id resolution.

A config has two sections. ``resources`` maps a module kind (graph,
parameters, data, structure_learning_algorithms) to modules, each holding a
list of parameter objects with unique ids. ``benchmark_setup`` lists data
tuples referring to those ids (or to files) and selects evaluations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from ..graphs import is_dag
from ..io import FormatError, read_adjmat

KINDS = ("graph", "parameters", "data", "structure_learning_algorithms")
GRAPH_MODULES = ("pcalg_randdag", "bandmat", "rand_bandmat")
PARAM_MODULES = ("bin_bn", "sem_params")
DATA_MODULES = ("iid",)

# where fixed files are looked up, relative to the config's directory
FILE_DIRS = {
    "graph": ["resources/adjmat/myadjmats", "."],
    "parameters": ["resources/parameters/myparams/sem_params", "."],
    "data": ["resources/data/mydatasets", "."],
}


class ConfigError(ValueError):
    """Problem in a config file, located by a JSON path such as ``$.resources.graph``."""

    def __init__(self, path: str, message: str, file=None):
        self.json_path, self.message, self.file = path, message, file
        prefix = f"{file}: " if file else ""
        super().__init__(f"{prefix}{path}: {message}")


# --- schema ----------------------------------------------------------------------

_int = {"type": "integer", "minimum": 0}
_bool = {"type": "boolean"}
_str = {"type": "string"}
_timeout = {"type": ["number", "null"], "minimum": 0}
_unbounded = {"anyOf": [{"type": "integer", "minimum": 0}, {"enum": ["Inf", None]}]}


def _obj(props: dict, required=("id",), extra=False) -> dict:
    return {
        "type": "object",
        "properties": {"id": {"type": "string", "minLength": 1}, **props},
        "required": list(required),
        "additionalProperties": extra,
    }


def _many(schema: dict) -> dict:
    # a learner parameter may be a list of values, expanded into one run per value
    return {"anyOf": [schema, {"type": "array", "items": schema, "minItems": 1}]}


_score = {"enum": ["bdeu", "bde", "bge", None]}

MODULE_SCHEMAS = {
    "graph": {
        "pcalg_randdag": _obj({
            "n": {"type": "integer", "minimum": 1}, "d": {"type": "number", "minimum": 0},
            "max_parents": _unbounded, "par1": {"type": "null"}, "par2": {"type": "null"},
            "method": {"const": "er"}, "DAG": {"const": True},
        }, required=("id", "n", "d")),
        "bandmat": _obj({"dim": {"type": "integer", "minimum": 1}, "bandwith": _int, "bandwidth": _int},
                        required=("id", "dim")),
        "rand_bandmat": _obj({"dim": {"type": "integer", "minimum": 1}, "max_bandwith": _int,
                              "max_bandwidth": _int}, required=("id", "dim")),
    },
    "parameters": {
        "bin_bn": _obj({"min": {"type": "number", "minimum": 0, "maximum": 1},
                        "max": {"type": "number", "minimum": 0, "maximum": 1}},
                       required=("id", "min", "max")),
        "sem_params": _obj({"min": {"type": "number", "minimum": 0}, "max": {"type": "number", "minimum": 0}},
                           required=("id", "min", "max")),
    },
    "data": {
        "iid": _obj({"sample_sizes": _many({"type": "integer", "minimum": 1}), "standardized": _bool},
                    required=("id", "sample_sizes")),
    },
    "structure_learning_algorithms": {
        "pcalg_pc": _obj({
            "alpha": _many({"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}),
            "NAdelete": _bool, "mmax": _unbounded, "u2pd": {"enum": ["relaxed"]},
            "skelmethod": {"enum": ["stable"]}, "conservative": {"const": False},
            "majrule": {"const": False}, "solveconfl": {"const": False}, "numCores": _int,
            "verbose": _bool,
            "indepTest": {"enum": ["gaussCItest", "binCItest", "disCItest", "fisher_z", "g2", None]},
            "timeout": _timeout,
        }, required=("id", "alpha")),
        "bnlearn_hc": _obj({
            "score": _many(_score), "iss": _many({"type": "number", "exclusiveMinimum": 0}),
            "iss.mu": _many({"type": "number", "exclusiveMinimum": 0}), "iss.w": _many({"type": ["number", "null"]}),
            "maxp": _many(_unbounded), "timeout": _timeout,
        }),
        "bnlearn_tabu": _obj({
            "score": _many(_score), "iss": _many({"type": "number", "exclusiveMinimum": 0}),
            "iss.mu": _many({"type": "number", "exclusiveMinimum": 0}), "iss.w": _many({"type": ["number", "null"]}),
            "maxp": _many(_unbounded), "tabu": _many({"type": "integer", "minimum": 1}),
            "max.tabu": _many({"type": "integer", "minimum": 1}), "timeout": _timeout,
        }),
        "structure_mcmc": _obj({
            "score": _many(_score), "iss": _many({"type": "number", "exclusiveMinimum": 0}),
            "iss.mu": _many({"type": "number", "exclusiveMinimum": 0}), "iss.w": _many({"type": ["number", "null"]}),
            "maxp": _many(_unbounded), "n_iterations": {"type": "integer", "minimum": 0}, "timeout": _timeout,
        }, required=("id", "n_iterations")),
    },
}

# any other learner module is an external plugin with free-form parameters
EXTERNAL_SCHEMA = _obj({"command": _str, "timeout": _timeout}, extra=True)

_functional = {"anyOf": [{"enum": ["size", "score"]},
                         {"type": "array", "items": {"enum": ["size", "score"]}}]}
_graph_type = {"enum": ["cpdag", "pattern", "skeleton", "raw"]}
_mcmc_common = {"id": _str, "burn_in": _int, "active": _bool}

EVALUATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "benchmarks": {
            "type": "object",
            "additionalProperties": False,
            "required": ["ids"],
            "properties": {
                "filename_prefix": _str, "show_seed": _bool, "errorbar": _bool, "errorbarh": _bool,
                "scatter": _bool, "path": _bool, "text": _bool,
                "ids": {"type": "array", "items": _str},
                "graph_type": _graph_type, "f1_graph_type": _graph_type,
            },
        },
        "graph_true_plots": _bool,
        "graph_true_stats": _bool,
        "ggally_ggpairs": _bool,
        "graph_plots": {"type": "array", "items": _str},
        "mcmc_traj_plots": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["id"],
            "properties": {**_mcmc_common, "thinning": {"type": "integer", "minimum": 1},
                           "functional": _functional}}},
        "mcmc_heatmaps": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["id"],
            "properties": _mcmc_common}},
        "mcmc_autocorr_plots": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["id"],
            "properties": {**_mcmc_common, "thinning": {"type": "integer", "minimum": 1},
                           "functional": _functional, "lags": _int, "lag": _int}}},
    },
}

TOP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["benchmark_setup", "resources"],
    "properties": {
        "benchmark_setup": {
            "type": "object",
            "additionalProperties": False,
            "required": ["data"],
            "properties": {
                "data": {"type": "array", "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["graph_id", "parameters_id", "data_id", "seed_range"],
                    "properties": {
                        "graph_id": {"type": ["string", "null"]},
                        "parameters_id": {"type": ["string", "null"]},
                        "data_id": _str,
                        "seed_range": {"anyOf": [
                            {"type": "null"},
                            {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                        ]},
                    },
                }},
                "evaluation": EVALUATION_SCHEMA,
            },
        },
        "resources": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "object", "additionalProperties": {"type": "array"}} for k in KINDS},
        },
    },
}


# --- parsed config ---------------------------------------------------------------

@dataclass(frozen=True)
class Resource:
    kind: str
    module: str
    id: str
    params: dict
    json_path: str


@dataclass(frozen=True)
class Ref:
    """A resolved data-tuple field: a resource object, a fixed file, or nothing."""

    resource: Resource | None = None
    file: Path | None = None

    @property
    def is_null(self) -> bool:
        return self.resource is None and self.file is None


@dataclass(frozen=True)
class DataSetup:
    graph: Ref
    parameters: Ref
    data: Ref
    seeds: tuple[int, ...] | None
    raw: dict
    json_path: str


@dataclass(frozen=True)
class McmcEval:
    module: str
    id: str
    burn_in: int = 0
    thinning: int = 1
    functionals: tuple[str, ...] = ("score", "size")
    lags: int = 50


@dataclass
class Evaluation:
    benchmarks: dict | None = None
    graph_true_stats: bool = False
    graph_true_plots: bool = False
    graph_plots: list[str] = field(default_factory=list)
    mcmc: list[McmcEval] = field(default_factory=list)


@dataclass
class BenchmarkConfig:
    path: Path
    base_dir: Path
    resources: dict[str, dict[str, list[Resource]]]
    setups: list[DataSetup]
    evaluation: Evaluation
    raw: dict

    def learners(self) -> list[Resource]:
        return [r for objs in self.resources.get("structure_learning_algorithms", {}).values() for r in objs]

    def find(self, kind: str, id_: str) -> Resource | None:
        for objs in self.resources.get(kind, {}).values():
            for r in objs:
                if r.id == id_:
                    return r
        return None


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _no_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ValueError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def _check(instance, schema, base: list) -> None:
    best = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(instance))
    if best is not None:
        raise ConfigError(_json_path(base + list(best.absolute_path)), best.message)


def _resolve_file(base_dir: Path, kind: str, name: str) -> Path | None:
    cand = Path(name)
    if cand.is_absolute():
        return cand if cand.exists() else None
    for sub in FILE_DIRS[kind]:
        p = base_dir / sub / name
        if p.exists():
            return p
    return None


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("$", f"cannot read config: {exc.strerror}", file=path) from None
    try:
        return json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          file=path) from None
    except ValueError as exc:
        raise ConfigError("$", f"JSON parse error: {exc}", file=path) from None


def parse_config(path) -> BenchmarkConfig:
    """Read and validate a config file; all errors carry a JSON path."""
    path = Path(path)
    raw = load_json(path)
    try:
        return _parse(raw, path)
    except ConfigError as exc:
        if exc.file is None:
            raise ConfigError(exc.json_path, exc.message, file=path) from None
        raise


def _parse(raw: dict, path: Path) -> BenchmarkConfig:
    _check(raw, TOP_SCHEMA, [])
    base_dir = path.resolve().parent

    resources: dict[str, dict[str, list[Resource]]] = {}
    for kind in KINDS:
        seen: dict[str, str] = {}
        modules = raw["resources"].get(kind, {})
        resources[kind] = {}
        for module, objs in modules.items():
            loc = ["resources", kind, module]
            schema = MODULE_SCHEMAS[kind].get(module)
            if schema is None:
                if kind != "structure_learning_algorithms":
                    known = ", ".join(MODULE_SCHEMAS[kind])
                    raise ConfigError(_json_path(loc), f"unknown {kind} module {module!r} (known: {known})")
                schema = EXTERNAL_SCHEMA
            out = []
            for k, obj in enumerate(objs):
                _check(obj, schema, loc + [k])
                jp = _json_path(loc + [k])
                if obj["id"] in seen:
                    raise ConfigError(jp + ".id", f"duplicate id {obj['id']!r} (also at {seen[obj['id']]})")
                seen[obj["id"]] = jp
                _semantic_checks(kind, module, obj, jp)
                out.append(Resource(kind, module, obj["id"], obj, jp))
            resources[kind][module] = out

    cfg = BenchmarkConfig(path, base_dir, resources, [], Evaluation(), raw)
    setup = raw["benchmark_setup"]
    for k, tup in enumerate(setup["data"]):
        cfg.setups.append(_parse_setup(cfg, tup, ["benchmark_setup", "data", k]))
    cfg.evaluation = _parse_evaluation(cfg, setup.get("evaluation", {}))
    return cfg


def _semantic_checks(kind, module, obj, jp):
    if module in PARAM_MODULES and obj["min"] > obj["max"]:
        raise ConfigError(jp, f"min ({obj['min']}) exceeds max ({obj['max']})")
    if module == "pcalg_randdag" and obj["d"] > max(obj["n"] - 1, 0):
        raise ConfigError(jp + ".d", f"d must lie in [0, n-1], got {obj['d']}")
    if module == "bandmat":
        if "bandwith" in obj and "bandwidth" in obj:
            raise ConfigError(jp, "give only one of 'bandwith' and 'bandwidth'")
        if "bandwith" not in obj and "bandwidth" not in obj:
            raise ConfigError(jp, "missing 'bandwith'")
    if module == "rand_bandmat":
        if ("max_bandwith" in obj) == ("max_bandwidth" in obj):
            raise ConfigError(jp, "give exactly one of 'max_bandwith' and 'max_bandwidth'")


def _resolve(cfg: BenchmarkConfig, kind: str, value, jp: str) -> Ref:
    if value is None:
        return Ref()
    res = cfg.find(kind, value)
    if res is not None:
        return Ref(resource=res)
    f = _resolve_file(cfg.base_dir, kind, value)
    if f is not None:
        return Ref(file=f)
    raise ConfigError(jp, f"dangling reference {value!r}: no {kind} object with this id and no such file")


def _parse_setup(cfg: BenchmarkConfig, tup: dict, loc: list) -> DataSetup:
    jp = _json_path(loc)
    graph = _resolve(cfg, "graph", tup["graph_id"], jp + ".graph_id")
    params = _resolve(cfg, "parameters", tup["parameters_id"], jp + ".parameters_id")
    data = _resolve(cfg, "data", tup["data_id"], jp + ".data_id")
    seed_range = tup["seed_range"]

    if data.file is not None:
        # Scenario I/II: user-supplied data
        if seed_range is not None:
            raise ConfigError(jp + ".seed_range", "must be null when data_id is a file or directory")
        if not params.is_null:
            raise ConfigError(jp + ".parameters_id", "must be null when data_id is a file or directory")
        if data.file.is_dir() and not graph.is_null:
            raise ConfigError(jp + ".graph_id", "must be null when data_id is a directory")
        if graph.resource is not None:
            raise ConfigError(jp + ".graph_id", "fixed data needs a graph file (or null), not a generator id")
        seeds = None
    else:
        if seed_range is None:
            raise ConfigError(jp + ".seed_range", "required when data are generated")
        lo, hi = seed_range
        if lo > hi or lo < 0:
            raise ConfigError(jp + ".seed_range", f"need 0 <= lo <= hi, got {seed_range}")
        if graph.is_null:
            raise ConfigError(jp + ".graph_id", "generated data need a graph")
        if params.is_null:
            raise ConfigError(jp + ".parameters_id", "generated data need parameters")
        if graph.resource is not None and graph.resource.module in ("bandmat", "rand_bandmat"):
            raise ConfigError(jp + ".parameters_id",
                              f"{params.resource.module if params.resource else 'fixed'} parameters require "
                              f"a DAG, but {graph.resource.id!r} is an undirected {graph.resource.module} graph")
        if params.file is not None and graph.file is None:
            raise ConfigError(jp + ".parameters_id", "a parameter file requires a fixed graph file")
        if graph.file is not None:
            try:
                g = read_adjmat(graph.file)
            except FormatError as exc:
                raise ConfigError(jp + ".graph_id", str(exc)) from None
            if not is_dag(g):
                raise ConfigError(jp + ".parameters_id",
                                  f"parameters require a DAG, but {graph.file.name} is not one")
        seeds = tuple(range(lo, hi + 1))
    return DataSetup(graph, params, data, seeds, tup, jp)


def _parse_evaluation(cfg: BenchmarkConfig, ev: dict) -> Evaluation:
    learner_ids = {r.id: r for r in cfg.learners()}
    base = "$.benchmark_setup.evaluation"
    out = Evaluation()
    if ev.get("ggally_ggpairs"):
        raise ConfigError(base + ".ggally_ggpairs", "pair plots are not supported; set to false")
    bm = ev.get("benchmarks")
    if bm is not None:
        for k, i in enumerate(bm["ids"]):
            if i not in learner_ids:
                raise ConfigError(f"{base}.benchmarks.ids[{k}]", f"dangling reference {i!r}")
        for s in cfg.setups:
            if s.graph.is_null:
                raise ConfigError(s.json_path + ".graph_id",
                                  "the benchmarks module requires that graph_id is set to a graph object "
                                  "id or a graph file")
        out.benchmarks = {"graph_type": "cpdag", "f1_graph_type": "skeleton", **bm}
    out.graph_true_stats = ev.get("graph_true_stats", False)
    out.graph_true_plots = ev.get("graph_true_plots", False)
    for k, i in enumerate(ev.get("graph_plots", [])):
        if i not in learner_ids:
            raise ConfigError(f"{base}.graph_plots[{k}]", f"dangling reference {i!r}")
    out.graph_plots = list(ev.get("graph_plots", []))
    for module in ("mcmc_traj_plots", "mcmc_heatmaps", "mcmc_autocorr_plots"):
        for k, obj in enumerate(ev.get(module, [])):
            jp = f"{base}.{module}[{k}]"
            if not obj.get("active", True):
                continue
            if "id" not in obj:
                raise ConfigError(jp, "missing id")
            res = learner_ids.get(obj["id"])
            if res is None:
                raise ConfigError(jp + ".id", f"dangling reference {obj['id']!r}")
            if res.module != "structure_mcmc":
                raise ConfigError(jp + ".id", f"{obj['id']!r} is a {res.module} object, not an MCMC learner")
            if "lags" in obj and "lag" in obj:
                raise ConfigError(jp, "give only one of 'lags' and 'lag'")
            functional = obj.get("functional", ["score", "size"])
            if isinstance(functional, str):
                functional = [functional]
            out.mcmc.append(McmcEval(module, obj["id"], obj.get("burn_in", 0), obj.get("thinning", 1),
                                     tuple(functional), obj.get("lags", obj.get("lag", 50))))
    return out


def learner_timeout(params: dict) -> float | None:
    t = params.get("timeout")
    return None if t is None else float(t)


def canonical_json(obj: Any) -> str:
    """Sorted keys, no whitespace, integral floats rendered as integers."""
    return json.dumps(_minimal(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _minimal(obj):
    if isinstance(obj, dict):
        return {str(k): _minimal(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_minimal(v) for v in obj]
    if isinstance(obj, float) and obj.is_integer():
        return int(obj)
    return obj
