import json
import os
import shutil

import pytest

from structbench.io import read_adjmat, read_data
from structbench.runner import cli
from structbench.runner.config import ConfigError, canonical_json, parse_config
from structbench.runner.execute import CACHED, EXECUTED, execute, results_root
from structbench.runner.plan import STAGES, plan, stream_seed

from conftest import FIXTURES, base_resources, snapshot, write_config, write_fixed_files

GEN = {"graph_id": "g6", "parameters_id": "sem", "data_id": "iid", "seed_range": [1, 3]}
BENCH = {"benchmarks": {"ids": ["pc", "hc"]}, "graph_true_stats": True}


def counts(p):
    return tuple(p.count(s) for s in STAGES)


@pytest.fixture
def fixed_dir(tmp_path):
    write_fixed_files(tmp_path)
    return tmp_path


# --- parsing -----------------------------------------------------------------------

def test_config_with_typo_reports_dangling_id():
    with pytest.raises(ConfigError) as exc:
        parse_config(FIXTURES / "randdag_pc_typo.json")
    assert "avneighs_p20" in str(exc.value) and "$.benchmark_setup.data[0].graph_id" in str(exc.value)


def test_corrected_config_plan_shape():
    cfg = parse_config(FIXTURES / "randdag_pc.json")
    assert len(cfg.setups) == 1 and cfg.setups[0].seeds == tuple(range(1, 11))
    assert {r.id for r in cfg.learners()} == {"pc-gaussCItest", "dualpc"}
    # 3 alpha values x 2 learners x 10 seeds
    assert counts(plan(cfg)) == (10, 10, 10, 60, 4)


def test_fixed_data_tuple_is_fixed_data_scenario(tmp_path):
    tup = json.loads((FIXTURES / "fixed_data_setup.json").read_text())
    write_fixed_files(tmp_path)
    shutil.copy(tmp_path / "true.csv", tmp_path / tup["graph_id"])
    shutil.copy(tmp_path / "data.csv", tmp_path / tup["data_id"])
    cfg = parse_config(write_config(tmp_path, [tup]))
    assert cfg.setups[0].seeds is None and cfg.setups[0].data.file is not None


@pytest.mark.parametrize("mutate, where", [
    (lambda c: c["resources"]["graph"]["pcalg_randdag"][0].update(colour="red"), "$.resources.graph"),
    (lambda c: c["resources"]["structure_learning_algorithms"]["bnlearn_hc"].append({"id": "pc"}),
     "duplicate id"),
    (lambda c: c["resources"]["graph"]["pcalg_randdag"][0].update(n="six"), "$.resources.graph"),
    (lambda c: c["benchmark_setup"]["data"][0].update(data_id="nope"), "$.benchmark_setup.data[0].data_id"),
    (lambda c: c["benchmark_setup"]["data"][0].update(seed_range=None), "seed_range"),
    (lambda c: c["benchmark_setup"]["evaluation"].update(benchmarks={"ids": ["ghost"]}), "ghost"),
])
def test_config_errors_carry_json_path(tmp_path, mutate, where):
    path = write_config(tmp_path, [dict(GEN)])
    cfg = json.loads(path.read_text())
    mutate(cfg)
    path.write_text(json.dumps(cfg))
    with pytest.raises(ConfigError) as exc:
        parse_config(path)
    assert where in str(exc.value)


def test_duplicate_json_keys_rejected(tmp_path):
    path = tmp_path / "dup.json"
    path.write_text('{"benchmark_setup": {}, "benchmark_setup": {}}')
    with pytest.raises(ConfigError):
        parse_config(path)


# --- planning: the five fixed/generated scenarios -------------------------------------

def test_scenario_i_fixed_data_without_truth(fixed_dir):
    setup = {"graph_id": None, "parameters_id": None, "data_id": "data.csv", "seed_range": None}
    assert counts(plan(parse_config(write_config(fixed_dir, [setup])))) == (0, 0, 1, 3, 0)
    many = dict(setup, data_id="many")
    assert counts(plan(parse_config(write_config(fixed_dir, [many])))) == (0, 0, 3, 9, 0)


def test_scenario_i_with_benchmarks_is_rejected(fixed_dir):
    setup = {"graph_id": None, "parameters_id": None, "data_id": "data.csv", "seed_range": None}
    with pytest.raises(ConfigError, match="graph_id"):
        parse_config(write_config(fixed_dir, [setup], BENCH))


def test_scenario_ii_fixed_data_and_truth(fixed_dir):
    setup = {"graph_id": "true.csv", "parameters_id": None, "data_id": "data.csv", "seed_range": None}
    assert counts(plan(parse_config(write_config(fixed_dir, [setup], BENCH)))) == (1, 0, 1, 3, 2)


def test_scenario_iii_fixed_graph_and_parameters(fixed_dir):
    setup = {"graph_id": "true.csv", "parameters_id": "weights.csv", "data_id": "iid", "seed_range": [1, 3]}
    assert counts(plan(parse_config(write_config(fixed_dir, [setup], BENCH)))) == (1, 1, 3, 9, 2)


def test_scenario_iv_fixed_graph_generated_parameters(fixed_dir):
    setup = {"graph_id": "true.csv", "parameters_id": "sem", "data_id": "iid", "seed_range": [1, 3]}
    assert counts(plan(parse_config(write_config(fixed_dir, [setup], BENCH)))) == (1, 3, 3, 9, 2)


def test_scenario_v_fully_generated(tmp_path):
    assert counts(plan(parse_config(write_config(tmp_path, [GEN], BENCH)))) == (3, 3, 3, 9, 2)


def test_empty_evaluation_still_plans_learners(tmp_path):
    assert counts(plan(parse_config(write_config(tmp_path, [GEN])))) == (3, 3, 3, 9, 0)


def test_generated_data_seeds_ignore_learners(tmp_path):
    a = plan(parse_config(write_config(tmp_path, [GEN], name="a.json")))
    res = base_resources()
    res["structure_learning_algorithms"]["bnlearn_tabu"] = [{"id": "tabu", "score": "bge"}]
    b = plan(parse_config(write_config(tmp_path, [GEN], BENCH, resources=res, name="b.json")))
    keys = lambda p: {k for k in p.order if p.jobs[k].stage in ("graph", "parameters", "data")}  # noqa: E731
    assert keys(a) == keys(b)


def test_canonical_json_and_stream_seeds():
    assert canonical_json({"b": 1.0, "a": [2, 0.5]}) == canonical_json({"a": [2.0, 0.5], "b": 1})
    assert stream_seed("data", "iid", 1) != stream_seed("data", "iid", 2)
    assert 0 <= stream_seed("graph", "g6", 1) < 2**64


def test_plan_is_topologically_ordered(tmp_path):
    p = plan(parse_config(write_config(tmp_path, [GEN], BENCH)))
    seen = set()
    for key in p.order:
        assert set(p.jobs[key].deps) <= seen
        seen.add(key)


# --- execution ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def executed(tmp_path_factory):
    base = tmp_path_factory.mktemp("run")
    cfg = write_config(base, [GEN], BENCH)
    report = execute(plan(parse_config(cfg)), base / "results", cores=1)
    return base, cfg, report


def test_run_produces_results_tree(executed):
    base, _, report = executed
    assert not report.failed and report.executed == 20
    root = base / "results"
    bench = root / "output" / "benchmarks"
    (label,) = [d.name for d in bench.iterdir()]
    text = (bench / label / "benchmarks.csv").read_text().splitlines()
    assert text[0].startswith("id,params_hash,seed,status")
    assert len(text) == 1 + 9
    assert (bench / label / "roc.csv").exists() and (bench / label / "roc.svg").exists()
    for key_dir in (root / "graph").iterdir():
        assert (key_dir / "key.json").exists()
        assert read_adjmat(key_dir / "adjmat.csv").p == 6
    for key_dir in (root / "data").iterdir():
        assert read_data(key_dir / "data.csv").values.shape == (100, 6)


def test_rerun_executes_nothing(executed):
    base, cfg, _ = executed
    report = execute(plan(parse_config(cfg)), base / "results", cores=1)
    assert report.executed == 0 and report.cached == 20
    assert "all jobs cached" in report.summary()


def test_forced_reexecution_is_byte_identical(executed):
    base, cfg, _ = executed
    before = snapshot(base / "results")
    p = plan(parse_config(cfg))
    report = execute(p, base / "results", cores=1, force=frozenset(p.order))
    assert report.executed == 20
    assert snapshot(base / "results") == before


def test_changing_one_learner_reruns_only_it(tmp_path):
    cfg = write_config(tmp_path, [GEN], BENCH)
    execute(plan(parse_config(cfg)), tmp_path / "results")
    raw = json.loads(cfg.read_text())
    raw["resources"]["structure_learning_algorithms"]["bnlearn_hc"][0]["iss.mu"] = 0.5
    cfg.write_text(json.dumps(raw))
    p = plan(parse_config(cfg))
    report = execute(p, tmp_path / "results")
    rerun = {(p.jobs[k].stage, p.jobs[k].module) for k, o in report.outcomes.items() if o.state == EXECUTED}
    assert rerun == {("learner", "bnlearn_hc"), ("evaluation", "benchmarks")}
    assert sum(o.state == EXECUTED for o in report.outcomes.values()) == 3 + 1
    assert report.cached == 20 - 4


def test_parallel_matches_serial(tmp_path):
    cfg = write_config(tmp_path, [GEN], BENCH)
    p = plan(parse_config(cfg))
    execute(p, tmp_path / "serial", cores=1)
    execute(p, tmp_path / "parallel", cores=4)
    assert snapshot(tmp_path / "serial") == snapshot(tmp_path / "parallel")


def test_failed_plugin_is_retried_and_fails_the_run(tmp_path):
    res = base_resources()
    res["structure_learning_algorithms"] = {"dualpc": [{"id": "dualpc", "alpha": 0.05}]}
    cfg = write_config(tmp_path, [dict(GEN, seed_range=[1, 1])], {"benchmarks": {"ids": ["dualpc"]}}, res)
    p = plan(parse_config(cfg))
    first = execute(p, tmp_path / "results")
    assert first.failed and first.learner_counts()["failed"] == 1
    second = execute(p, tmp_path / "results")
    learner = [o for o in second.outcomes.values() if o.stage == "learner"]
    assert [o.state for o in learner] == [EXECUTED]
    assert second.failed


def test_results_root_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("BENCHPRESS_RESULTS", str(tmp_path / "env"))
    assert results_root() == tmp_path / "env"
    assert results_root(str(tmp_path / "cli")) == tmp_path / "cli"
    monkeypatch.delenv("BENCHPRESS_RESULTS")
    assert str(results_root()) == "results"


# --- CLI ------------------------------------------------------------------------------

def test_cli_validate(capsys):
    assert cli.main(["validate", "--config", str(FIXTURES / "randdag_pc.json")]) == 0
    assert "94 jobs" in capsys.readouterr().out
    assert cli.main(["validate", "--config", str(FIXTURES / "randdag_pc_typo.json")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ") and "$.benchmark_setup.data[0].graph_id" in err


def test_cli_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["run"])
    assert exc.value.code == 2


def test_cli_run_twice_and_report(tmp_path, monkeypatch, capsys):
    cfg = write_config(tmp_path, [dict(GEN, seed_range=[1, 2])], BENCH)
    monkeypatch.setenv("BENCHPRESS_RESULTS", str(tmp_path / "res"))
    assert cli.main(["run", "--config", str(cfg), "--cores", "1"]) == 0
    assert "all jobs cached" not in capsys.readouterr().out
    assert cli.main(["run", "--config", str(cfg), "--cores", "1"]) == 0
    assert "all jobs cached" in capsys.readouterr().out
    assert (tmp_path / "res" / "output" / "benchmarks").is_dir()
    roc = next((tmp_path / "res" / "output" / "benchmarks").rglob("roc.csv"))
    roc.unlink()
    assert cli.main(["report", "--config", str(cfg)]) == 0
    assert roc.exists()


def test_cli_report_without_results_fails(tmp_path):
    cfg = write_config(tmp_path, [dict(GEN, seed_range=[1, 1])], BENCH)
    assert cli.main(["report", "--config", str(cfg), "--results-dir", str(tmp_path / "none")]) == 1


def test_cli_bad_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"benchmark_setup\": ")
    assert cli.main(["run", "--config", str(bad), "--results-dir", str(tmp_path)]) == 2
    assert "JSON parse error" in capsys.readouterr().err
