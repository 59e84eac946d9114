from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from structbench.graphs import LabeledGraph, is_dag

FIXTURES = Path(__file__).parent / "fixtures"


def labels(p):
    return tuple(f"x{k}" for k in range(p))


@st.composite
def dags(draw, min_p=1, max_p=7):
    """Random DAG: edges only from earlier to later in a drawn permutation."""
    p = draw(st.integers(min_p, max_p))
    perm = draw(st.permutations(range(p)))
    adj = np.zeros((p, p), dtype=np.int8)
    for a, b in itertools.combinations(range(p), 2):
        if draw(st.booleans()):
            adj[perm[a], perm[b]] = 1
    return LabeledGraph(labels(p), adj)


@st.composite
def mixed_graphs(draw, p=None, min_p=1, max_p=8):
    """Graph with each pair absent, i->j, j->i or undirected."""
    if p is None:
        p = draw(st.integers(min_p, max_p))
    adj = np.zeros((p, p), dtype=np.int8)
    for i, j in itertools.combinations(range(p), 2):
        code = draw(st.integers(0, 3))
        adj[i, j] = code & 1
        adj[j, i] = (code >> 1) & 1
    return LabeledGraph(labels(p), adj)


@st.composite
def undirected_graphs(draw, min_p=1, max_p=7):
    p = draw(st.integers(min_p, max_p))
    adj = np.zeros((p, p), dtype=np.int8)
    for i, j in itertools.combinations(range(p), 2):
        if draw(st.booleans()):
            adj[i, j] = adj[j, i] = 1
    return LabeledGraph(labels(p), adj)


def all_dags(p):
    """Every labelled DAG on p nodes (543 for p=4)."""
    pairs = list(itertools.combinations(range(p), 2))
    out = []
    for codes in itertools.product(range(3), repeat=len(pairs)):
        adj = np.zeros((p, p), dtype=np.int8)
        for (i, j), c in zip(pairs, codes):
            if c == 1:
                adj[i, j] = 1
            elif c == 2:
                adj[j, i] = 1
        g = LabeledGraph(labels(p), adj)
        if is_dag(g):
            out.append(g)
    return out


@pytest.fixture
def fixtures():
    return FIXTURES


# --- runner fixtures -------------------------------------------------------------

def base_resources(n=6, sample_size=100):
    return {
        "graph": {"pcalg_randdag": [{"id": "g6", "n": n, "d": 2, "max_parents": None, "par1": None,
                                     "par2": None, "method": "er", "DAG": True}]},
        "parameters": {"sem_params": [{"id": "sem", "min": 0.25, "max": 1}]},
        "data": {"iid": [{"id": "iid", "standardized": True, "sample_sizes": sample_size}]},
        "structure_learning_algorithms": {
            "pcalg_pc": [{"id": "pc", "alpha": [0.01, 0.1], "mmax": "Inf", "timeout": None}],
            "bnlearn_hc": [{"id": "hc", "score": "bge"}],
        },
    }


def write_config(directory, setups, evaluation=None, resources=None, name="config.json"):
    import json

    cfg = {"benchmark_setup": {"data": setups, "evaluation": evaluation or {}},
           "resources": resources or base_resources()}
    path = Path(directory) / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def write_fixed_files(directory):
    """A 4-node DAG, its SEM weights, one dataset and a directory of three datasets."""
    from structbench.io import write_adjmat, write_data, write_weights
    from structbench.modelgen import sample_iid_gaussian, sample_sem_params

    directory = Path(directory)
    g = LabeledGraph.from_edges("abcd", directed=[("a", "b"), ("b", "c"), ("d", "c")])
    sem = sample_sem_params(g, 0.25, 1, 0)
    write_adjmat(g, directory / "true.csv")
    write_weights(g.labels, sem.weights, directory / "weights.csv")
    write_data(sample_iid_gaussian(sem, 100, True, 0), directory / "data.csv")
    (directory / "many").mkdir(exist_ok=True)
    for k in range(3):
        write_data(sample_iid_gaussian(sem, 60, True, k + 1), directory / "many" / f"d{k}.csv")
    return g


def snapshot(root):
    """Relative path -> bytes for every file, wall-clock fields removed."""
    import csv
    import io as _io

    out = {}
    for f in sorted(Path(root).rglob("*")):
        if not f.is_file() or f.name == "time.txt":
            continue
        data = f.read_bytes()
        if f.name == "benchmarks.csv":
            rows = list(csv.reader(_io.StringIO(data.decode())))
            col = rows[0].index("time_s")
            data = "\n".join(",".join(r[:col] + r[col + 1:]) for r in rows).encode()
        out[str(f.relative_to(root))] = data
    return out


# --- acceptance summary ----------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
