import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structbench.graphs import is_chordal, is_dag
from structbench.netgen import BandSpec, RandDagSpec, gen_bandmat, gen_rand_bandmat, gen_rand_dag


def test_randdag_respects_parent_cap():
    for seed in range(1, 11):
        g = gen_rand_dag(RandDagSpec(n=20, d=4, max_parents=5, seed=seed))
        assert is_dag(g)
        assert g.adj.sum(axis=0).max() <= 5
        assert g.labels == tuple(str(k) for k in range(1, 21))


def test_zero_density_gives_empty_dag():
    g = gen_rand_dag(RandDagSpec(n=7, d=0, seed=3))
    assert g.n_edges() == 0


def test_mean_degree_close_to_d():
    degs = [2 * gen_rand_dag(RandDagSpec(n=80, d=4, seed=s)).n_edges() / 80 for s in range(200)]
    assert 3.5 <= np.mean(degs) <= 4.5


def test_invalid_specs_rejected():
    for spec in (RandDagSpec(n=0, d=0), RandDagSpec(n=5, d=5), RandDagSpec(n=5, d=1, max_parents=-1),
                 RandDagSpec(n=5, d=1, method="power"), RandDagSpec(n=5, d=1, par1=0.3)):
        with pytest.raises(ValueError):
            gen_rand_dag(spec)
    with pytest.raises(ValueError):
        gen_bandmat(BandSpec(3, 3))


@given(st.integers(1, 25), st.floats(0, 1), st.integers(0, 4), st.integers(0, 2**64 - 1))
@settings(max_examples=150)
def test_rand_dag_invariants(n, frac, cap, seed):
    spec = RandDagSpec(n=n, d=frac * (n - 1), max_parents=cap, seed=seed)
    g = gen_rand_dag(spec)
    assert is_dag(g)
    assert g.adj.sum(axis=0).max() <= cap
    assert np.array_equal(gen_rand_dag(spec).adj, g.adj)


def test_bandmat_examples():
    path = gen_bandmat(BandSpec(4, 1))
    assert path.undirected_edges() == [(0, 1), (1, 2), (2, 3)]
    assert gen_bandmat(BandSpec(3, 0)).n_edges() == 0
    assert gen_bandmat(BandSpec(4, 3)).n_edges() == 6


def test_rand_bandmat_examples():
    assert gen_rand_bandmat(BandSpec(6, 0, seed=9)).n_edges() == 0
    path = gen_bandmat(BandSpec(5, 1)).adj
    for seed in range(50):
        g = gen_rand_bandmat(BandSpec(5, 1, seed=seed))
        assert np.all(g.adj <= path)


def test_rand_bandmat_full_width_chordal_over_500_draws():
    rng = np.random.default_rng(0)
    for seed in range(500):
        p = int(rng.integers(1, 11))
        assert is_chordal(gen_rand_bandmat(BandSpec(p, p - 1, seed=seed)))


@given(st.integers(1, 12), st.integers(0, 11), st.integers(0, 2**32))
def test_rand_bandmat_deterministic(p, width, seed):
    spec = BandSpec(p, min(width, p - 1), seed)
    assert np.array_equal(gen_rand_bandmat(spec).adj, gen_rand_bandmat(spec).adj)
