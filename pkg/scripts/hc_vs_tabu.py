"""Hill climbing vs tabu search on random binary Bayesian networks.

Prints per-seed CPDAG-SHD and BDeu scores for both searches and the medians.

    python3 scripts/hc_vs_tabu.py --seeds 20 --nodes 8 --samples 10000
"""

import argparse

import numpy as np

from structbench.graphs import cpdag
from structbench.learners import hill_climb, tabu
from structbench.metrics import shd
from structbench.modelgen import sample_bin_bn, sample_iid_discrete
from structbench.netgen import RandDagSpec, gen_rand_dag
from structbench.runner.plan import stream_seed
from structbench.scores import Scorer


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--nodes", type=int, default=8)
    ap.add_argument("--degree", type=float, default=2.0)
    ap.add_argument("--samples", type=int, default=10000)
    ap.add_argument("--ess", type=float, default=1.0)
    ap.add_argument("--tabu", type=int, default=10, help="tabu list length and stagnation limit")
    args = ap.parse_args(argv)

    print(f"{'seed':>4} {'hc_shd':>6} {'tabu_shd':>8} {'hc_score':>14} {'tabu_score':>14}")
    hc_shd, tb_shd = [], []
    for s in range(1, args.seeds + 1):
        g = gen_rand_dag(RandDagSpec(n=args.nodes, d=args.degree, seed=stream_seed("graph", "randdag", s)))
        bn = sample_bin_bn(g, 0.1, 0.9, stream_seed("parameters", "binbn", s))
        data = sample_iid_discrete(bn, args.samples, stream_seed("data", "iid", s))
        scorer = Scorer(data, "bdeu", ess=args.ess)
        hc = hill_climb(data, scorer=scorer)
        tb = tabu(data, tabu_len=args.tabu, stagnation_max=args.tabu, scorer=scorer)
        truth = cpdag(g)
        hc_shd.append(shd(truth, cpdag(hc.graph)))
        tb_shd.append(shd(truth, cpdag(tb.graph)))
        print(f"{s:>4} {hc_shd[-1]:>6} {tb_shd[-1]:>8} {hc.score:>14.3f} {tb.score:>14.3f}")
    print(f"median CPDAG-SHD: hc {np.median(hc_shd):g}, tabu {np.median(tb_shd):g}")


if __name__ == "__main__":
    main()
