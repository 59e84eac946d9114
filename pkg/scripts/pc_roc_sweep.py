"""ROC sweep of PC over the significance level on random linear Gaussian SEMs.

Writes roc.csv and roc.svg to --out and prints the ROC table.

    python3 scripts/pc_roc_sweep.py --seeds 10 --nodes 20 --samples 300 --out roc_out
"""

import argparse
from pathlib import Path

from structbench.evalreport import RunRecord, benchmarks_table, roc_aggregate, write_roc_csv
from structbench.learners import LearnerResult, pc
from structbench.modelgen import sample_iid_gaussian, sample_sem_params
from structbench.netgen import RandDagSpec, gen_rand_dag
from structbench.plots import roc_svg
from structbench.runner.plan import stream_seed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--nodes", type=int, default=20)
    ap.add_argument("--degree", type=float, default=4.0)
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.001, 0.01, 0.05, 0.1, 0.2])
    ap.add_argument("--out", default="roc_out")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records, truths = [], {}
    for s in range(1, args.seeds + 1):
        g = gen_rand_dag(RandDagSpec(n=args.nodes, d=args.degree, max_parents=5,
                                     seed=stream_seed("graph", "randdag", s)))
        sem = sample_sem_params(g, 0.25, 1, stream_seed("parameters", "sem", s))
        data = sample_iid_gaussian(sem, args.samples, True, stream_seed("data", "iid", s))
        truths[s] = g
        for alpha in args.alphas:
            res = pc(data, alpha=alpha)
            records.append(RunRecord("pc", f"{alpha:g}", f"alpha={alpha:g}", s,
                                     LearnerResult(res.graph, 0.0, res.ntests)))
    points = roc_aggregate(benchmarks_table(records, truths))
    write_roc_csv(points, out / "roc.csv")
    roc_svg(points, out / "roc.svg", title="PC, Fisher-z")
    print((out / "roc.csv").read_text(), end="")


if __name__ == "__main__":
    main()
