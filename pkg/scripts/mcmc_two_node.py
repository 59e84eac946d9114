"""Structure MCMC on two binary variables against exact enumeration.

With two nodes there are three DAGs, so the posterior can be computed by
exponentiating their scores. The script prints both edge posteriors.

    python3 scripts/mcmc_two_node.py --iterations 200000 --agree 0.65
"""

import argparse

import numpy as np

from structbench.evalreport import edge_posterior
from structbench.io import DataMatrix
from structbench.learners import structure_mcmc
from structbench.scores import Scorer


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=200000)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--agree", type=float, default=0.65, help="P(y = x) in the simulated data")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    x = rng.integers(0, 2, args.samples)
    y = np.where(rng.random(args.samples) < args.agree, x, 1 - x)
    data = DataMatrix(("x", "y"), np.column_stack([x, y]), (2, 2))
    scorer = Scorer(data, "bdeu")

    empty = np.zeros((2, 2), dtype=np.int8)
    xy, yx = empty.copy(), empty.copy()
    xy[0, 1] = yx[1, 0] = 1
    logw = np.array([scorer.total(a) for a in (empty, xy, yx)])
    w = np.exp(logw - logw.max())
    w /= w.sum()

    traj = structure_mcmc(data, args.iterations, seed=args.seed, scorer=scorer)
    post = edge_posterior(traj, burn_in=args.iterations // 10)
    print(f"{'edge':<6} {'exact':>8} {'mcmc':>8}")
    print(f"{'x->y':<6} {w[1]:>8.4f} {post[0, 1]:>8.4f}")
    print(f"{'y->x':<6} {w[2]:>8.4f} {post[1, 0]:>8.4f}")
    print(f"accepted moves: {len(traj.records) - 1}")


if __name__ == "__main__":
    main()
