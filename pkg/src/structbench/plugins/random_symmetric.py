"""Template plugin: ignores the data and samples a random symmetric 0/1 matrix.

Usage::

    python -m structbench.plugins.random_symmetric --data {data} --adjmat {adjmat} \
        --time {time} --ntests {ntests} --replicate {replicate}
"""

import argparse
import time

import numpy as np

from structbench.graphs import LabeledGraph
from structbench.io import read_data, write_adjmat


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", required=True)
    ap.add_argument("--adjmat", required=True)
    ap.add_argument("--time", required=True)
    ap.add_argument("--ntests", required=True)
    ap.add_argument("--replicate", type=int, default=0)
    ap.add_argument("--threshold", type=float, default=0.9)
    args = ap.parse_args(argv)

    data = read_data(args.data)
    p = data.p
    rng = np.random.default_rng(args.replicate)
    start = time.process_time()
    adj = rng.random((p, p)) > args.threshold
    adj = (adj | adj.T).astype(np.int8)
    np.fill_diagonal(adj, 0)
    elapsed = time.process_time() - start

    with open(args.time, "w") as fh:
        fh.write(f"{elapsed}\n")
    with open(args.ntests, "w") as fh:
        fh.write("None\n")
    write_adjmat(LabeledGraph(data.labels, adj), args.adjmat)


if __name__ == "__main__":
    main()
