"""Node counts and wall time with and without projected-frequency branching.

    python scripts/projected_frequency_benchmark.py --symbols 20 --transactions 500 --length 20 --minsup 5%
"""

import argparse
import random

from cpsm.constraints import MiningConfig
from cpsm.data import SequenceDB, load, resolve_minsup
from cpsm.mining import mine


def synthetic(seed, sigma, n, length):
    rng = random.Random(seed)
    return SequenceDB.from_tokens([[f"s{rng.randrange(sigma)}" for _ in range(length)] for _ in range(n)])


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data", help="dataset file; synthetic data when omitted")
    ap.add_argument("--format", default="plain", choices=("plain", "spmf"))
    ap.add_argument("--symbols", type=int, default=20)
    ap.add_argument("--transactions", type=int, default=500)
    ap.add_argument("--length", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--minsup", default="5%")
    # the decomposed model is much slower on this shape; add it explicitly
    ap.add_argument("--models", default="global", help="comma-separated: global,decomposed")
    args = ap.parse_args()

    if args.data:
        db = load(args.data, args.format)
    else:
        db = synthetic(args.seed, args.symbols, args.transactions, args.length)
    theta = resolve_minsup(args.minsup, len(db))
    print("model\tprojected\tpatterns\tnodes\tpropagations\tseconds")
    for model in args.models.split(","):
        for pf in (True, False):
            r = mine(db, MiningConfig(theta=theta, model=model, projected_frequency=pf))
            print(f"{model}\t{'on' if pf else 'off'}\t{r.solution_count}\t{r.nodes}\t{r.propagations}\t{r.wall_time:.2f}")


if __name__ == "__main__":
    main()
