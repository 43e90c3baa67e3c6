"""Pattern counts and run times over a range of minimum supports and constraint settings.

Prints one TSV row per (setting, minsup) for external plotting.

    python scripts/constraint_sweep.py --data sessions.txt --minsup 20% 15% 10% 5%
"""

import argparse
import random

from cpsm.constraints import MiningConfig
from cpsm.data import SequenceDB, load, resolve_minsup
from cpsm.kernel import SearchLimit
from cpsm.mining import mine

SETTINGS = {
    "frequent": dict(),
    "min-size 3": dict(min_size=3),
    "max-gap 2": dict(model="decomposed", max_gap=2),
    "max-span 5": dict(model="decomposed", max_span=5),
    "gap 2 + span 5 + size 3": dict(model="decomposed", max_gap=2, max_span=5, min_size=3),
    "closed": dict(closed=True),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data")
    ap.add_argument("--format", default="plain", choices=("plain", "spmf"))
    ap.add_argument("--minsup", nargs="+", default=["20%", "10%", "5%"])
    ap.add_argument("--settings", nargs="+", default=list(SETTINGS), choices=list(SETTINGS))
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    if args.data:
        db = load(args.data, args.format)
    else:
        rng = random.Random(args.seed)
        db = SequenceDB.from_tokens([[f"s{rng.randrange(12)}" for _ in range(rng.randint(5, 15))] for _ in range(150)])

    print("setting\tminsup\ttheta\tpatterns\tnodes\tseconds")
    for name in args.settings:
        for ms in args.minsup:
            theta = resolve_minsup(ms, len(db))
            try:
                r = mine(db, MiningConfig(theta=theta, **SETTINGS[name]), time_limit=args.time_limit)
                row = f"{r.solution_count}\t{r.nodes}\t{r.wall_time:.2f}"
            except SearchLimit:
                row = f"-\t-\t>{args.time_limit:g}"
            print(f"{name}\t{ms}\t{theta}\t{row}")


if __name__ == "__main__":
    main()
