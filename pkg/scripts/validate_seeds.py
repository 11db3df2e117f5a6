"""Run the oracle validation table over several seeds and count failures per check.

With 99% intervals roughly 1 run in 100 should miss per stochastic check.
"""

import argparse
from collections import Counter

from cachemarket import cli, scenario

ap = argparse.ArgumentParser()
ap.add_argument("--seeds", type=int, default=10)
ap.add_argument("--preset", default="baseline")
ap.add_argument("--departures", type=int, default=200_000)
args = ap.parse_args()

sc = scenario.preset_scenario(args.preset)
fails = Counter()
for seed in range(args.seeds):
    for check, stat, ref, _, ok in cli.validation_rows(sc, seed, queue_departures=args.departures):
        fails[check] += not ok
        print(f"seed {seed:3d}  {check:16s} {stat:.6g}  ref {ref:.6g}  {'pass' if ok else 'FAIL'}")
print(dict(fails))
