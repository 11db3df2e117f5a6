"""Write plot-ready CSVs for every evaluation figure into one directory.

    python3 scripts/reproduce_all.py out/figures [--omega 10 --nu 3]
"""

import argparse
import time
from pathlib import Path

from cachemarket import cli, figures

ap = argparse.ArgumentParser()
ap.add_argument("outdir", type=Path)
ap.add_argument("--omega", type=float, default=10.0)
ap.add_argument("--nu", type=float, default=3.0)
ap.add_argument("--theta", type=float, default=10.0)
ap.add_argument("--p-circuit", type=float, default=1.0)
args = ap.parse_args()

args.outdir.mkdir(parents=True, exist_ok=True)
opts = figures.FigureOptions(omega=args.omega, nu=args.nu, theta=args.theta, p_circuit=args.p_circuit)
for fig in sorted(figures.FIGURES):
    t0 = time.perf_counter()
    header, rows = figures.reproduce(fig, opts)
    cli.write_csv(header, rows, args.outdir / f"fig{fig}.csv")
    print(f"fig{fig}: {len(rows)} rows  {time.perf_counter() - t0:.1f}s")
