"""Chromatic-root ensemble over random planar graphs, with a short report.

Writes complex_density.csv, real_hist.csv, beraha.csv, summary.json and
graphs.jsonl to the output directory (same files as ``pottstm ensemble``),
then prints the largest real-histogram peaks next to the Beraha numbers.

    python3 scripts/run_ensemble.py --n 40 --count 200 --outdir runs/n40
"""

from __future__ import annotations

import argparse
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from pottstm.cli import run_ensemble
from pottstm.roots import BERAHA_KS, beraha


@dataclass
class EnsembleConfig:
    n: int = 30
    count: int = 100
    seed: int = 0
    outdir: str = "runs/ensemble"
    jobs: int = 1
    top_peaks: int = 8


def peaks(outdir: Path, top: int):
    with open(outdir / "real_hist.csv") as fh:
        rows = [(float(q), float(d)) for q, d in list(csv.reader(fh))[1:]]
    return sorted(rows, key=lambda r: -r[1])[:top]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = EnsembleConfig()
    p.add_argument("--n", type=int, default=d.n)
    p.add_argument("--count", type=int, default=d.count)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--outdir", default=d.outdir)
    p.add_argument("--jobs", type=int, default=d.jobs)
    p.add_argument("--top-peaks", type=int, default=d.top_peaks)
    cfg = EnsembleConfig(**vars(p.parse_args()))
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    summary = run_ensemble(cfg.n, cfg.count, cfg.seed, cfg.outdir, cfg.jobs)
    print(f"{summary['succeeded']}/{cfg.count} graphs, {summary['violations']} audit violations, "
          f"{summary['not_converged']} unconverged, max residual {summary['max_residual']:.3g}")
    print("n_max distribution:", summary["n_max_distribution"])
    near = {k: beraha(k) for k in BERAHA_KS}
    for q, dens in peaks(Path(cfg.outdir), cfg.top_peaks):
        k = min(near, key=lambda k: abs(near[k] - q))
        print(f"  q={q:6.2f}  density {dens:8.3f}  nearest B_{k}={near[k]:.5f}")


if __name__ == "__main__":
    main()
