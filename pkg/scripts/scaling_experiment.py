"""Time chromatic polynomials of random planar graphs against N.

Prints one row per N (median seconds, median largest bag, median peak
table size) and compares straight-line fits of log(median time) against
sqrt(N) and against N. A better sqrt(N) fit is the sub-exponential
signature; the constants are machine dependent.

    python3 scripts/scaling_experiment.py --sizes 25 50 75 100 --per-size 20
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from pottstm.engine import chromatic_polynomial
from pottstm.graph import random_planar_graph


@dataclass
class ScalingConfig:
    sizes: list[int] = field(default_factory=lambda: [25, 50, 75, 100])
    per_size: int = 20
    seed: int = 0
    pruning: bool = True


def fit(x, y):
    A = np.vstack([np.ones(len(x)), x]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, float(res[0]) if len(res) else 0.0


def run(cfg: ScalingConfig):
    rows = []
    for n in cfg.sizes:
        times, n_max, peaks = [], [], []
        for i in range(cfg.per_size):
            g = random_planar_graph(n, cfg.seed * 100_003 + 1000 * n + i)
            t0 = time.perf_counter()
            res = chromatic_polynomial(g, pruning=cfg.pruning)
            times.append(time.perf_counter() - t0)
            n_max.append(res.stats.n_max)
            peaks.append(res.stats.peak_table)
        rows.append((n, float(np.median(times)), float(np.median(n_max)), float(np.median(peaks))))
        print(f"N={n:4d}  median {rows[-1][1]:.4g}s  n_max {rows[-1][2]:g}  peak table {rows[-1][3]:g}",
              flush=True)
    sizes = np.array([r[0] for r in rows], dtype=float)
    y = np.log([r[1] for r in rows])
    (a, b), r_sqrt = fit(np.sqrt(sizes), y)
    (_, c), r_lin = fit(sizes, y)
    print(f"log t ~ {a:.3f} + {b:.3f} sqrt(N)   SSR {r_sqrt:.4g}")
    print(f"log t ~ ... + {c:.4f} N          SSR {r_lin:.4g}")
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=ScalingConfig().sizes)
    p.add_argument("--per-size", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-prune", action="store_true")
    a = p.parse_args()
    run(ScalingConfig(a.sizes, a.per_size, a.seed, not a.no_prune))


if __name__ == "__main__":
    main()
