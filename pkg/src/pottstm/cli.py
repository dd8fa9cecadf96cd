"""Command-line front end: ``pottstm {chromatic,potts,decompose,ensemble,oracle}``.

Exit codes: 0 success, 2 input error, 3 compute error, 4 oracle guard.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .engine import (
    EngineError, RunResult, chromatic_polynomial, coupling_to_v, potts_bivariate,
    potts_univariate, potts_value,
)
from .graph import Graph, GraphFormatError, parse_graph, random_planar_graph
from .oracle import OracleGuardError, colouring_count, deletion_contraction, fk_brute_force
from .roots import EnsembleStats, audit_real_roots, find_roots
from .treedecomp import (
    DecompositionError, build_schedule, choose_root, estimate_cost, format_decomposition,
    greedy_fill_in, parse_decomposition, path_decomposition,
)
from .weights import CRTError, Mode, format_coeffs, format_weight

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_GUARD = 0, 2, 3, 4

log = logging.getLogger("pottstm")


class InputError(Exception):
    """Bad file, bad flags or bad values on the command line."""


@dataclass
class RunReport:
    n_vertices: int
    n_edges: int
    n_bags: int
    n_max: int
    width: int
    fusions: int
    mode: str
    seconds: float
    peak_table: int
    result: str | None = None

    @classmethod
    def from_run(cls, g: Graph, res: RunResult, mode: Mode, result: str | None) -> "RunReport":
        st = res.stats
        return cls(g.n_vertices, g.n_edges, st.n_bags, st.n_max, max(st.n_max - 1, 0),
                   st.n_fusions, Mode(mode).value, st.seconds, st.peak_table, result)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _read_graph(path: str) -> Graph:
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_graph(data)


def _read_decomposition(path: str | None):
    if path is None:
        return None
    try:
        return parse_decomposition(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _float(x: float) -> str:
    return format(x, ".17g")


# ------------------------------------------------------------------ commands


def cmd_chromatic(args) -> int:
    g = _read_graph(args.graph)
    td = _read_decomposition(args.use_decomposition)
    res = chromatic_polynomial(g, pruning=not args.no_prune, crt=args.crt, td=td)
    text = format_weight(res.weight)
    print(text)
    if args.report:
        mode = Mode.MODULAR if args.crt else Mode.UNIVARIATE
        print(RunReport.from_run(g, res, mode, text).to_json(), file=sys.stderr)
    return EXIT_OK


def cmd_potts(args) -> int:
    g = _read_graph(args.graph)
    td = _read_decomposition(args.use_decomposition)
    chosen = [args.v is not None, args.bivariate, args.eval is not None]
    if sum(chosen) != 1:
        raise InputError("give exactly one of --v, --bivariate, --eval")
    if args.coupling is not None and args.eval is None:
        raise InputError("--coupling only applies with --eval")
    if args.bivariate:
        res = potts_bivariate(g, td)
        text, mode = format_weight(res.weight), Mode.BIVARIATE
    elif args.v is not None:
        try:
            v = Fraction(args.v)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"--v expects a rational p/q, got {args.v!r}") from None
        coeffs, res = potts_univariate(g, v, td)
        text, mode = format_coeffs(coeffs), Mode.UNIVARIATE
    else:
        values = args.eval
        if args.coupling is not None:
            if len(values) != 1:
                raise InputError("with --coupling give only Q to --eval")
            q, v = values[0], coupling_to_v(args.coupling)
        elif len(values) == 2:
            q, v = values
        else:
            raise InputError("--eval needs Q and v (or Q with --coupling K)")
        res = potts_value(g, q, v, td)
        text, mode = format_weight(res.weight), Mode.SCALAR
    print(text)
    if args.report:
        print(RunReport.from_run(g, res, mode, text).to_json(), file=sys.stderr)
    return EXIT_OK


def cmd_decompose(args) -> int:
    g = _read_graph(args.graph)
    if args.path:
        order = list(range(g.n_vertices)) if args.order == "lex" else None
        td = path_decomposition(g, order)
    else:
        if args.order == "lex":
            raise InputError("--order lex needs --path")
        td = greedy_fill_in(g)
    if args.root is not None:
        if not 0 <= args.root < td.n_bags:
            raise InputError(f"--root {args.root} out of range 0..{td.n_bags - 1}")
        td = td.with_root(args.root)
    elif args.auto_root:
        td = td.with_root(choose_root(g, td))
    sched = build_schedule(g, td)
    sys.stdout.write(format_decomposition(td))
    print(f"estimate {estimate_cost(g, td, sched)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _read_graph(args.graph)
    if sum([args.fk, args.colourings is not None, args.delcon]) != 1:
        raise InputError("give exactly one of --fk, --colourings, --delcon")
    if args.fk:
        print(format_weight(fk_brute_force(g)))
    elif args.delcon:
        print(format_weight(deletion_contraction(g)))
    else:
        print(colouring_count(g, args.colourings))
    return EXIT_OK


# ------------------------------------------------------------------ ensemble


def graph_seed(seed: int, index: int) -> int:
    """Per-graph seed, independent of how the work is split across jobs."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _ensemble_one(n: int, seed: int, index: int) -> dict:
    gseed = graph_seed(seed, index)
    out = {"index": index, "seed": gseed, "ok": False}
    try:
        t0 = time.perf_counter()
        g = random_planar_graph(n, gseed)
        res = chromatic_polynomial(g)
        t1 = time.perf_counter()
        rs = find_roots(res.weight)
        t2 = time.perf_counter()
        violations = audit_real_roots(rs, planar=True)
    except Exception as exc:  # a bad instance must not kill the batch
        out["error"] = f"{type(exc).__name__}: {exc}"
        return out
    out.update(
        ok=True, n_edges=g.n_edges, n_max=res.stats.n_max, peak_table=res.stats.peak_table,
        chi_seconds=t1 - t0, root_seconds=t2 - t1, converged=rs.converged,
        max_residual=max(rs.residuals, default=0.0),
        violations=[[v.root, v.interval] for v in violations],
        roots=[[z.real, z.imag] for z in rs.roots], residuals=rs.residuals,
        degree=rs.degree, sweeps=rs.sweeps,
        chi=format_weight(res.weight),
    )
    return out


def run_ensemble(n: int, count: int, seed: int, outdir: str | Path, jobs: int = 1) -> dict:
    """Generate, solve and audit ``count`` graphs; write CSVs, summary and reports."""
    from .roots import RootSet

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if jobs > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_ensemble_one, n, seed, i) for i in range(count)]
            results = [f.result() for f in futures]
    else:
        results = [_ensemble_one(n, seed, i) for i in range(count)]
    results.sort(key=lambda r: r["index"])

    stats = EnsembleStats()
    n_max_hist: dict[int, int] = {}
    for r in results:
        if r["ok"]:
            log.info("graph %d: n_max=%d chi %.3fs roots %.3fs violations=%d",
                     r["index"], r["n_max"], r["chi_seconds"], r["root_seconds"], len(r["violations"]))
            rs = RootSet([complex(a, b) for a, b in r["roots"]], r["residuals"], r["degree"],
                         r["converged"], r["sweeps"])
            stats.add(rs)
            n_max_hist[r["n_max"]] = n_max_hist.get(r["n_max"], 0) + 1
        else:
            log.warning("graph %d failed: %s", r["index"], r["error"])
    stats.write_csv(outdir)

    ok = [r for r in results if r["ok"]]
    summary = {
        "n": n, "count": count, "seed": seed,
        "succeeded": len(ok), "failed": count - len(ok),
        "failures": [{"index": r["index"], "error": r["error"]} for r in results if not r["ok"]],
        "violations": sum(len(r["violations"]) for r in ok),
        "not_converged": sum(not r["converged"] for r in ok),
        "max_residual": max((r["max_residual"] for r in ok), default=0.0),
        "n_max_distribution": {str(k): n_max_hist[k] for k in sorted(n_max_hist)},
        "chi_seconds_total": sum(r["chi_seconds"] for r in ok),
        "root_seconds_total": sum(r["root_seconds"] for r in ok),
        "wall_seconds": time.perf_counter() - t0,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    with open(outdir / "graphs.jsonl", "w", newline="\n") as fh:
        for r in results:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return summary


def cmd_ensemble(args) -> int:
    if args.n < 3 or args.count < 0 or args.jobs < 1:
        raise InputError("need --n >= 3, --count >= 0, --jobs >= 1")
    try:
        summary = run_ensemble(args.n, args.count, args.seed, args.outdir, args.jobs)
    except OSError as exc:
        raise InputError(f"cannot write to {args.outdir}: {exc}") from None
    print(json.dumps({k: summary[k] for k in ("succeeded", "failed", "violations", "not_converged")},
                     sort_keys=True))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pottstm", description="Exact Potts partition functions "
                                "and chromatic polynomials by tree-decomposed transfer matrix.")
    p.add_argument("-v", "--verbose", action="store_true", help="log one line per ensemble graph")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("chromatic", help="chromatic polynomial, ascending integer coefficients")
    c.add_argument("graph", help="edge-list file, '-' for stdin")
    c.add_argument("--no-prune", action="store_true")
    c.add_argument("--crt", action="store_true", help="adaptive multi-prime run with CRT lift")
    c.add_argument("--report", action="store_true", help="JSON run report on stderr")
    c.add_argument("--use-decomposition", metavar="FILE")
    c.set_defaults(func=cmd_chromatic)

    q = sub.add_parser("potts", help="Z(Q, v) at rational v, as a bivariate grid, or at a point")
    q.add_argument("graph")
    q.add_argument("--v", metavar="P/Q")
    q.add_argument("--bivariate", action="store_true")
    q.add_argument("--eval", nargs="+", type=float, metavar="X")
    q.add_argument("--coupling", type=float, metavar="K", help="v = exp(K) - 1, with --eval Q")
    q.add_argument("--report", action="store_true")
    q.add_argument("--use-decomposition", metavar="FILE")
    q.set_defaults(func=cmd_potts)

    d = sub.add_parser("decompose", help="print a tree decomposition and its cost estimate")
    d.add_argument("graph")
    d.add_argument("--path", action="store_true")
    d.add_argument("--order", choices=["greedy", "lex"], default="greedy")
    rg = d.add_mutually_exclusive_group()
    rg.add_argument("--root", type=int)
    rg.add_argument("--auto-root", action="store_true")
    d.set_defaults(func=cmd_decompose)

    e = sub.add_parser("ensemble", help="chromatic roots over random planar graphs")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--count", type=int, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--outdir", required=True)
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_ensemble)

    o = sub.add_parser("oracle", help="brute-force references")
    o.add_argument("graph")
    o.add_argument("--fk", action="store_true")
    o.add_argument("--colourings", type=int, metavar="Q")
    o.add_argument("--delcon", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except OracleGuardError as exc:
        print(f"pottstm: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, GraphFormatError, DecompositionError) as exc:
        print(f"pottstm: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EngineError, CRTError, ArithmeticError, ValueError) as exc:
        print(f"pottstm: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
