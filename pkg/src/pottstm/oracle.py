"""Brute-force references for testing the engine.

Nothing here shares code with the transfer matrix: the FK sum enumerates
edge subsets, the colouring count enumerates colour assignments, and
deletion-contraction recurses on a weighted multigraph.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .graph import Graph
from .weights import Mode, Weight, specialise_v

FK_MAX_EDGES = 24
DELCON_MAX_EDGES = 20
COLOURING_MAX_ASSIGNMENTS = 10**8


class OracleGuardError(ValueError):
    """Input too large for a brute-force oracle."""


class MinorKind(str, enum.Enum):
    DELETE = "delete"
    CONTRACT = "contract"


@dataclass(frozen=True)
class MinorOp:
    kind: MinorKind
    edge: tuple[int, int]


def apply_minor(g: Graph, op: MinorOp) -> Graph:
    """G - e or G / e as a simple graph.

    Contraction keeps the smaller endpoint and shifts higher labels down; it
    refuses edges lying on a triangle since those would leave parallel edges.
    """
    u, v = op.edge
    if not g.has_edge(u, v):
        raise ValueError(f"({u},{v}) is not an edge")
    key = {(u, v), (v, u)}
    if MinorKind(op.kind) is MinorKind.DELETE:
        return Graph(g.n_vertices, [e for e in g.edges if e not in key])
    keep, gone = min(u, v), max(u, v)
    if g.neighbours(u) & g.neighbours(v):
        raise ValueError(f"contracting ({u},{v}) creates parallel edges")

    def relabel(x):
        x = keep if x == gone else x
        return x - 1 if x > gone else x

    edges = [(relabel(a), relabel(b)) for a, b in g.edges if (a, b) not in key]
    return Graph(g.n_vertices - 1, edges)


def _to_mode(rows: dict[tuple[int, int], int], mode: Mode, v=None, q=None, prime=None) -> Weight:
    """Convert a {(v_deg, q_deg): count} table to the requested weight mode."""
    mode = Mode(mode)
    if not rows:
        biv = Weight.bivariate([])
    else:
        jmax = max(j for j, _ in rows)
        kmax = max(k for _, k in rows)
        grid = [[0] * (kmax + 1) for _ in range(jmax + 1)]
        for (j, k), c in rows.items():
            grid[j][k] += c
        biv = Weight.bivariate(grid)
    if mode is Mode.BIVARIATE:
        return biv
    if mode is Mode.SCALAR:
        return Weight.scalar(sum(c * float(v) ** j * float(q) ** k for (j, k), c in rows.items()))
    coeffs = specialise_v(biv, Fraction(v))
    if any(Fraction(c).denominator != 1 for c in coeffs):
        raise ValueError("non-integral coefficients; use BIVARIATE mode or an integer v")
    coeffs = [int(c) for c in coeffs]
    if mode is Mode.MODULAR:
        return Weight.modular(coeffs, prime)
    return Weight.univariate(coeffs)


def fk_table(g: Graph) -> dict[tuple[int, int], int]:
    """Number of edge subsets A with |A| = j and k(A) = k, keyed (j, k)."""
    M = g.n_edges
    if M > FK_MAX_EDGES:
        raise OracleGuardError(f"fk_brute_force limited to {FK_MAX_EDGES} edges, got {M}")
    edges = g.edges
    parent = list(range(g.n_vertices))
    counts: dict[tuple[int, int], int] = {}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    # depth-first over include/exclude choices with an undoable union-find
    def rec(i, size, k):
        if i == M:
            counts[(size, k)] = counts.get((size, k), 0) + 1
            return
        rec(i + 1, size, k)
        a, b = find(edges[i][0]), find(edges[i][1])
        if a == b:
            rec(i + 1, size + 1, k)
        else:
            parent[a] = b
            rec(i + 1, size + 1, k - 1)
            parent[a] = a

    rec(0, 0, g.n_vertices)
    return counts


def fk_brute_force(g: Graph, mode: Mode = Mode.BIVARIATE, v=None, q=None, prime=None) -> Weight:
    """Z_G(Q, v) as the sum over all edge subsets of v^|A| Q^k(A)."""
    return _to_mode(fk_table(g), mode, v=v, q=q, prime=prime)


def colouring_count(g: Graph, q: int) -> int:
    """Proper q-colourings, by backtracking in BFS order."""
    n = g.n_vertices
    if q < 0:
        raise ValueError("q must be >= 0")
    if q**n > COLOURING_MAX_ASSIGNMENTS:
        raise OracleGuardError(f"q^n = {q}^{n} exceeds {COLOURING_MAX_ASSIGNMENTS}")
    order = []
    seen = set()
    for s in range(n):
        if s in seen:
            continue
        seen.add(s)
        queue = [s]
        for x in queue:
            order.append(x)
            for y in sorted(g.neighbours(x)):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    rank = {v: i for i, v in enumerate(order)}
    earlier = [[u for u in g.neighbours(x) if rank[u] < rank[x]] for x in order]
    colour = [-1] * n

    def rec(i):
        if i == n:
            return 1
        x = order[i]
        taken = {colour[u] for u in earlier[i]}
        total = 0
        for c in range(q):
            if c not in taken:
                colour[x] = c
                total += rec(i + 1)
        colour[x] = -1
        return total

    return rec(0)


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return tuple(out)


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def deletion_contraction(g: Graph, mode: Mode = Mode.BIVARIATE, v=None, q=None, prime=None) -> Weight:
    """Z_G = Z_{G-e} + w_e Z_{G/e} on a multigraph with edge weights w_e(v).

    Parallel edges produced by contraction merge into one edge of weight
    (1 + w1)(1 + w2) - 1, so every edge starts as the polynomial v.
    """
    if g.n_edges > DELCON_MAX_EDGES:
        raise OracleGuardError(f"deletion_contraction limited to {DELCON_MAX_EDGES} edges")
    V = (0, 1)

    def rec(n, edges):
        # edges: {(a, b): weight as tuple of v-coefficients}, a < b
        if not edges:
            return {(0, n): 1}
        (a, b), w = next(iter(edges.items()))
        rest = dict(edges)
        del rest[(a, b)]
        out = dict(rec(n, rest))
        merged: dict = {}
        for (x, y), wx in rest.items():
            x = a if x == b else x
            y = a if y == b else y
            key = (min(x, y), max(x, y))
            if key in merged:
                wy = merged[key]
                merged[key] = _padd(_padd(wx, wy), _pmul(wx, wy))
            else:
                merged[key] = wx
        for (j, k), c in rec(n - 1, merged).items():
            for dj, wc in enumerate(w):
                if wc:
                    key = (j + dj, k)
                    out[key] = out.get(key, 0) + c * wc
        return out

    table = rec(g.n_vertices, {(min(a, b), max(a, b)): V for a, b in g.edges})
    table = {k: c for k, c in table.items() if c}
    return _to_mode(table, mode, v=v, q=q, prime=prime)
