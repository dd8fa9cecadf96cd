"""Tree and path decompositions, and the per-bag schedule the engine executes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .graph import Graph
from .partition import catalan, count_states

AUTO = "auto"


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[tuple[int, ...], ...]
    tree_edges: tuple[tuple[int, int], ...]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bags", tuple(tuple(sorted(set(b))) for b in self.bags))
        object.__setattr__(self, "tree_edges", tuple((int(a), int(b)) for a, b in self.tree_edges))

    @property
    def n_bags(self) -> int:
        return len(self.bags)

    @property
    def n_max(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    @property
    def width(self) -> int:
        return self.n_max - 1

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.bags]
        for a, b in self.tree_edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def with_root(self, root: int) -> "TreeDecomposition":
        return TreeDecomposition(self.bags, self.tree_edges, root)


# ------------------------------------------------------------ construction


def elimination_order(g: Graph) -> tuple[list[int], list[set[int]]]:
    """GreedyFillIn order plus each vertex's higher neighbourhood at elimination.

    Picks the vertex whose neighbours need the fewest fill edges to form a
    clique; ties go to the smaller current degree, then the smaller id.
    """
    adj = {v: set(g.neighbours(v)) for v in range(g.n_vertices)}
    order: list[int] = []
    nbhd: list[set[int]] = []
    while adj:
        best, best_key = None, None
        for x, nx in adj.items():
            fill = 0
            ns = list(nx)
            for i, a in enumerate(ns):
                na = adj[a]
                for b in ns[i + 1:]:
                    if b not in na:
                        fill += 1
            key = (fill, len(nx), x)
            if best_key is None or key < best_key:
                best, best_key = x, key
        nx = adj.pop(best)
        for a in nx:
            adj[a].discard(best)
            adj[a] |= nx - {a}
        order.append(best)
        nbhd.append(nx)
    return order, nbhd


def _compress(bags: list[set[int]], adj: list[set[int]], root: int):
    """Contract tree edges whose one bag is contained in the other."""
    alive = [True] * len(bags)
    changed = True
    while changed:
        changed = False
        for a in range(len(bags)):
            if not alive[a]:
                continue
            for b in sorted(adj[a]):
                if bags[a] <= bags[b]:
                    # fold a into b
                    for c in adj[a]:
                        if c != b:
                            adj[c].discard(a)
                            adj[c].add(b)
                            adj[b].add(c)
                    adj[b].discard(a)
                    adj[a] = set()
                    alive[a] = False
                    if root == a:
                        root = b
                    changed = True
                    break
    keep = [i for i in range(len(bags)) if alive[i]]
    index = {old: new for new, old in enumerate(keep)}
    new_bags = [bags[i] for i in keep]
    edges = sorted({(min(index[a], index[b]), max(index[a], index[b])) for a in keep for b in adj[a]})
    return new_bags, edges, index[root]


def greedy_fill_in(g: Graph) -> TreeDecomposition:
    """Tree decomposition from the GreedyFillIn elimination ordering.

    The bag of an eliminated vertex is itself plus its neighbours at that
    moment; it hangs below the bag of whichever of those neighbours is
    eliminated next. Bags contained in an adjacent bag are then merged away.
    """
    if g.n_vertices == 0:
        raise DecompositionError("empty graph has no decomposition")
    if not g.is_connected():
        raise DecompositionError("greedy_fill_in needs a connected graph")
    order, nbhd = elimination_order(g)
    pos = {v: t for t, v in enumerate(order)}
    bags = [{x} | nb for x, nb in zip(order, nbhd)]
    adj: list[set[int]] = [set() for _ in bags]
    root = len(order) - 1
    for t, nb in enumerate(nbhd):
        if nb:
            parent = min(pos[y] for y in nb)
            adj[t].add(parent)
            adj[parent].add(t)
    bags, edges, root = _compress(bags, adj, root)
    return TreeDecomposition(tuple(tuple(sorted(b)) for b in bags), tuple(edges), root)


def path_decomposition(g: Graph, order: Sequence[int] | None = None) -> TreeDecomposition:
    """Active-vertex time slicing along ``order`` (default: GreedyFillIn order).

    Step t's bag holds the vertex processed at t plus every unprocessed
    vertex adjacent to something processed so far. Bags form a chain rooted
    at the last one.
    """
    if order is None:
        order = elimination_order(g)[0]
    order = list(order)
    if sorted(order) != list(range(g.n_vertices)):
        raise DecompositionError("order is not a permutation of the vertices")
    if not order:
        raise DecompositionError("empty graph has no decomposition")
    processed: set[int] = set()
    active: set[int] = set()
    bags = []
    for x in order:
        processed.add(x)
        active.discard(x)
        active |= set(g.neighbours(x)) - processed
        bags.append(tuple(sorted(active | {x})))
    edges = tuple((t, t + 1) for t in range(len(bags) - 1))
    return TreeDecomposition(tuple(bags), edges, len(bags) - 1)


# ------------------------------------------------------------ verification


@dataclass(frozen=True)
class Verification:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def verify_decomposition(g: Graph, td: TreeDecomposition) -> Verification:
    """Check tree-ness and properties (i)-(iii); report the first failure."""
    B = len(td.bags)
    if B == 0:
        return Verification(g.n_vertices == 0, None if g.n_vertices == 0 else "no bags")
    for a, b in td.tree_edges:
        if not (0 <= a < B and 0 <= b < B) or a == b:
            return Verification(False, f"bad tree edge ({a},{b})")
    if len(td.tree_edges) != B - 1:
        return Verification(False, f"{len(td.tree_edges)} tree edges for {B} bags: not a tree")
    adj = td.neighbours()
    seen = {0}
    stack = [0]
    while stack:
        a = stack.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    if len(seen) != B:
        return Verification(False, "tree edges do not connect all bags")
    if not 0 <= td.root < B:
        return Verification(False, f"root {td.root} out of range")

    holders: dict[int, list[int]] = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < g.n_vertices:
                return Verification(False, f"bag {i} holds unknown vertex {v}")
            holders.setdefault(v, []).append(i)
    for v in range(g.n_vertices):
        if v not in holders:
            return Verification(False, f"property (i): vertex {v} in no bag")
    bagsets = [set(b) for b in td.bags]
    for u, v in g.edges:
        if not any(v in bagsets[i] for i in holders[u]):
            return Verification(False, f"property (ii): edge ({u},{v}) uncovered")
    for v, hs in holders.items():
        hset = set(hs)
        seen = {hs[0]}
        stack = [hs[0]]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b in hset and b not in seen:
                    seen.add(b)
                    stack.append(b)
        if len(seen) != len(hs):
            return Verification(False, f"property (iii): bags holding vertex {v} are disconnected")
    return Verification(True)


def exact_treewidth(g: Graph) -> int:
    """Treewidth by dynamic programming over vertex subsets (small graphs only).

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v)
    are the vertices outside S + v reachable from v through S.
    """
    n = g.n_vertices
    if n > 16:
        raise ValueError("exact_treewidth is limited to 16 vertices")
    if n == 0:
        return -1
    nb = [sum(1 << u for u in g.neighbours(v)) for v in range(n)]

    def q_size(S, v):
        reach = 1 << v
        frontier = 1 << v
        out = 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= nb[low.bit_length() - 1]
                f ^= low
            nxt &= ~reach
            reach |= nxt
            out |= nxt & ~S
            frontier = nxt & S
        return bin(out & ~(1 << v)).count("1")

    tw = {0: -1}
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            S = sum(1 << v for v in combo)
            best = n
            for v in combo:
                rest = S & ~(1 << v)
                cand = max(tw[rest], q_size(rest, v))
                if cand < best:
                    best = cand
            tw[S] = best
    return tw[(1 << n) - 1]


# ------------------------------------------------------------ scheduling


def fusion_cost(parent: Sequence[int], daughters: Sequence[Sequence[int]], planar: bool = True) -> int:
    """Number of basis-state pairs fused when daughters arrive in this order."""
    P = set(parent)
    acc: set[int] = set()
    cost = 0
    for d in daughters:
        part = set(d) & P
        cost += count_states(len(acc), planar) * count_states(len(part), planar)
        acc |= part
    return cost


def fusion_order_optimise(parent: Sequence[int], daughters: Sequence[Sequence[int]],
                          planar: bool = True) -> list[int]:
    """Indices of ``daughters`` in the order minimising :func:`fusion_cost`.

    Exhaustive up to 8 daughters (first minimum in lexicographic order),
    otherwise ascending overlap with the parent.
    """
    d = len(daughters)
    if d == 0:
        return []
    if d > 8:
        P = set(parent)
        return sorted(range(d), key=lambda i: (len(set(daughters[i]) & P), i))
    best, best_cost = None, None
    for perm in itertools.permutations(range(d)):
        c = fusion_cost(parent, [daughters[i] for i in perm], planar)
        if best_cost is None or c < best_cost:
            best, best_cost = perm, c
    return list(best)


@dataclass(frozen=True)
class BagPlan:
    """What the engine does at one bag.

    ``steps`` interleaves ``("edge", u, v)`` and ``("delete", x)`` in
    execution order; ``edge_plan`` and ``delete_set`` are its projections.
    ``prune_lookahead[k]`` lists the edges still ahead after the k-th edge
    of this bag (the remainder of this bag plus the whole parent bag);
    ``initial_lookahead`` is the same before the first edge.
    """

    bag: int
    vertices: tuple[int, ...]
    parent: int | None
    fuse_order: tuple[int, ...]
    insert_set: tuple[int, ...]
    edge_plan: tuple[tuple[int, int], ...]
    delete_set: tuple[int, ...]
    steps: tuple[tuple, ...]
    out_scope: tuple[int, ...]
    initial_lookahead: frozenset
    prune_lookahead: tuple[frozenset, ...]


@dataclass(frozen=True)
class Schedule:
    td: TreeDecomposition
    root: int
    postorder: tuple[int, ...]
    plans: dict

    @property
    def n_fusions(self) -> int:
        return sum(len(p.fuse_order) - 1 for p in self.plans.values() if p.fuse_order)

    def ordered_plans(self):
        return [self.plans[b] for b in self.postorder]


def _rooted(td: TreeDecomposition, root: int):
    adj = td.neighbours()
    parent = {root: None}
    children: dict[int, list[int]] = {b: [] for b in range(len(td.bags))}
    stack = [root]
    while stack:
        a = stack.pop()
        for b in sorted(adj[a]):
            if b not in parent:
                parent[b] = a
                children[a].append(b)
                stack.append(b)
    return parent, children


def _fusions_for_root(td: TreeDecomposition, root: int) -> int:
    adj = td.neighbours()
    F = 0
    for b, nbrs in enumerate(adj):
        d = len(nbrs) if b == root else len(nbrs) - 1
        if d >= 1:
            F += d - 1
    return F


def _worst_case(N, M, B, F, n_max, planar):
    C = count_states(n_max, planar)
    return (N + M + B) * C * n_max + F * C * C * n_max


def choose_root(g: Graph, td: TreeDecomposition, planar: bool = True) -> int:
    """Bag minimising the worst-case cost estimate when used as root."""
    costs = [
        _worst_case(g.n_vertices, g.n_edges, td.n_bags, _fusions_for_root(td, r), td.n_max, planar)
        for r in range(td.n_bags)
    ]
    return min(range(td.n_bags), key=lambda r: (costs[r], r))


def build_schedule(g: Graph, td: TreeDecomposition, root_choice=None,
                   planar: bool = True) -> Schedule:
    """Root the decomposition and plan every bag.

    ``root_choice`` is a bag index, :data:`AUTO`, or None for ``td.root``.
    Each edge goes to the first bag in post-order holding both endpoints;
    each vertex is deleted in the last bag in post-order holding it, right
    after its last edge there.
    """
    check = verify_decomposition(g, td)
    if not check:
        raise DecompositionError(f"invalid decomposition: {check.violation}")
    if root_choice is None:
        root = td.root
    elif root_choice == AUTO:
        root = choose_root(g, td, planar)
    else:
        root = int(root_choice)
        if not 0 <= root < td.n_bags:
            raise DecompositionError(f"root {root} out of range")
    parent, children = _rooted(td, root)
    bagsets = [set(b) for b in td.bags]

    fuse = {}
    for b in range(td.n_bags):
        kids = children[b]
        perm = fusion_order_optimise(td.bags[b], [td.bags[k] for k in kids], planar)
        fuse[b] = tuple(kids[i] for i in perm)

    postorder: list[int] = []
    stack = [(root, False)]
    while stack:
        b, done = stack.pop()
        if done:
            postorder.append(b)
            continue
        stack.append((b, True))
        for k in reversed(fuse[b]):
            stack.append((k, False))
    rank = {b: i for i, b in enumerate(postorder)}

    holders: dict[int, list[int]] = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            holders.setdefault(v, []).append(i)
    edges_at: dict[int, list[tuple[int, int]]] = {b: [] for b in range(td.n_bags)}
    for u, v in g.edges:
        cands = [b for b in holders[u] if v in bagsets[b]]
        edges_at[min(cands, key=rank.__getitem__)].append((u, v))
    delete_at: dict[int, list[int]] = {b: [] for b in range(td.n_bags)}
    for v, hs in holders.items():
        delete_at[max(hs, key=rank.__getitem__)].append(v)

    steps_at = {}
    for b in range(td.n_bags):
        pending = sorted(edges_at[b])
        dels = sorted(delete_at[b])
        steps: list[tuple] = []
        # delete-bound vertices are retired as early as possible, cheapest first
        while dels:
            dels.sort(key=lambda x: (sum(1 for e in pending if x in e), x))
            x = dels.pop(0)
            mine = [e for e in pending if x in e]
            steps += [("edge", u, v) for u, v in mine]
            pending = [e for e in pending if x not in e]
            steps.append(("delete", x))
        steps += [("edge", u, v) for u, v in pending]
        steps_at[b] = steps

    plans = {}
    for b in range(td.n_bags):
        kids = fuse[b]
        arriving = set().union(*(bagsets[k] & bagsets[b] for k in kids)) if kids else set()
        steps = steps_at[b]
        edge_plan = tuple((s[1], s[2]) for s in steps if s[0] == "edge")
        par = parent[b]
        parent_edges = frozenset(edges_at[par]) if par is not None else frozenset()
        lookahead = tuple(frozenset(edge_plan[k + 1:]) | parent_edges for k in range(len(edge_plan)))
        out_scope = tuple(sorted(bagsets[b] & bagsets[par])) if par is not None else ()
        plans[b] = BagPlan(
            bag=b,
            vertices=td.bags[b],
            parent=par,
            fuse_order=kids,
            insert_set=tuple(sorted(bagsets[b] - arriving)),
            edge_plan=edge_plan,
            delete_set=tuple(s[1] for s in steps if s[0] == "delete"),
            steps=tuple(steps),
            out_scope=out_scope,
            initial_lookahead=frozenset(edge_plan) | parent_edges,
            prune_lookahead=lookahead,
        )
    return Schedule(td.with_root(root), root, tuple(postorder), plans)


def audit_schedule(g: Graph, schedule: Schedule) -> list[str]:
    """Replay a schedule symbolically; return every structural problem found."""
    problems = []
    seen_edges: list[tuple[int, int]] = []
    deleted: list[int] = []
    out: dict[int, set[int]] = {}
    for b in schedule.postorder:
        plan = schedule.plans[b]
        scope: set[int] = set()
        for k in plan.fuse_order:
            scope |= out.pop(k, set())
        if scope & set(plan.insert_set):
            problems.append(f"bag {b}: inserting vertices already in scope")
        scope |= set(plan.insert_set)
        if scope != set(plan.vertices):
            problems.append(f"bag {b}: scope {sorted(scope)} != bag {list(plan.vertices)}")
        for step in plan.steps:
            if step[0] == "edge":
                _, u, v = step
                if u not in scope or v not in scope:
                    problems.append(f"bag {b}: edge ({u},{v}) processed out of scope")
                seen_edges.append((min(u, v), max(u, v)))
            else:
                x = step[1]
                if x not in scope:
                    problems.append(f"bag {b}: deleting {x} not in scope")
                scope.discard(x)
                deleted.append(x)
        if scope != set(plan.out_scope):
            problems.append(f"bag {b}: leaves scope {sorted(scope)}, expected {list(plan.out_scope)}")
        out[b] = scope
    want = sorted((min(u, v), max(u, v)) for u, v in g.edges)
    if sorted(seen_edges) != want:
        problems.append("edges not processed exactly once")
    if sorted(deleted) != list(range(g.n_vertices)):
        problems.append("vertices not deleted exactly once")
    return problems


def estimate_cost(g: Graph, td: TreeDecomposition, schedule: Schedule, planar: bool = True) -> int:
    """Worst-case operation count (N+M+B) C n + F C^2 n at the largest bag size n."""
    return _worst_case(g.n_vertices, g.n_edges, td.n_bags, schedule.n_fusions, td.n_max, planar)


def max_fusion_pairs(schedule: Schedule, planar: bool = True) -> int:
    """Sum of the per-bag fusion costs under the chosen fusion orders."""
    td = schedule.td
    return sum(
        fusion_cost(td.bags[b], [td.bags[k] for k in p.fuse_order], planar)
        for b, p in schedule.plans.items() if p.fuse_order
    )


# ------------------------------------------------------------ text IO


def format_decomposition(td: TreeDecomposition) -> str:
    lines = [f"{td.n_bags} {td.n_max}"]
    lines += [" ".join(map(str, b)) for b in td.bags]
    lines += [f"{a} {b}" for a, b in td.tree_edges]
    lines.append(f"root {td.root}")
    return "\n".join(lines) + "\n"


def parse_decomposition(text: str) -> TreeDecomposition:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    try:
        B, n_max = map(int, lines[0].split())
        bags = [tuple(int(t) for t in lines[1 + i].split()) for i in range(B)]
        tree_edges = []
        for i in range(B - 1):
            a, b = map(int, lines[1 + B + i].split())
            tree_edges.append((a, b))
        tail = lines[B + B].split() if B else lines[1].split()
        if len(tail) != 2 or tail[0] != "root":
            raise DecompositionError("missing 'root r' line")
        root = int(tail[1])
        extra = lines[B + B + 1:] if B else lines[2:]
        # `decompose` output ends with an estimate line; accept it on re-import
        if any(not ln.startswith("estimate") for ln in extra):
            raise DecompositionError(f"unexpected trailing lines: {extra}")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, DecompositionError):
            raise
        raise DecompositionError(f"malformed decomposition text: {exc}") from None
    td = TreeDecomposition(tuple(bags), tuple(tree_edges), root)
    if td.n_max != n_max:
        raise DecompositionError(f"header n_max {n_max} but largest bag has {td.n_max}")
    return td


__all__ = [
    "AUTO", "BagPlan", "DecompositionError", "Schedule", "TreeDecomposition", "Verification",
    "audit_schedule", "build_schedule", "catalan", "choose_root", "elimination_order",
    "estimate_cost", "exact_treewidth", "format_decomposition", "fusion_cost",
    "fusion_order_optimise", "greedy_fill_in", "max_fusion_pairs", "parse_decomposition",
    "path_decomposition", "verify_decomposition",
]
