"""Simple undirected graphs: validation, edge-list IO and a planar generator."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph on vertices ``0 .. n_vertices-1``.

    Edges are stored in input order as ``(u, v)`` tuples. Construction
    validates the simple-graph invariants (no loops, no parallel edges,
    endpoints in range).
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...] = ()
    _adj: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_vertices < 0:
            raise ValueError("negative vertex count")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        adj = [set() for _ in range(self.n_vertices)]
        for u, v in edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) has endpoint out of range")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add(key)
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbours(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def components(self) -> list[list[int]]:
        """Vertex lists of the connected components, each sorted, ordered by smallest vertex."""
        seen = [False] * self.n_vertices
        out = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in self._adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            out.append(sorted(comp))
        return out

    def is_connected(self) -> bool:
        return self.n_vertices <= 1 or len(self.components()) == 1

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..k-1``; also returns the old labels."""
        old = sorted(vertices)
        index = {v: i for i, v in enumerate(old)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph(len(old), edges), old


def disjoint_union(g: Graph, h: Graph) -> Graph:
    shift = g.n_vertices
    edges = list(g.edges) + [(u + shift, v + shift) for u, v in h.edges]
    return Graph(g.n_vertices + h.n_vertices, edges)


def parse_graph(text: bytes | str) -> Graph:
    """Parse the ``N M`` header + ``u v`` lines edge-list format."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GraphFormatError(f"not UTF-8: {exc}") from None
    header = None
    edges: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer token in {line!r}", lineno) from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphFormatError("negative count in header", lineno)
            header = (a, b)
            continue
        n, m = header
        if len(edges) >= m:
            raise GraphFormatError(f"more than {m} edge lines", lineno)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"endpoint out of range [0,{n})", lineno)
        if a == b:
            raise GraphFormatError(f"self-loop at vertex {a}", lineno)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphFormatError(f"duplicate edge, first seen on line {seen[key]}", lineno)
        seen[key] = lineno
        edges.append((a, b))
    if header is None:
        raise GraphFormatError("missing header line", 1)
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    return Graph(header[0], edges)


def serialize_graph(g: Graph) -> str:
    lines = [f"{g.n_vertices} {g.n_edges}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def connected_components(g: Graph, active_edges: Iterable[tuple[int, int]]) -> int:
    """k(A): components of ``(V, A)``, isolated vertices included."""
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    k = g.n_vertices
    for u, v in active_edges:
        if not g.has_edge(u, v):
            raise ValueError(f"({u},{v}) is not an edge of the graph")
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            k -= 1
    return k


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def random_planar_graph(n: int, seed: int, flips_per_vertex: int = 4) -> Graph:
    """Connected planar graph grown from a random triangulation.

    Each new vertex lands in a uniformly chosen face of the current
    triangulation; then ``flips_per_vertex * n`` random diagonal flips
    (skipped when they would duplicate an edge) mix the triangulation away
    from the stacked, treewidth-3 family. Finally every edge is dropped with
    probability 1/3, and spanning-tree edges of the triangulation are
    restored wherever that disconnected the graph. The result is reproducible
    for a given seed but *not* uniform over planar graphs.
    """
    if n < 3:
        raise ValueError("random_planar_graph needs n >= 3")
    rng = random.Random(seed)
    faces: dict[int, tuple[int, int, int]] = {}
    edge_faces: dict[tuple[int, int], list[int]] = {}
    edge_list: list[tuple[int, int]] = []
    next_id = 0

    def add_face(f):
        nonlocal next_id
        faces[next_id] = f
        for e in (_edge(f[0], f[1]), _edge(f[1], f[2]), _edge(f[0], f[2])):
            if e not in edge_faces:
                edge_faces[e] = []
                edge_list.append(e)
            edge_faces[e].append(next_id)
        next_id += 1

    def drop_face(i):
        f = faces.pop(i)
        for e in (_edge(f[0], f[1]), _edge(f[1], f[2]), _edge(f[0], f[2])):
            edge_faces[e].remove(i)

    # both sides of the initial triangle are faces
    add_face((0, 1, 2))
    add_face((0, 1, 2))
    for x in range(3, n):
        i = rng.choice(list(faces))
        a, b, c = faces[i]
        drop_face(i)
        add_face((a, b, x))
        add_face((b, c, x))
        add_face((a, c, x))

    for _ in range(flips_per_vertex * n if n > 3 else 0):
        k = rng.randrange(len(edge_list))
        a, b = e = edge_list[k]
        f1, f2 = edge_faces[e]
        c = next(x for x in faces[f1] if x not in e)
        d = next(x for x in faces[f2] if x not in e)
        if c == d or _edge(c, d) in edge_faces:
            continue
        drop_face(f1)
        drop_face(f2)
        del edge_faces[e]
        edge_list[k] = edge_list[-1]
        edge_list.pop()
        add_face((a, c, d))
        add_face((b, c, d))

    tri_edges = sorted(edge_list)
    kept = [e for e in tri_edges if rng.random() >= 1 / 3]

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in kept:
        parent[find(u)] = find(v)
    # BFS tree of the triangulation, in vertex order, for determinism
    full = Graph(n, tri_edges)
    seen = [False] * n
    seen[0] = True
    queue = [0]
    for x in queue:
        for y in sorted(full.neighbours(x)):
            if seen[y]:
                continue
            seen[y] = True
            queue.append(y)
            ru, rv = find(x), find(y)
            if ru != rv:
                parent[ru] = rv
                kept.append(_edge(x, y))
    return Graph(n, sorted(kept))
