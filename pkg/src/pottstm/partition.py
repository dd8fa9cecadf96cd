"""Set partitions of the active vertices in canonical restricted-growth form.

A partition over an ordered ``scope`` is a tuple of block labels, one per
scope position, where the first occurrence of each block (scanning left to
right) gets the smallest unused label. Two partitions of the same scope are
equal iff their label tuples are equal, so label tuples double as hash keys
for the transfer-matrix state tables.

The module-level ``*_labels`` helpers work on bare tuples and are what the
engine's inner loops call; :class:`SetPartition` wraps them with a scope for
the public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Labels = tuple[int, ...]


def canonical_labels(labels: Iterable[int]) -> Labels:
    """Relabel to restricted-growth form."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def join_labels(labels: Labels, a: int, b: int) -> Labels:
    """Merge the blocks at positions ``a`` and ``b``; stays canonical.

    Folding the later-opened block into the earlier one keeps the order of
    first occurrences, so only labels above the removed one shift down.
    """
    x, y = labels[a], labels[b]
    if x == y:
        return labels
    if x > y:
        x, y = y, x
    return tuple(x if t == y else (t - 1 if t > y else t) for t in labels)


def delete_label(labels: Labels, pos: int) -> tuple[Labels, bool]:
    c = labels[pos]
    rest = labels[:pos] + labels[pos + 1:]
    if c not in rest:
        return tuple(t - 1 if t > c else t for t in rest), True
    return canonical_labels(rest), False


def blocks_of(scope: Sequence[int], labels: Labels) -> list[list[int]]:
    out: list[list[int]] = []
    for v, lab in zip(scope, labels):
        if lab == len(out):
            out.append([])
        out[lab].append(v)
    return out


@dataclass(frozen=True)
class SetPartition:
    scope: tuple[int, ...]
    labels: Labels

    def __post_init__(self):
        scope = tuple(self.scope)
        labels = tuple(self.labels)
        if len(scope) != len(labels):
            raise ValueError("scope and labels differ in length")
        if len(set(scope)) != len(scope):
            raise ValueError(f"duplicate vertex in scope {scope}")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "labels", canonical_labels(labels))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], scope: Sequence[int] | None = None):
        blocks = [list(b) for b in blocks]
        owner = {v: i for i, b in enumerate(blocks) for v in b}
        if scope is None:
            scope = sorted(owner)
        return cls(tuple(scope), tuple(owner[v] for v in scope))

    def blocks(self) -> list[list[int]]:
        return blocks_of(self.scope, self.labels)

    def index(self, v: int) -> int:
        try:
            return self.scope.index(v)
        except ValueError:
            raise KeyError(f"vertex {v} not in scope {self.scope}") from None

    def same_block(self, i: int, j: int) -> bool:
        return self.labels[self.index(i)] == self.labels[self.index(j)]

    def __str__(self):
        blocks = sorted(sorted(b) for b in self.blocks())
        return "{" + ",".join("{" + ",".join(map(str, b)) + "}" for b in blocks) + "}"


def singleton_partition(scope: Sequence[int]) -> SetPartition:
    return SetPartition(tuple(scope), tuple(range(len(scope))))


def join_vertices(p: SetPartition, i: int, j: int) -> SetPartition:
    """Amalgamate the blocks containing ``i`` and ``j``."""
    return SetPartition(p.scope, join_labels(p.labels, p.index(i), p.index(j)))


def delete_vertex(p: SetPartition, i: int) -> tuple[SetPartition, bool]:
    """Remove ``i``; the flag says whether it was a singleton (weight gets a factor Q)."""
    pos = p.index(i)
    labels, was_singleton = delete_label(p.labels, pos)
    return SetPartition(p.scope[:pos] + p.scope[pos + 1:], labels), was_singleton


def lattice_join(p1: SetPartition, p2: SetPartition) -> SetPartition:
    """Join in the partition lattice over the union of both scopes.

    Vertices missing from one operand count as singletons there. Each block
    of ``p2`` is turned into a chain of joins (every vertex linked to the
    previous vertex of its block), which is then applied to ``p1`` lifted
    onto the union scope.
    """
    scope = tuple(sorted(set(p1.scope) | set(p2.scope)))
    pos = {v: k for k, v in enumerate(scope)}
    parent = list(range(len(scope)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in (p1, p2):
        last: dict[int, int] = {}
        for v, lab in zip(p.scope, p.labels):
            k = pos[v]
            if lab in last:
                a, b = find(last[lab]), find(k)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            last[lab] = k
    return SetPartition(scope, canonical_labels(find(k) for k in range(len(scope))))


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("n must be >= 0")
    c = 1
    for k in range(n):
        c = c * 2 * (2 * k + 1) // (k + 2)
    return c


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    if n < 0:
        raise ValueError("n must be >= 0")
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def count_states(n: int, planar: bool) -> int:
    """Upper bound on partitions of a bag of size ``n``: Catalan if planar, else Bell."""
    return catalan(n) if planar else bell(n)


def all_partitions(n: int) -> Iterable[Labels]:
    """Every restricted-growth string of length ``n`` (there are Bell(n))."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for lab in range(top + 2):
            prefix.append(lab)
            yield from rec(prefix, max(top, lab))
            prefix.pop()

    yield from rec([0], 0)
