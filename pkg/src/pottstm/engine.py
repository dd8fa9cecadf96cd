"""Tree-decomposed transfer matrix for the Fortuin-Kasteleyn partition function.

A state maps canonical partitions of the active vertices to weights. Bags
are visited in post-order: daughter states are fused by the partition-lattice
join, fresh vertices enter as singletons, every edge acts as ``1 + v J_ij``
and finished vertices are deleted (factor Q when they were singletons).

Exact weights are kept internally as single Python integers, the polynomial
evaluated at a power of two wide enough that no coefficient can spill into
its neighbour. Addition and multiplication then run at C speed; the public
:class:`~pottstm.weights.Weight` form is recovered only at the end (or for
trace snapshots).
"""

from __future__ import annotations

import math
import operator
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .graph import Graph
from .partition import SetPartition, bell, canonical_labels, catalan
from .treedecomp import AUTO, Schedule, TreeDecomposition, build_schedule, greedy_fill_in, path_decomposition
from .weights import Mode, Weight, adaptive_crt_run, evaluate, one, weight_mul


class EngineError(RuntimeError):
    pass


# ------------------------------------------------------------------ rings


class _PackedUnivariate:
    """Integer polynomials in Q packed as sum c_k 2^(bits*k), signed slots.

    For v = num/den the edge operator is scaled to ``den + num J``, so the
    result is Z times den^M with integer coefficients.
    """

    def __init__(self, v: Fraction, n_edges: int):
        self.id_factor = v.denominator
        self.join_factor = v.numerator
        bound = (abs(self.id_factor) + abs(self.join_factor)) ** n_edges
        self.bits = bound.bit_length() + 2
        self.one = 1
        self.add = operator.add
        self.mul = operator.mul
        shift = self.bits
        self.mul_q = lambda w: w << shift
        a, b = self.id_factor, self.join_factor
        self.scale_id = None if a == 1 else (lambda w: w * a)
        self.scale_join = None if b == 0 else (lambda w: w * b)

    def unpack(self, w: int) -> list[int]:
        bits = self.bits
        base = 1 << bits
        mask = base - 1
        half = base >> 1
        out = []
        while w:
            c = w & mask
            if c >= half:
                c -= base
            out.append(c)
            w = (w - c) >> bits
        return out

    def pack(self, coeffs) -> int:
        w = 0
        for c in reversed(list(coeffs)):
            w = (w << self.bits) + c
        return w

    def to_weight(self, w) -> Weight:
        return Weight.univariate(self.unpack(w))

    def from_weight(self, weight: Weight) -> int:
        return self.pack(weight.coeffs)


class _PackedBivariate(_PackedUnivariate):
    """Q^k v^j lives in slot ``j*(N+1) + k``; Q-degree never exceeds N."""

    def __init__(self, n_vertices: int, n_edges: int):
        super().__init__(Fraction(1), n_edges)
        self.stride = n_vertices + 1
        self.join_factor = 1 << (self.bits * self.stride)
        jf = self.join_factor
        self.scale_join = lambda w: w * jf

    def to_weight(self, w) -> Weight:
        flat = self.unpack(w)
        rows = [flat[i:i + self.stride] for i in range(0, len(flat), self.stride)]
        return Weight.bivariate(rows)

    def from_weight(self, weight: Weight) -> int:
        flat = []
        for row in weight.coeffs:
            flat += list(row) + [0] * (self.stride - len(row))
        return self.pack(flat)


class _Modular:
    """Residue polynomials as tuples, schoolbook arithmetic mod p."""

    def __init__(self, p: int, v: Fraction):
        self.p = p
        self.vm = v.numerator * pow(v.denominator, -1, p) % p
        self.one = (1,)
        self.scale_id = None
        vm = self.vm
        self.scale_join = None if vm == 0 else (lambda w: tuple(c * vm % p for c in w))
        self.mul_q = lambda w: (0,) + w

    def add(self, x, y):
        p = self.p
        if len(x) < len(y):
            x, y = y, x
        out = list(x)
        for i, c in enumerate(y):
            out[i] = (out[i] + c) % p
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    def mul(self, x, y):
        if not x or not y:
            return ()
        p = self.p
        out = [0] * (len(x) + len(y) - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    out[i + j] += a * b
        out = [c % p for c in out]
        while out and out[-1] == 0:
            out.pop()
        return tuple(out)

    def to_weight(self, w) -> Weight:
        return Weight.modular(w, self.p)

    def from_weight(self, weight: Weight):
        return tuple(weight.coeffs)


class _ModularPoint:
    """Z(q0, v) mod p for a fixed integer point q0."""

    def __init__(self, p: int, q0: int, v: Fraction):
        self.p = p
        vm = v.numerator * pow(v.denominator, -1, p) % p
        q0 %= p
        self.one = 1
        self.add = lambda x, y: (x + y) % p
        self.mul = lambda x, y: x * y % p
        self.mul_q = lambda w: w * q0 % p
        self.scale_id = None
        self.scale_join = None if vm == 0 else (lambda w: w * vm % p)

    def to_weight(self, w) -> Weight:
        return Weight.modular([w], self.p)

    def from_weight(self, weight: Weight):
        return weight.coeffs[0] if weight.coeffs else 0


class _Scalar:
    def __init__(self, q: float, v: float):
        q, v = float(q), float(v)
        self.one = 1.0
        self.add = operator.add
        self.mul = operator.mul
        self.mul_q = lambda w: w * q
        self.scale_id = None
        self.scale_join = None if v == 0.0 else (lambda w: w * v)

    def to_weight(self, w) -> Weight:
        return Weight.scalar(w)

    def from_weight(self, weight: Weight):
        return weight.coeffs


def _as_fraction(v) -> Fraction:
    if isinstance(v, float):
        if not v.is_integer():
            raise EngineError(f"exact modes need a rational v, got float {v!r}")
    return Fraction(v)


# ------------------------------------------------------------------ config / state


@dataclass
class EngineConfig:
    """How to weight and run the transfer matrix.

    ``v`` is fixed for UNIVARIATE, MODULAR and SCALAR modes (rationals are
    fine in the exact ones) and ignored in BIVARIATE mode. ``q`` is only read
    in SCALAR mode, or in MODULAR mode to evaluate at a single point.
    ``trace`` receives ``(bag, phase, snapshot)``.
    """

    mode: Mode = Mode.UNIVARIATE
    v: object = -1
    q: object = None
    prime: int | None = None
    pruning: bool = False
    trace: Callable | None = None

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.mode is Mode.MODULAR and not self.prime:
            raise EngineError("MODULAR mode needs a prime")
        if self.mode is Mode.SCALAR and (self.q is None or self.v is None):
            raise EngineError("SCALAR mode needs numeric q and v")
        if self.pruning:
            if self.mode not in (Mode.UNIVARIATE, Mode.MODULAR):
                raise EngineError("pruning needs an exact fixed-v mode")
            if _as_fraction(self.v) != -1:
                raise EngineError("pruning is only valid at v = -1")

    def make_ring(self, n_vertices: int, n_edges: int):
        if self.mode is Mode.UNIVARIATE:
            return _PackedUnivariate(_as_fraction(self.v), n_edges)
        if self.mode is Mode.BIVARIATE:
            return _PackedBivariate(n_vertices, n_edges)
        if self.mode is Mode.MODULAR:
            if self.q is not None:
                return _ModularPoint(self.prime, int(self.q), _as_fraction(self.v))
            return _Modular(self.prime, _as_fraction(self.v))
        return _Scalar(self.q, self.v)


@dataclass
class WeightedState:
    """Superposition of partitions of ``scope`` (ascending vertex ids).

    ``table`` maps label tuples to weights; inside the engine these are the
    ring's raw values, in trace snapshots they are :class:`Weight` objects.
    """

    scope: tuple[int, ...]
    table: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.table)

    def items(self) -> Iterable[tuple[SetPartition, object]]:
        for labels, w in self.table.items():
            yield SetPartition(self.scope, labels), w

    def weight_of(self, blocks, default=None):
        labels = SetPartition.from_blocks(blocks, self.scope).labels
        return self.table.get(labels, default)


@dataclass
class RunStats:
    peak_table: int = 0
    peak_scope: int = 0
    catalan_exceeded: int = 0
    bell_exceeded: int = 0
    max_catalan_ratio: float = 0.0
    fusion_pairs: int = 0
    n_bags: int = 0
    n_max: int = 0
    n_fusions: int = 0
    seconds: float = 0.0

    def merge(self, other: "RunStats"):
        self.peak_table = max(self.peak_table, other.peak_table)
        self.peak_scope = max(self.peak_scope, other.peak_scope)
        self.catalan_exceeded += other.catalan_exceeded
        self.bell_exceeded += other.bell_exceeded
        self.max_catalan_ratio = max(self.max_catalan_ratio, other.max_catalan_ratio)
        self.fusion_pairs += other.fusion_pairs
        self.n_bags += other.n_bags
        self.n_max = max(self.n_max, other.n_max)
        self.n_fusions += other.n_fusions
        self.seconds += other.seconds


# ------------------------------------------------------------------ engine


class Engine:
    def __init__(self, config: EngineConfig, n_vertices: int, n_edges: int):
        self.config = config
        self.ring = config.make_ring(n_vertices, n_edges)
        self.stats = RunStats()

    # -- helpers

    def empty_state(self) -> WeightedState:
        return WeightedState((), {(): self.ring.one})

    def snapshot(self, state: WeightedState) -> WeightedState:
        conv = self.ring.to_weight
        return WeightedState(state.scope, {k: conv(w) for k, w in state.table.items()})

    def _record(self, state: WeightedState):
        n = len(state.table)
        s = self.stats
        if n > s.peak_table:
            s.peak_table = n
        k = len(state.scope)
        if k > s.peak_scope:
            s.peak_scope = k
        c = catalan(k)
        if n > c:
            s.catalan_exceeded += 1
        if n > bell(k):
            s.bell_exceeded += 1
        if n / c > s.max_catalan_ratio:
            s.max_catalan_ratio = n / c

    def _trace(self, bag, phase, state):
        if self.config.trace is not None:
            self.config.trace(bag, phase, self.snapshot(state))

    @staticmethod
    def _position(scope, v):
        try:
            return scope.index(v)
        except ValueError:
            raise EngineError(f"vertex {v} not in scope {scope}") from None

    # -- the four state operations

    def apply_edge(self, state: WeightedState, i: int, j: int) -> WeightedState:
        """Act with ``1 + v J_ij``."""
        a = self._position(state.scope, i)
        b = self._position(state.scope, j)
        ring = self.ring
        add, sid, sj = ring.add, ring.scale_id, ring.scale_join
        out: dict = {}
        for lab, w in state.table.items():
            x, y = lab[a], lab[b]
            wi = w if sid is None else sid(w)
            if x == y:
                if sj is not None:
                    wi = add(wi, sj(w))
                out[lab] = add(out[lab], wi) if lab in out else wi
                continue
            out[lab] = add(out[lab], wi) if lab in out else wi
            if sj is None:
                continue
            if x > y:
                x, y = y, x
            jl = tuple([x if t == y else (t - 1 if t > y else t) for t in lab])
            wj = sj(w)
            out[jl] = add(out[jl], wj) if jl in out else wj
        return WeightedState(state.scope, {k: w for k, w in out.items() if w})

    def delete_and_insert(self, state: WeightedState, delete_set=(), insert_set=()) -> WeightedState:
        """Remove ``delete_set`` (factor Q per singleton) then add ``insert_set`` as singletons."""
        scope = state.scope
        table = state.table
        delete_set = list(delete_set)
        insert_set = sorted(insert_set)
        for x in delete_set:
            if x not in scope:
                raise EngineError(f"cannot delete {x}: not in scope {scope}")
        if set(insert_set) & (set(scope) - set(delete_set)):
            raise EngineError(f"cannot insert {insert_set}: already in scope {scope}")
        add, mul_q = self.ring.add, self.ring.mul_q
        for x in delete_set:
            pos = scope.index(x)
            out: dict = {}
            for lab, w in table.items():
                c = lab[pos]
                rest = lab[:pos] + lab[pos + 1:]
                if c in rest:
                    key = canonical_labels(rest)
                else:
                    key = tuple([t - 1 if t > c else t for t in rest])
                    w = mul_q(w)
                out[key] = add(out[key], w) if key in out else w
            table = {k: w for k, w in out.items() if w}
            scope = scope[:pos] + scope[pos + 1:]
        if insert_set:
            new_scope = tuple(sorted(scope + tuple(insert_set)))
            old_pos = {v: k for k, v in enumerate(scope)}
            fresh = {v: -1 - k for k, v in enumerate(insert_set)}
            src = [old_pos.get(v) for v in new_scope]
            marks = [fresh.get(v) for v in new_scope]
            out = {}
            for lab, w in table.items():
                seen: dict = {}
                key = tuple([seen.setdefault(lab[s] if s is not None else m, len(seen))
                             for s, m in zip(src, marks)])
                out[key] = w
            table = out
            scope = new_scope
        return WeightedState(scope, table)

    def fuse(self, s1: WeightedState, s2: WeightedState) -> WeightedState:
        """Pair every entry of ``s1`` with every entry of ``s2`` via the lattice join."""
        scope = tuple(sorted(set(s1.scope) | set(s2.scope)))
        index = {v: k for k, v in enumerate(scope)}
        n = len(scope)
        pos1 = [index[v] for v in s1.scope]
        pos2 = [index[v] for v in s2.scope]
        # s1 entries lifted to the union scope: labels as block ids, absentees fresh
        free = [k for k in range(n) if scope[k] not in set(s1.scope)]
        lifted = []
        for lab, w in s1.table.items():
            ids = [0] * n
            for p, t in zip(pos1, lab):
                ids[p] = t
            top = max(lab, default=-1) + 1
            for k in free:
                ids[k] = top
                top += 1
            lifted.append((ids, top, w))
        # s2 entries as chains linking each vertex to the previous one of its block
        chains = []
        for lab, w in s2.table.items():
            last: dict = {}
            links = []
            for p, t in zip(pos2, lab):
                if t in last:
                    links.append((last[t], p))
                last[t] = p
            chains.append((links, w))
        add, mul = self.ring.add, self.ring.mul
        out: dict = {}
        self.stats.fusion_pairs += len(lifted) * len(chains)
        for ids, nb, w1 in lifted:
            for links, w2 in chains:
                if links:
                    par = list(range(nb))
                    for p, q in links:
                        x = ids[p]
                        while par[x] != x:
                            x = par[x]
                        y = ids[q]
                        while par[y] != y:
                            y = par[y]
                        if x != y:
                            if x < y:
                                par[y] = x
                            else:
                                par[x] = y
                    roots = []
                    for t in ids:
                        while par[t] != t:
                            t = par[t]
                        roots.append(t)
                else:
                    roots = ids
                seen: dict = {}
                key = tuple([seen.setdefault(t, len(seen)) for t in roots])
                w = mul(w1, w2)
                out[key] = add(out[key], w) if key in out else w
        return WeightedState(scope, {k: w for k, w in out.items() if w})

    def prune(self, state: WeightedState, lookahead) -> WeightedState:
        """Drop entries that join the two ends of an edge still to come (v = -1 only)."""
        if not self.config.pruning:
            raise EngineError("prune called with pruning disabled")
        idx = {v: k for k, v in enumerate(state.scope)}
        pairs = [(idx[u], idx[v]) for u, v in lookahead if u in idx and v in idx]
        if not pairs:
            return state
        table = {lab: w for lab, w in state.table.items()
                 if not any(lab[p] == lab[q] for p, q in pairs)}
        return WeightedState(state.scope, table)

    # -- driver

    def run(self, schedule: Schedule):
        """Execute a schedule; returns the raw root weight."""
        t0 = time.perf_counter()
        pruning = self.config.pruning
        done: dict[int, WeightedState] = {}
        result = None
        for b in schedule.postorder:
            plan = schedule.plans[b]
            state = None
            for k in plan.fuse_order:
                daughter = done.pop(k)
                state = daughter if state is None else self.fuse(state, daughter)
            if state is None:
                state = self.empty_state()
            elif len(plan.fuse_order) > 1:
                self._record(state)
                self._trace(b, "fused", state)
            if pruning:
                state = self.prune(state, plan.initial_lookahead)
            if plan.insert_set:
                state = self.delete_and_insert(state, (), plan.insert_set)
                self._record(state)
                self._trace(b, "insert", state)
            k_edge = 0
            for step in plan.steps:
                if step[0] == "edge":
                    state = self.apply_edge(state, step[1], step[2])
                    self._record(state)
                    if pruning:
                        state = self.prune(state, plan.prune_lookahead[k_edge])
                    k_edge += 1
                    self._trace(b, "edge", state)
                else:
                    state = self.delete_and_insert(state, (step[1],), ())
                    self._trace(b, "delete", state)
            if state.scope != plan.out_scope:
                raise EngineError(f"bag {b}: scope {state.scope} != expected {plan.out_scope}")
            self._trace(b, "exit", state)
            if plan.parent is None:
                result = state.table.get((), None)
            else:
                done[b] = state
        td = schedule.td
        self.stats.n_bags += td.n_bags
        self.stats.n_max = max(self.stats.n_max, td.n_max)
        self.stats.n_fusions += schedule.n_fusions
        self.stats.seconds += time.perf_counter() - t0
        return result

    def result_weight(self, raw) -> Weight:
        """Public form of a raw root weight; ``None`` (everything cancelled) is zero."""
        if raw is None:
            w = self.ring.to_weight(self.ring.one)
            return Weight.scalar(0.0) if w.mode is Mode.SCALAR else Weight(w.mode, (), w.prime)
        return self.ring.to_weight(raw)


# ------------------------------------------------------------------ front ends


@dataclass
class RunResult:
    weight: Weight
    stats: RunStats
    decompositions: list = field(default_factory=list)


def run(g: Graph, schedule: Schedule, config: EngineConfig) -> Weight:
    """Run one schedule covering all of ``g``."""
    eng = Engine(config, g.n_vertices, g.n_edges)
    return eng.result_weight(eng.run(schedule))


def _one_for(config: EngineConfig) -> Weight:
    if config.mode is Mode.MODULAR:
        return one(config.mode, config.prime)
    return one(config.mode)


def compute(g: Graph, config: EngineConfig, td: TreeDecomposition | None = None,
            root_choice=AUTO, path: bool = False, planar: bool = True) -> RunResult:
    """Partition function of ``g`` under ``config``.

    With an explicit ``td`` the whole graph runs on it. Otherwise each
    connected component gets its own GreedyFillIn (or path) decomposition
    and the component results are multiplied.
    """
    stats = RunStats()
    if td is not None:
        sched = build_schedule(g, td, root_choice if root_choice is not AUTO else None, planar)
        eng = Engine(config, g.n_vertices, g.n_edges)
        w = eng.result_weight(eng.run(sched))
        stats.merge(eng.stats)
        return RunResult(w, stats, [sched.td])
    total = _one_for(config)
    tds = []
    for comp in g.components():
        sub, _ = g.induced(comp)
        ctd = path_decomposition(sub) if path else greedy_fill_in(sub)
        sched = build_schedule(sub, ctd, root_choice, planar)
        eng = Engine(config, sub.n_vertices, sub.n_edges)
        w = eng.result_weight(eng.run(sched))
        stats.merge(eng.stats)
        tds.append(sched.td)
        total = weight_mul(total, w)
    return RunResult(total, stats, tds)


def chromatic_polynomial(g: Graph, pruning: bool = True, crt: bool = False,
                         td: TreeDecomposition | None = None, root_choice=AUTO,
                         max_primes: int | None = None) -> RunResult:
    """chi_G(Q) = Z_G(Q, -1) with exact integer coefficients."""
    if not crt:
        return compute(g, EngineConfig(Mode.UNIVARIATE, v=-1, pruning=pruning), td, root_choice)
    stats = RunStats()
    tds: list = []

    def compute_mod(p):
        res = compute(g, EngineConfig(Mode.MODULAR, v=-1, prime=p, pruning=pruning), td, root_choice)
        stats.merge(res.stats)
        tds[:] = res.decompositions
        return res.weight

    def verify_eval(q0, p):
        res = compute(g, EngineConfig(Mode.MODULAR, v=-1, q=q0, prime=p, pruning=pruning), td, root_choice)
        return evaluate(res.weight, 0)

    w = adaptive_crt_run(compute_mod, verify_eval, max_primes=max_primes)
    return RunResult(w, stats, tds)


def potts_bivariate(g: Graph, td: TreeDecomposition | None = None, root_choice=AUTO) -> RunResult:
    return compute(g, EngineConfig(Mode.BIVARIATE, v=None), td, root_choice)


def potts_univariate(g: Graph, v, td: TreeDecomposition | None = None, root_choice=AUTO):
    """Z_G(Q, v) at rational ``v``; returns (Fraction coefficients, RunResult)."""
    v = _as_fraction(v)
    res = compute(g, EngineConfig(Mode.UNIVARIATE, v=v), td, root_choice)
    scale = Fraction(v.denominator) ** g.n_edges
    return [Fraction(c) / scale for c in res.weight.coeffs], res


def potts_value(g: Graph, q: float, v: float, td: TreeDecomposition | None = None,
                root_choice=AUTO) -> RunResult:
    return compute(g, EngineConfig(Mode.SCALAR, v=float(v), q=float(q)), td, root_choice)


def coupling_to_v(K: float) -> float:
    """v = e^K - 1."""
    return math.expm1(K)
