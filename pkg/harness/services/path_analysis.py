"""
services/path_analysis.py — Filtration states, query/dangerous paths and the potential.

A FiltrationState holds only what is revealed after t iterations: the first t
vertices of the permutation (hence their ranks) and the independent set I_t the
greedy process has built from them.  Every classification here reads a state
and nothing else, so it cannot depend on unrevealed ranks.  Unrevealed ranks
compare as "greater than t".

Paths are tuples of vertex ids.  A query path (u_1, ..., u_k) has
rank(u_1) < ... < rank(u_k), so query and dangerous paths are vertex-simple;
enumeration raises NonSimplePathError if that ever fails.

All probabilities and potentials are exact Fractions.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from config import Config
from errors import FiltrationError, NonSimplePathError, PathError, ResourceRefusal
from services.graph_core import Graph, OrderedEdge, RankAssignment

logger = logging.getLogger(__name__)

VertexPath = Tuple[int, ...]

HALF = Fraction(1, 2)


@dataclass(frozen=True, eq=False)
class FiltrationState:
    graph: Graph
    revealed: Tuple[int, ...]
    independent_set: FrozenSet[int]
    _rank: Dict[int, int] = field(repr=False)

    @classmethod
    def initial(cls, graph: Graph) -> "FiltrationState":
        return cls(graph=graph, revealed=(), independent_set=frozenset(), _rank={})

    @classmethod
    def from_prefix(cls, graph: Graph, prefix: Sequence[int]) -> "FiltrationState":
        state = cls.initial(graph)
        for v in prefix:
            state = state.extend(v)
        return state

    def extend(self, v: int) -> "FiltrationState":
        """Reveal v as π^{-1}(t+1); v joins I iff no neighbour is already in I."""
        if not 0 <= v < self.graph.vertex_count:
            raise FiltrationError(f"unknown vertex {v}")
        if v in self._rank:
            raise FiltrationError(f"vertex {v} is already revealed at rank {self._rank[v]}")
        rank = dict(self._rank)
        rank[v] = self.t + 1
        members = self.independent_set
        if not self.graph.adjacency[v] & members:
            members = members | {v}
        return FiltrationState(self.graph, self.revealed + (v,), members, rank)

    @property
    def t(self) -> int:
        return len(self.revealed)

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def is_final(self) -> bool:
        return self.t == self.n

    def rank(self, v: int) -> Optional[int]:
        """Rank of v if revealed, else None (known only to exceed t)."""
        return self._rank.get(v)

    def is_revealed(self, v: int) -> bool:
        return v in self._rank

    def unrevealed(self) -> List[int]:
        return [v for v in self.graph.vertices() if v not in self._rank]

    def has_mis_neighbor(self, v: int) -> bool:
        return bool(self.graph.adjacency[v] & self.independent_set)


def filtration(g: Graph, ranks: RankAssignment, t: int) -> FiltrationState:
    ranks.check_covers(g)
    if not 0 <= t <= g.vertex_count:
        raise FiltrationError(f"time {t} outside 0..{g.vertex_count}")
    return FiltrationState.from_prefix(g, ranks.prefix(t))


# ── edge predicates ──────────────────────────────────────────────────────────

def _certain_query(state: FiltrationState, x: int, y: int) -> bool:
    """(x, y) as the last edge of a query path: y is certain to query x.

    rank(x) ≤ t, rank(x) < rank(y), and no neighbour w of y with
    rank(w) < rank(x) is in I_t.
    """
    rx = state.rank(x)
    if rx is None:
        return False
    ry = state.rank(y)
    if ry is not None and ry <= rx:
        return False
    for w in state.graph.adjacency[y]:
        if w in state.independent_set and state.rank(w) < rx:
            return False
    return True


def _dangerous_tail(state: FiltrationState, u: int, z: int) -> bool:
    """rank(u) > t, rank(z) > t, and no revealed neighbour of z is in I_t."""
    return not state.is_revealed(u) and not state.is_revealed(z) and not state.has_mis_neighbor(z)


def _check_path(state: FiltrationState, path: Sequence[int], min_vertices: int) -> VertexPath:
    path = tuple(path)
    if len(path) < min_vertices:
        raise PathError(f"path {path} needs at least {min_vertices} vertices")
    g = state.graph
    for v in path:
        if not 0 <= v < g.vertex_count:
            raise PathError(f"path {path} names unknown vertex {v}")
    for x, y in zip(path, path[1:]):
        if y not in g.adjacency[x]:
            raise PathError(f"path {path}: {x} and {y} are not adjacent")
    return path


def is_query_path(state: FiltrationState, path: Sequence[int]) -> bool:
    path = _check_path(state, path, 2)
    return all(_certain_query(state, x, y) for x, y in zip(path, path[1:]))


def is_dangerous_path(state: FiltrationState, path: Sequence[int]) -> bool:
    """(u_1, ..., u_k, z), k ≥ 1: query-path prefix (when k ≥ 2) plus the dangerous tail."""
    path = _check_path(state, path, 2)
    prefix = path[:-1]
    if len(prefix) >= 2 and not all(_certain_query(state, x, y) for x, y in zip(prefix, prefix[1:])):
        return False
    return _dangerous_tail(state, path[-2], path[-1])


def dangerous_probability_oracle(
    state: FiltrationState,
    path: Sequence[int],
    bound: Optional[int] = None,
) -> Fraction:
    """Exact Pr[z eventually queries u_k | F_t] over every completion of the revealed prefix."""
    path = _check_path(state, path, 2)
    bound = Config.ORACLE_BOUND if bound is None else bound
    rest = state.unrevealed()
    if len(rest) > bound:
        logger.warning("probability oracle refused at t=%d: %d unrevealed vertices", state.t, len(rest))
        raise ResourceRefusal(
            f"oracle would enumerate {len(rest)}! = {factorial(len(rest))} completions",
            bound=bound,
            size=len(rest),
        )
    u, z = path[-2], path[-1]
    hits = 0
    total = 0
    for completion in itertools.permutations(rest):
        final = state
        for v in completion:
            final = final.extend(v)
        total += 1
        if _certain_query(final, u, z):
            hits += 1
    return Fraction(hits, total)


# ── enumeration ──────────────────────────────────────────────────────────────

def _collect(state: FiltrationState, edge: OrderedEdge) -> Tuple[List[VertexPath], List[VertexPath]]:
    """Explicit listing of Q_t(a, b) and D_t(a, b)."""
    a, b = edge
    g = state.graph
    if b not in g.adjacency[a]:
        raise PathError(f"{edge} is not an edge")
    queries: List[VertexPath] = []
    dangerous: List[VertexPath] = []

    if _dangerous_tail(state, a, b):
        dangerous.append((a, b))
    if not _certain_query(state, a, b):
        return queries, dangerous

    stack: List[VertexPath] = [(a, b)]
    while stack:
        path = stack.pop()
        queries.append(path)
        last = path[-1]
        on_path = set(path)
        if state.is_revealed(last):
            for x in sorted(g.adjacency[last]):
                if _certain_query(state, last, x):
                    if x in on_path:
                        raise NonSimplePathError(path + (x,))
                    stack.append(path + (x,))
        else:
            for z in sorted(g.adjacency[last]):
                if _dangerous_tail(state, last, z):
                    if z in on_path:
                        raise NonSimplePathError(path + (z,))
                    dangerous.append(path + (z,))
    queries.sort()
    dangerous.sort()
    return queries, dangerous


class PathCache:
    """Memoized (Q_t, D_t) listings for one graph, keyed by (revealed prefix, edge)."""

    def __init__(self, graph: Graph):
        self.graph = graph
        self._store: Dict[Tuple[VertexPath, OrderedEdge], Tuple[List[VertexPath], List[VertexPath]]] = {}

    def __len__(self) -> int:
        return len(self._store)

    def listing(self, state: FiltrationState, edge: OrderedEdge) -> Tuple[List[VertexPath], List[VertexPath]]:
        if state.graph is not self.graph and state.graph != self.graph:
            raise FiltrationError("path cache belongs to a different graph")
        key = (state.revealed, edge)
        found = self._store.get(key)
        if found is None:
            found = _collect(state, edge)
            self._store[key] = found
        return found


def _listing(state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache]):
    return _collect(state, edge) if cache is None else cache.listing(state, edge)


def enumerate_query_paths(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> List[VertexPath]:
    """Q_t(a, b): every query path whose first two vertices are (a, b), sorted."""
    return _listing(state, edge, cache)[0]


def enumerate_dangerous_paths(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> List[VertexPath]:
    """D_t(a, b): the bare edge when dangerous, plus each query path extended by a dangerous tail."""
    return _listing(state, edge, cache)[1]


def _forward_counts(state: FiltrationState) -> Tuple[Dict[int, int], Dict[int, int], Dict[int, int]]:
    """Per revealed vertex y: query paths and dangerous paths continuing from y.

    up[y]   = Σ_{x : y→x certain} (1 + up[x])
    dang[y] = Σ_{x : y→x certain} (tails(x) if x unrevealed else dang[x])
    Certain edges raise rank, so revealed vertices are filled by decreasing rank.
    """
    g = state.graph
    tails = {
        x: sum(1 for z in g.adjacency[x] if _dangerous_tail(state, x, z))
        for x in state.unrevealed()
    }
    up: Dict[int, int] = {}
    dang: Dict[int, int] = {}
    for y in reversed(state.revealed):
        q = d = 0
        for x in g.adjacency[y]:
            if not _certain_query(state, y, x):
                continue
            if state.is_revealed(x):
                q += 1 + up[x]
                d += dang[x]
            else:
                q += 1
                d += tails[x]
        up[y] = q
        dang[y] = d
    return up, dang, tails


def count_query_paths(state: FiltrationState, edge: OrderedEdge) -> int:
    a, b = edge
    if b not in state.graph.adjacency[a]:
        raise PathError(f"{edge} is not an edge")
    if not _certain_query(state, a, b):
        return 0
    up, _, _ = _forward_counts(state)
    return 1 + up.get(b, 0)


def count_dangerous_paths(state: FiltrationState, edge: OrderedEdge) -> int:
    a, b = edge
    if b not in state.graph.adjacency[a]:
        raise PathError(f"{edge} is not an edge")
    count = 1 if _dangerous_tail(state, a, b) else 0
    if _certain_query(state, a, b):
        _, dang, tails = _forward_counts(state)
        count += dang[b] if state.is_revealed(b) else tails[b]
    return count


def _use_listing(state: FiltrationState) -> bool:
    return state.n <= Config.LIST_ENUMERATION_MAX_N


def path_counts(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> Tuple[int, int]:
    """(|Q_t(a,b)|, |D_t(a,b)|), by listing for small n and by DP above that.  A cache forces listing."""
    if cache is not None or _use_listing(state):
        queries, dangerous = _listing(state, edge, cache)
        return len(queries), len(dangerous)
    return count_query_paths(state, edge), count_dangerous_paths(state, edge)


def count_query_paths_ending_at(state: FiltrationState) -> Tuple[int, ...]:
    """Per vertex v, the query paths (of any length ≥ 2) ending at v.

    Backward DP: c(v) = Σ_{w : w→v certain} (1 + c(w)); w is always revealed
    and has lower rank than v, so revealed vertices in rank order suffice.
    """
    g = state.graph
    counts = [0] * g.vertex_count
    for v in list(state.revealed) + state.unrevealed():
        counts[v] = sum(
            1 + counts[w] for w in g.adjacency[v] if _certain_query(state, w, v)
        )
    return tuple(counts)


# ── potential ────────────────────────────────────────────────────────────────

def potential(state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None) -> Fraction:
    """Φ_t(a, b) = |Q_t(a, b)| + |D_t(a, b)| / 2."""
    q, d = path_counts(state, edge, cache)
    return q + d * HALF


@dataclass(frozen=True)
class LedgerRow:
    t: int
    q: int
    d: int
    phi: Fraction


@dataclass(frozen=True)
class PotentialLedger:
    edge: OrderedEdge
    rows: Tuple[LedgerRow, ...]

    def at(self, t: int) -> LedgerRow:
        return self.rows[t]


def potential_ledger(g: Graph, ranks: RankAssignment, edge: OrderedEdge) -> PotentialLedger:
    """(q, d, Φ) for one ordered edge at every t = 0..n along one permutation."""
    ranks.check_covers(g)
    state = FiltrationState.initial(g)
    rows = []
    for t in range(g.vertex_count + 1):
        q, d = path_counts(state, edge)
        rows.append(LedgerRow(t=t, q=q, d=d, phi=q + d * HALF))
        if t < g.vertex_count:
            state = state.extend(ranks.vertex(t + 1))
    return PotentialLedger(edge=edge, rows=tuple(rows))


def _successors(state: FiltrationState) -> List[FiltrationState]:
    if state.is_final:
        raise FiltrationError("no successor states at t = n")
    return [state.extend(v) for v in state.unrevealed()]


def one_step_expectation(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> Fraction:
    """E[Φ_{t+1}(a, b) | F_t]: π^{-1}(t+1) is uniform over the n - t unrevealed vertices."""
    nxt = _successors(state)
    return sum((potential(s, edge, cache) for s in nxt), Fraction(0)) / len(nxt)


def query_increment_check(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> Tuple[Fraction, Fraction]:
    """(E[|Q_{t+1}| - |Q_t| | F_t], |D_t| / (n - t)); the two are equal."""
    nxt = _successors(state)
    q_now, d_now = path_counts(state, edge, cache)
    gained = sum(path_counts(s, edge, cache)[0] - q_now for s in nxt)
    return Fraction(gained, len(nxt)), Fraction(d_now, len(nxt))


def extension_set(state: FiltrationState, path: Sequence[int]) -> FrozenSet[int]:
    """A_R: neighbours w of z other than u_k, unrevealed, with no revealed MIS neighbour."""
    path = tuple(path)
    if not is_dangerous_path(state, path):
        raise PathError(f"{path} is not dangerous at t={state.t}")
    u, z = path[-2], path[-1]
    return frozenset(
        w for w in state.graph.adjacency[z]
        if w != u and not state.is_revealed(w) and not state.has_mis_neighbor(w)
    )


def delta_r(before: FiltrationState, after: FiltrationState, path: VertexPath) -> int:
    """Net change in dangerous paths attributable to R over one reveal."""
    created = 0
    for w in before.graph.adjacency[path[-1]]:
        extended = path + (w,)
        if is_dangerous_path(after, extended) and not is_dangerous_path(before, extended):
            if w in path:
                raise NonSimplePathError(extended)
            created += 1
    return created - (0 if is_dangerous_path(after, path) else 1)


def delta_r_expectation(state: FiltrationState, path: Sequence[int]) -> Fraction:
    """E[Δ_R | F_t], exact over the n - t choices of π^{-1}(t+1).  At most -2/(n-t)."""
    path = tuple(path)
    if not is_dangerous_path(state, path):
        raise PathError(f"{path} is not dangerous at t={state.t}")
    nxt = _successors(state)
    return Fraction(sum(delta_r(state, s, path) for s in nxt), len(nxt))


def evolution_violations(
    state: FiltrationState, edge: OrderedEdge, cache: Optional[PathCache] = None
) -> List[str]:
    """Check, over every successor, that new query paths were dangerous at t and
    that every new dangerous path has its one-shorter prefix dangerous at t."""
    queries, dangerous = _listing(state, edge, cache)
    q_now, d_now = set(queries), set(dangerous)
    problems = []
    for nxt in _successors(state):
        q_next, d_next = _listing(nxt, edge, cache)
        for path in q_next:
            if path not in q_now and path not in d_now:
                problems.append(f"new query path {path} at reveal of {nxt.revealed[-1]} was not dangerous")
        for path in d_next:
            if path not in d_now and path[:-1] not in d_now:
                problems.append(f"new dangerous path {path} at reveal of {nxt.revealed[-1]} lacks a dangerous prefix")
    return problems
