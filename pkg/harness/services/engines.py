"""
services/engines.py — The three randomized greedy MIS engines.

  sequential_greedy     process vertices by increasing rank, add v iff no
                        neighbour is already in the set (order-independent check)
  recursive_membership  the top-down oracle: v asks its lower-ranked neighbours,
                        in increasing rank, and answers false at the first one
                        that is in the MIS
  early_break_run       the bottom-up sequential form of the oracle; marks the
                        query edges (w, v): "v examined w during its iteration"

All three read neighbour orderings from one LowerNeighbors table per (g, ranks),
so they observe identical orders.  Call counts are always the unmemoized ones:
a vertex invoked twice is counted twice.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Tuple

from errors import GraphError, TraceError
from services.graph_core import Graph, OrderedEdge, RankAssignment
from services.path_analysis import count_query_paths_ending_at, filtration

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LowerNeighbors:
    """lower[v]: the neighbours w of v with rank(w) < rank(v), in increasing rank."""

    graph: Graph
    ranks: RankAssignment
    lower: Tuple[Tuple[int, ...], ...]


def lower_neighbors(g: Graph, ranks: RankAssignment) -> LowerNeighbors:
    ranks.check_covers(g)
    rank = ranks.ranks
    lower = tuple(
        tuple(sorted((w for w in g.adjacency[v] if rank[w] < rank[v]), key=rank.__getitem__))
        for v in g.vertices()
    )
    return LowerNeighbors(graph=g, ranks=ranks, lower=lower)


def _table(g: Graph, ranks: RankAssignment, order: Optional[LowerNeighbors]) -> LowerNeighbors:
    if order is None:
        return lower_neighbors(g, ranks)
    if order.graph is not g or order.ranks is not ranks:
        ranks.check_covers(g)
        if order.graph != g or order.ranks != ranks:
            raise GraphError("neighbour table was built for a different (graph, ranks) pair")
    return order


@dataclass(frozen=True)
class IndependentSet:
    members: FrozenSet[int]

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class QueryTrace:
    """Query edges of one early-break run plus the unmemoized per-vertex call counts.

    examined[v] lists, in increasing rank, the vertices v examined during its
    own iteration; the query edges are {(w, v) : w in examined[v]}.
    """

    examined: Tuple[Tuple[int, ...], ...]
    call_count: Tuple[int, ...]
    query_edges: FrozenSet[Tuple[int, int]] = field(init=False, repr=False)

    def __post_init__(self):
        edges = frozenset((w, v) for v, seen in enumerate(self.examined) for w in seen)
        object.__setattr__(self, "query_edges", edges)

    @property
    def total_calls(self) -> int:
        return sum(self.call_count)

    def to_text(self, ranks: RankAssignment) -> str:
        """One 'w v' line per query edge in rank(v)-major order, then 'calls v c(v)' lines."""
        lines = ["# query edges (w v): v examined w"]
        for v in ranks.order:
            lines.extend(f"{w} {v}" for w in self.examined[v])
        lines.append("# calls")
        lines.extend(f"calls {v} {c}" for v, c in enumerate(self.call_count))
        return "\n".join(lines) + "\n"


def parse_trace_text(text: str) -> Tuple[List[Tuple[int, int]], Dict[int, int]]:
    """Inverse of QueryTrace.to_text: (query edges in file order, call counts)."""
    edges: List[Tuple[int, int]] = []
    calls: Dict[int, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "calls" and len(parts) == 3:
                calls[int(parts[1])] = int(parts[2])
            elif len(parts) == 2:
                edges.append((int(parts[0]), int(parts[1])))
            else:
                raise ValueError(line)
        except ValueError:
            raise TraceError(f"line {number}: malformed trace line '{line}'")
    return edges, calls


@dataclass(frozen=True)
class MembershipResult:
    in_mis: bool
    recursive_calls: int
    call_log: Tuple[Tuple[int, int], ...]


# ── plain sequential greedy ──────────────────────────────────────────────────

def sequential_greedy(g: Graph, ranks: RankAssignment) -> IndependentSet:
    ranks.check_covers(g)
    members = set()
    for v in ranks.order:
        if not g.adjacency[v] & members:
            members.add(v)
    return IndependentSet(frozenset(members))


# ── recursive membership oracle ──────────────────────────────────────────────

class _Frame:
    __slots__ = ("vertex", "next", "found")

    def __init__(self, vertex: int):
        self.vertex = vertex
        self.next = 0
        self.found = False


def recursive_membership(
    g: Graph,
    ranks: RankAssignment,
    v: int,
    *,
    early_break: bool = True,
    order: Optional[LowerNeighbors] = None,
) -> MembershipResult:
    """Run the recursive oracle from v on an explicit stack (chains can reach depth n).

    With early_break=False every lower-ranked neighbour is asked, the plain
    recursive test without the greedy heuristic.
    """
    if not 0 <= v < g.vertex_count:
        raise GraphError(f"unknown vertex {v} (graph has {g.vertex_count} vertices)")
    table = _table(g, ranks, order).lower

    calls = 0
    log: List[Tuple[int, int]] = []
    stack = [_Frame(v)]
    returned: Optional[bool] = None

    while True:
        frame = stack[-1]
        if returned is not None:
            frame.found = frame.found or returned
            returned = None
        lower = table[frame.vertex]
        if (frame.found and early_break) or frame.next >= len(lower):
            stack.pop()
            value = not frame.found
            if not stack:
                return MembershipResult(value, calls, tuple(log))
            returned = value
            continue
        w = lower[frame.next]
        frame.next += 1
        calls += 1
        log.append((frame.vertex, w))
        stack.append(_Frame(w))


# ── early-break sequential run ───────────────────────────────────────────────

def _dp_counts(ranks: RankAssignment, examined: Tuple[Tuple[int, ...], ...]) -> Tuple[int, ...]:
    counts = [0] * ranks.size
    for v in ranks.order:
        counts[v] = sum(1 + counts[w] for w in examined[v])
    return tuple(counts)


def early_break_run(
    g: Graph,
    ranks: RankAssignment,
    order: Optional[LowerNeighbors] = None,
) -> Tuple[IndependentSet, QueryTrace]:
    table = _table(g, ranks, order).lower
    members = set()
    examined: List[Tuple[int, ...]] = [()] * g.vertex_count
    for v in ranks.order:
        seen = []
        blocked = False
        for w in table[v]:
            seen.append(w)
            if w in members:
                blocked = True
                break
        examined[v] = tuple(seen)
        if not blocked:
            members.add(v)
    frozen = tuple(examined)
    return IndependentSet(frozenset(members)), QueryTrace(frozen, _dp_counts(ranks, frozen))


def call_counts_via_dp(
    g: Graph,
    ranks: RankAssignment,
    trace: QueryTrace,
    order: Optional[LowerNeighbors] = None,
) -> Tuple[int, ...]:
    """c(v) = Σ over query edges (w, v) of (1 + c(w)), in increasing rank order.

    The trace is checked first: every vertex's examined list must be a
    rank-ordered prefix of its lower neighbours, stopping at the first member
    of the greedy MIS (or running to the end when none is a member).
    """
    table = _table(g, ranks, order).lower
    if len(trace.examined) != g.vertex_count:
        raise TraceError(
            f"trace covers {len(trace.examined)} vertices but {g.name} has {g.vertex_count}"
        )
    mis = sequential_greedy(g, ranks)
    for v in g.vertices():
        seen = trace.examined[v]
        lower = table[v]
        if seen != lower[: len(seen)]:
            raise TraceError(f"vertex {v}: examined {seen} is not a prefix of {lower}", vertex=v)
        hits = [i for i, w in enumerate(lower) if w in mis]
        expected = hits[0] + 1 if hits else len(lower)
        if len(seen) != expected:
            raise TraceError(
                f"vertex {v}: examined {len(seen)} neighbours, early break expects {expected}",
                vertex=v,
            )
    return _dp_counts(ranks, trace.examined)


def verify_mis(g: Graph, s: IndependentSet) -> bool:
    members = s.members
    for v in members:
        if not 0 <= v < g.vertex_count:
            return False
        if g.adjacency[v] & members:
            return False
    return all(v in members or g.adjacency[v] & members for v in g.vertices())


# ── batch answers and invocation counting ────────────────────────────────────

@dataclass(frozen=True)
class BatchMembership:
    in_mis: Tuple[bool, ...]
    recursive_calls: Tuple[int, ...]
    trace: QueryTrace


def batch_membership(g: Graph, ranks: RankAssignment) -> BatchMembership:
    """Answer every vertex from one early-break run; counts are the unmemoized DP values."""
    mis, trace = early_break_run(g, ranks)
    return BatchMembership(
        in_mis=tuple(v in mis for v in g.vertices()),
        recursive_calls=trace.call_count,
        trace=trace,
    )


def direct_invocation_counts(ranks: RankAssignment, trace: QueryTrace) -> Dict[OrderedEdge, int]:
    """Times b directly invokes a, summed over the top-level runs from every vertex.

    b is invoked 1 + up(b) times in total, where up(b) counts query paths
    starting at b; each invocation of b asks a exactly once when (a, b) is a
    query edge.  Edges that are never queried are omitted.
    """
    queried_by: Dict[int, List[int]] = {}
    for w, v in trace.query_edges:
        queried_by.setdefault(w, []).append(v)
    up = [0] * ranks.size
    for b in reversed(ranks.order):
        up[b] = sum(1 + up[x] for x in queried_by.get(b, ()))
    return {OrderedEdge(a, b): 1 + up[b] for a, b in trace.query_edges}


# ── cross-engine agreement ───────────────────────────────────────────────────

@dataclass(frozen=True)
class Disagreement:
    vertex: Optional[int]
    reason: str


def cross_check(
    g: Graph,
    ranks: RankAssignment,
    *,
    trace_mutator: Optional[Callable[[QueryTrace], QueryTrace]] = None,
) -> Optional[Disagreement]:
    """Run all three engines and compare MIS membership and call counts per vertex.

    Call counts are compared three ways: the recursion's own count, the DP
    over the early-break trace, and the query paths ending at v counted from
    the fully revealed filtration.  Returns the first disagreement, or None.
    """
    order = lower_neighbors(g, ranks)
    greedy = sequential_greedy(g, ranks)
    if not verify_mis(g, greedy):
        return Disagreement(None, "sequential greedy output is not a maximal independent set")

    early, trace = early_break_run(g, ranks, order)
    if trace_mutator is not None:
        trace = trace_mutator(trace)
    try:
        dp = call_counts_via_dp(g, ranks, trace, order)
    except TraceError as exc:
        return Disagreement(exc.vertex, exc.detail)

    paths = count_query_paths_ending_at(filtration(g, ranks, g.vertex_count))

    for v in g.vertices():
        result = recursive_membership(g, ranks, v, order=order)
        verdicts = (v in greedy, result.in_mis, v in early)
        if len(set(verdicts)) != 1:
            logger.warning("vertex %d: engines disagree on membership %s", v, verdicts)
            return Disagreement(v, f"membership differs (greedy, recursive, early-break) = {verdicts}")
        counts = (result.recursive_calls, dp[v], paths[v])
        if len(set(counts)) != 1:
            logger.warning("vertex %d: call counts differ %s", v, counts)
            return Disagreement(v, f"call counts differ (recursion, dp, query paths) = {counts}")
    return None
