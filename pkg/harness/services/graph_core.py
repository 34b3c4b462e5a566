"""
services/graph_core.py — Graphs, rank assignments, generators and edge-list I/O.

Vertices are dense 0-based ids; ranks are 1-based (rank 1 is processed first).
Graph and RankAssignment are immutable after construction and safe to share
between worker processes.

Randomness comes from numpy's PCG64 bit generator.  A RankAssignment drawn
from a seed is the output of Generator.permutation (a Fisher–Yates shuffle):
vertex order[i] receives rank i + 1.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from errors import GraphError, GraphFormatError, RankError
from utils.fingerprint import graph_fingerprint
from utils.validators import GraphSpecValidator

logger = logging.getLogger(__name__)


class OrderedEdge(NamedTuple):
    """Directed view (a, b) of an undirected edge; (a, b) and (b, a) are distinct."""

    source: int
    target: int

    def reversed(self) -> "OrderedEdge":
        return OrderedEdge(self.target, self.source)

    def __str__(self) -> str:
        return f"({self.source},{self.target})"


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    adjacency: Tuple[frozenset, ...]
    name: str = field(default="graph", compare=False)
    labeling: str = field(default="", compare=False)
    duplicate_edges: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.adjacency) != self.vertex_count:
            raise GraphError(
                f"adjacency has {len(self.adjacency)} entries for {self.vertex_count} vertices"
            )
        for v, nbrs in enumerate(self.adjacency):
            if v in nbrs:
                raise GraphError(f"self-loop at vertex {v}")
            for u in nbrs:
                if not 0 <= u < self.vertex_count:
                    raise GraphError(f"vertex {v} lists out-of-range neighbour {u}")
                if v not in self.adjacency[u]:
                    raise GraphError(f"asymmetric adjacency between {v} and {u}")

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    @property
    def max_degree(self) -> int:
        return max((len(nbrs) for nbrs in self.adjacency), default=0)

    def vertices(self) -> range:
        return range(self.vertex_count)

    def neighbors(self, v: int) -> frozenset:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.vertex_count and v in self.adjacency[u]

    def edges(self) -> List[Tuple[int, int]]:
        """Each undirected edge once as (u, v) with u < v, sorted."""
        return sorted((u, v) for u in self.vertices() for v in self.adjacency[u] if u < v)

    def ordered_edges(self) -> List[OrderedEdge]:
        return sorted(OrderedEdge(u, v) for u in self.vertices() for v in self.adjacency[u])

    def ordered_edge(self, a: int, b: int) -> OrderedEdge:
        if not self.has_edge(a, b):
            raise GraphError(f"({a},{b}) is not an edge of {self.name}")
        return OrderedEdge(a, b)

    @property
    def fingerprint(self) -> str:
        return graph_fingerprint(save_edge_list(self))


@dataclass(frozen=True)
class RankAssignment:
    """The permutation π: ranks[v] is the 1-based rank of v, order[r-1] is π^{-1}(r)."""

    order: Tuple[int, ...]
    ranks: Tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.order)
        if sorted(self.order) != list(range(n)):
            raise RankError(f"order is not a permutation of 0..{n - 1}: {self.order}")
        ranks = [0] * n
        for position, v in enumerate(self.order):
            ranks[v] = position + 1
        object.__setattr__(self, "ranks", tuple(ranks))

    @classmethod
    def from_order(cls, order: Iterable[int]) -> "RankAssignment":
        return cls(tuple(int(v) for v in order))

    @classmethod
    def from_ranks(cls, ranks: Sequence[int] | dict) -> "RankAssignment":
        """Build from a vertex → rank mapping (sequence indexed by vertex, or dict)."""
        items = ranks.items() if isinstance(ranks, dict) else enumerate(ranks)
        pairs = sorted((int(r), int(v)) for v, r in items)
        n = len(pairs)
        if [r for r, _ in pairs] != list(range(1, n + 1)):
            raise RankError(f"ranks are not a bijection onto 1..{n}")
        return cls(tuple(v for _, v in pairs))

    @property
    def size(self) -> int:
        return len(self.order)

    def rank(self, v: int) -> int:
        return self.ranks[v]

    def vertex(self, r: int) -> int:
        """Inverse lookup π^{-1}(r)."""
        return self.order[r - 1]

    def prefix(self, t: int) -> Tuple[int, ...]:
        return self.order[:t]

    def check_covers(self, g: Graph) -> None:
        if self.size != g.vertex_count:
            raise RankError(
                f"rank assignment covers {self.size} vertices but {g.name} has {g.vertex_count}"
            )


# ── construction ─────────────────────────────────────────────────────────────

def build_graph(
    n: int,
    edges: Iterable[Iterable[int]],
    name: str = "graph",
    labeling: str = "",
) -> Graph:
    """Build a simple undirected graph; duplicate pairs are collapsed and reported."""
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    adjacency = [set() for _ in range(n)]
    duplicates: List[Tuple[int, int]] = []
    for pair in edges:
        endpoints = list(pair)
        if len(endpoints) == 1:
            raise GraphError(f"self-loop rejected: {{{endpoints[0]}, {endpoints[0]}}}")
        if len(endpoints) != 2:
            raise GraphError(f"edge must have two endpoints: {endpoints}")
        u, v = (int(x) for x in endpoints)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"endpoint out of range [0, {n}) in pair ({u}, {v})")
        if u == v:
            raise GraphError(f"self-loop rejected: ({u}, {v})")
        if v in adjacency[u]:
            duplicates.append((min(u, v), max(u, v)))
            continue
        adjacency[u].add(v)
        adjacency[v].add(u)
    if duplicates:
        logger.warning("%s: collapsed %d duplicate edge(s): %s", name, len(duplicates), duplicates)
    return Graph(
        vertex_count=n,
        adjacency=tuple(frozenset(nbrs) for nbrs in adjacency),
        name=name,
        labeling=labeling,
        duplicate_edges=tuple(duplicates),
    )


def generate_named(kind: str, *params: int) -> Graph:
    """The standard graph of a named family, with a documented vertex labeling."""
    ok, msg = GraphSpecValidator.validate_generator_spec(kind, tuple(params))
    if not ok or kind == "er":
        raise GraphError(msg or "use generate_er for random graphs")

    if kind == "path":
        (k,) = params
        edges = [(i, i + 1) for i in range(k - 1)]
        return build_graph(k, edges, f"path({k})", "vertices 0..k-1 in path order")
    if kind == "cycle":
        (k,) = params
        edges = [(i, (i + 1) % k) for i in range(k)]
        return build_graph(k, edges, f"cycle({k})", "vertices 0..k-1 around the cycle")
    if kind == "complete":
        (k,) = params
        edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
        return build_graph(k, edges, f"complete({k})", "vertices 0..k-1")
    if kind == "complete_bipartite":
        a, b = params
        edges = [(i, a + j) for i in range(a) for j in range(b)]
        return build_graph(
            a + b, edges, f"complete_bipartite({a},{b})",
            f"left side 0..{a - 1}, right side {a}..{a + b - 1}",
        )
    (k,) = params
    edges = [(0, leaf) for leaf in range(1, k + 1)]
    return build_graph(k + 1, edges, f"star({k})", f"centre 0, leaves 1..{k}")


def _generator(seed: int, spawn_key: Tuple[int, ...] = ()) -> np.random.Generator:
    ok, msg = GraphSpecValidator.validate_seed(seed)
    if not ok:
        raise GraphError(msg)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def generate_er(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each of the n(n-1)/2 pairs, in lexicographic order, kept with probability p."""
    ok, msg = GraphSpecValidator.validate_generator_spec("er", (n, p))
    if not ok:
        raise GraphError(msg)
    rng = _generator(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    draws = rng.random(len(pairs))
    edges = [pair for pair, x in zip(pairs, draws) if x < p]
    return build_graph(n, edges, f"er({n},{p},seed={seed})", "vertices 0..n-1")


def random_rank_assignment(n: int, seed: int) -> RankAssignment:
    """Uniform permutation via Generator.permutation; bit-identical for a given seed."""
    if n < 1:
        raise RankError("rank assignment needs at least one vertex")
    return RankAssignment.from_order(_generator(seed).permutation(n).tolist())


def trial_rank_assignment(n: int, master_seed: int, trial: int) -> RankAssignment:
    """Per-trial permutation from SeedSequence(master_seed, spawn_key=(trial,)).

    Depends only on (master_seed, trial), so serial and parallel runs agree.
    """
    if n < 1:
        raise RankError("rank assignment needs at least one vertex")
    return RankAssignment.from_order(_generator(master_seed, (trial,)).permutation(n).tolist())


def is_triangle_free(g: Graph) -> bool:
    return all(not (g.adjacency[u] & g.adjacency[v]) for u, v in g.edges())


# ── edge-list format ─────────────────────────────────────────────────────────

def _content_lines(text: str) -> Iterator[Tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def load_edge_list(text: str, name: str = "graph") -> Graph:
    """First content line is n; each further line is 'u v'. '#' starts a comment line."""
    lines = _content_lines(text)
    try:
        number, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty edge list: missing vertex count")
    try:
        n = int(header)
    except ValueError:
        raise GraphFormatError(f"expected vertex count, got '{header}'", number)
    if n < 0:
        raise GraphFormatError(f"vertex count must be nonnegative, got {n}", number)

    edges = []
    for number, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got '{line}'", number)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex id in '{line}'", number)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range [0, {n}) in '{line}'", number)
        if u == v:
            raise GraphFormatError(f"self-loop '{line}'", number)
        edges.append((u, v))
    return build_graph(n, edges, name=name)


def save_edge_list(g: Graph) -> str:
    lines = [str(g.vertex_count)] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | Path) -> Graph:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphError(f"cannot read {path}: {exc}")
    return load_edge_list(text, name=path.stem)


def write_edge_list(path: str | Path, g: Graph) -> None:
    path = Path(path)
    try:
        path.write_text(save_edge_list(g), encoding="utf-8")
    except OSError as exc:
        raise GraphError(f"cannot write {path}: {exc}")


def graph_from_spec(kind: str, params: tuple, seed: Optional[int] = None) -> Graph:
    if kind == "er":
        n, p = params
        return generate_er(n, p, 0 if seed is None else seed)
    return generate_named(kind, *params)
