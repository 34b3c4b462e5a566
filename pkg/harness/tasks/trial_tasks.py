"""Process-pool workers: Monte Carlo trial chunks and exhaustive permutation blocks.

Workers receive only picklable arguments (a Graph and integers) and return
exact integer sums; the caller reduces them in task-index order.
"""

import itertools
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from logging_config import get_logger
from services.engines import batch_membership, direct_invocation_counts
from services.graph_core import Graph, RankAssignment, trial_rank_assignment

logger = get_logger(__name__)


@dataclass
class TrialChunk:
    start: int
    stop: int
    edge_sum: List[int]
    edge_sq: List[int]
    vertex_sum: List[int]
    vertex_sq: List[int]
    total_sum: int
    total_sq: int


@dataclass
class PermutationBlock:
    first: Optional[int]
    permutations: int
    edge_sum: List[int]
    vertex_sum: List[int]


def _per_permutation(graph: Graph, ranks: RankAssignment, index: dict):
    """(per-edge direct invocations, per-vertex recursive calls) for one permutation."""
    batch = batch_membership(graph, ranks)
    edges = [0] * len(index)
    for edge, count in direct_invocation_counts(ranks, batch.trace).items():
        edges[index[edge]] = count
    return edges, batch.recursive_calls


def run_trial_chunk(graph: Graph, master_seed: int, start: int, stop: int) -> TrialChunk:
    """Trials start..stop-1; trial i uses the permutation derived from (master_seed, i)."""
    ordered = graph.ordered_edges()
    index = {edge: i for i, edge in enumerate(ordered)}
    edge_sum = np.zeros(len(ordered), dtype=np.int64)
    edge_sq = np.zeros(len(ordered), dtype=np.int64)
    vertex_sum = np.zeros(graph.vertex_count, dtype=np.int64)
    vertex_sq = np.zeros(graph.vertex_count, dtype=np.int64)
    total_sum = total_sq = 0

    for trial in range(start, stop):
        ranks = trial_rank_assignment(graph.vertex_count, master_seed, trial)
        edges, calls = _per_permutation(graph, ranks, index)
        e = np.asarray(edges, dtype=np.int64)
        c = np.asarray(calls, dtype=np.int64)
        edge_sum += e
        edge_sq += e * e
        vertex_sum += c
        vertex_sq += c * c
        total = int(c.sum())
        total_sum += total
        total_sq += total * total

    logger.debug("trials.chunk.done", graph=graph.name, start=start, stop=stop)
    return TrialChunk(
        start=start,
        stop=stop,
        edge_sum=edge_sum.tolist(),
        edge_sq=edge_sq.tolist(),
        vertex_sum=vertex_sum.tolist(),
        vertex_sq=vertex_sq.tolist(),
        total_sum=total_sum,
        total_sq=total_sq,
    )


def run_permutation_block(graph: Graph, first: Optional[int] = None) -> PermutationBlock:
    """Every permutation whose first vertex is `first` (all of them when None)."""
    ordered = graph.ordered_edges()
    index = {edge: i for i, edge in enumerate(ordered)}
    edge_sum = [0] * len(ordered)
    vertex_sum = [0] * graph.vertex_count
    count = 0

    if first is None:
        orders = itertools.permutations(graph.vertices())
    else:
        rest = [v for v in graph.vertices() if v != first]
        orders = ((first,) + tail for tail in itertools.permutations(rest))

    for order in orders:
        ranks = RankAssignment.from_order(order)
        edges, calls = _per_permutation(graph, ranks, index)
        for i, value in enumerate(edges):
            edge_sum[i] += value
        for v, value in enumerate(calls):
            vertex_sum[v] += value
        count += 1

    logger.debug("permutations.block.done", graph=graph.name, first=first, permutations=count)
    return PermutationBlock(first=first, permutations=count, edge_sum=edge_sum, vertex_sum=vertex_sum)
