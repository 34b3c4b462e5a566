"""
services/expectation_oracle.py — Expected direct invocations, the supermartingale audit
and the telescoping check.

Exact modes enumerate all n! permutations and work in Fractions throughout;
they refuse graphs above the configured exhaustive bound instead of
truncating.  Monte Carlo mode draws trial i from (seed, i) alone, so a report
does not depend on the number of workers.
"""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from config import Config
from errors import GraphError, ResourceRefusal, UsageError
from logging_config import configure_logging, get_logger
from services.engines import lower_neighbors, recursive_membership
from services.graph_core import Graph, OrderedEdge, RankAssignment, is_triangle_free
from services.path_analysis import (
    HALF,
    FiltrationState,
    PathCache,
    delta_r_expectation,
    evolution_violations,
    filtration,
    one_step_expectation,
    potential,
    query_increment_check,
)
from tasks.trial_tasks import PermutationBlock, TrialChunk, run_permutation_block, run_trial_chunk
from utils.validators import GraphSpecValidator

logger = get_logger(__name__)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float

    def lower(self, sigmas: float) -> float:
        return self.mean - sigmas * self.stderr

    def __str__(self) -> str:
        return f"{self.mean:.6f} ± {self.stderr:.6f}"


Value = Union[Fraction, Estimate]


def _point(value: Value) -> float:
    return value.mean if isinstance(value, Estimate) else float(value)


@dataclass(frozen=True)
class Check:
    name: str
    holds: bool
    detail: str
    witness: Tuple[str, ...] = ()


# ── edge expectations ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EdgeExpectationReport:
    graph: Graph
    mode: str
    per_edge: Dict[OrderedEdge, Value]
    per_vertex: Tuple[Value, ...]
    total_query_paths: Value
    average_calls: Value
    triangle_free: bool
    permutations: Optional[int] = None
    trials: Optional[int] = None
    seed: Optional[int] = None

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    @property
    def edge_bound(self) -> Fraction:
        return HALF

    @property
    def average_bound(self) -> Fraction:
        return Fraction(self.graph.edge_count, self.graph.vertex_count)

    def max_edge(self) -> Optional[Tuple[OrderedEdge, Value]]:
        if not self.per_edge:
            return None
        return max(self.per_edge.items(), key=lambda item: (_point(item[1]), item[0]))

    def checks(self) -> List[Check]:
        return self._exact_checks() if self.is_exact else self._mc_checks()

    def _exact_checks(self) -> List[Check]:
        name = self.graph.name
        over = [f"graph={name} edge={e} value={v} > 1/2" for e, v in self.per_edge.items() if v > HALF]
        checks = [Check("per_edge_bound", not over, "every ordered edge ≤ 1/2", tuple(over))]

        if self.triangle_free:
            off = [f"graph={name} edge={e} value={v} ≠ 1/2" for e, v in self.per_edge.items() if v != HALF]
            checks.append(Check("triangle_free_tightness", not off, "triangle-free: every edge = 1/2", tuple(off)))
        else:
            strict = any(v < HALF for v in self.per_edge.values())
            checks.append(Check(
                "triangle_free_tightness", strict, "has a triangle: some edge < 1/2",
                () if strict else (f"graph={name} contains a triangle but every edge = 1/2",),
            ))

        avg, bound = self.average_calls, self.average_bound
        if self.triangle_free:
            holds = avg == bound
            expect = "="
        else:
            holds = avg < bound
            expect = "<"
        checks.append(Check(
            "average_bound", holds, f"average calls {avg} {expect} m/n = {bound}",
            () if holds else (f"graph={name} average={avg} m/n={bound}",),
        ))

        vertex_total = sum(self.per_vertex, Fraction(0))
        same = vertex_total == self.total_query_paths
        checks.append(Check(
            "count_consistency", same, "Σ per-vertex calls = Σ per-edge invocations",
            () if same else (f"graph={name} vertices={vertex_total} edges={self.total_query_paths}",),
        ))
        return checks

    def _mc_checks(self) -> List[Check]:
        sigmas = Config.MC_BOUND_SIGMAS
        name = self.graph.name
        over = [
            f"graph={name} edge={e} estimate={v} > 1/2 + {sigmas}·stderr"
            for e, v in self.per_edge.items() if v.lower(sigmas) > 0.5
        ]
        checks = [Check("per_edge_bound", not over, f"every ordered edge ≤ 1/2 + {sigmas}·stderr", tuple(over))]
        avg = self.average_calls
        bound = float(self.average_bound)
        holds = avg.lower(sigmas) <= bound
        checks.append(Check(
            "average_bound", holds, f"average calls {avg} ≤ m/n + {sigmas}·stderr = {bound:.6f}",
            () if holds else (f"graph={name} average={avg} m/n={bound:.6f}",),
        ))
        return checks

    @property
    def ok(self) -> bool:
        return all(check.holds for check in self.checks())


def _estimate(total: int, squares: int, trials: int) -> Estimate:
    mean = total / trials
    if trials < 2:
        return Estimate(mean=mean, stderr=0.0)
    variance = (trials * squares - total * total) / (trials * (trials - 1))
    return Estimate(mean=mean, stderr=math.sqrt(max(variance, 0.0) / trials))


# ── supermartingale audit ────────────────────────────────────────────────────

@dataclass(frozen=True)
class AuditRow:
    edge: OrderedEdge
    prefix: Tuple[int, ...]
    q: int
    d: int
    phi: Fraction
    next_expect: Fraction
    multiplicity: int

    @property
    def t(self) -> int:
        return len(self.prefix)

    @property
    def slack(self) -> Fraction:
        return self.phi - self.next_expect


@dataclass
class AuditReport:
    graph: Graph
    triangle_free: bool
    states: int = 0
    rows: List[AuditRow] = field(default_factory=list)
    slack_failures: List[str] = field(default_factory=list)
    increment_failures: List[str] = field(default_factory=list)
    delta_failures: List[str] = field(default_factory=list)
    evolution_failures: List[str] = field(default_factory=list)
    dangerous_paths_checked: int = 0

    @property
    def min_slack(self) -> Optional[Fraction]:
        return min((row.slack for row in self.rows), default=None)

    @property
    def max_slack(self) -> Optional[Fraction]:
        return max((row.slack for row in self.rows), default=None)

    @property
    def all_tight(self) -> bool:
        return all(row.slack == 0 for row in self.rows)

    @property
    def supermartingale_holds(self) -> bool:
        return not self.slack_failures

    @property
    def tightness_consistent(self) -> bool:
        return self.all_tight == self.triangle_free

    def checks(self) -> List[Check]:
        tight = "martingale (every slack 0)" if self.all_tight else "strict slack present"
        tightness_witness = ()
        if not self.tightness_consistent:
            tightness_witness = (
                f"graph={self.graph.name} triangle_free={self.triangle_free} all_tight={self.all_tight}",
            )
        return [
            Check("supermartingale", self.supermartingale_holds, "slack ≥ 0 at every reachable state",
                  tuple(self.slack_failures)),
            Check("triangle_free_tightness", self.tightness_consistent, tight, tightness_witness),
            Check("increment_identity", not self.increment_failures,
                  "E[|Q_{t+1}| - |Q_t|] = |D_t|/(n-t)", tuple(self.increment_failures)),
            Check("dangerous_path_drift", not self.delta_failures,
                  f"E[Δ_R] ≤ -2/(n-t) over {self.dangerous_paths_checked} dangerous paths",
                  tuple(self.delta_failures)),
            Check("evolution", not self.evolution_failures,
                  "new paths descend from dangerous paths", tuple(self.evolution_failures)),
        ]

    @property
    def ok(self) -> bool:
        return all(check.holds for check in self.checks())


AUDIT_CSV_COLUMNS = (
    "edge_from", "edge_to", "t", "q", "d",
    "phi_num", "phi_den", "next_expect_num", "next_expect_den",
    "slack_num", "slack_den", "prefix", "multiplicity",
)


def audit_csv_rows(report: AuditReport) -> List[List[str]]:
    """Header plus one row per (reachable state, ordered edge), in traversal order."""
    rows = [list(AUDIT_CSV_COLUMNS)]
    for row in report.rows:
        slack = row.slack
        rows.append([str(x) for x in (
            row.edge.source, row.edge.target, row.t, row.q, row.d,
            row.phi.numerator, row.phi.denominator,
            row.next_expect.numerator, row.next_expect.denominator,
            slack.numerator, slack.denominator, " ".join(map(str, row.prefix)), row.multiplicity,
        )])
    return rows


# ── telescoping ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TelescopeEntry:
    edge: OrderedEdge
    final_potential: Fraction
    direct_invocations: Fraction
    exact: Fraction

    @property
    def ok(self) -> bool:
        return self.final_potential <= HALF and self.final_potential == self.direct_invocations == self.exact


@dataclass(frozen=True)
class TelescopeResult:
    graph: Graph
    entries: Tuple[TelescopeEntry, ...]

    @property
    def total(self) -> Fraction:
        return sum((entry.final_potential for entry in self.entries), Fraction(0))

    @property
    def ok(self) -> bool:
        return all(entry.ok for entry in self.entries)

    def witness(self) -> List[str]:
        return [
            f"graph={self.graph.name} edge={e.edge} E[Φ_n]={e.final_potential} "
            f"direct={e.direct_invocations} exact={e.exact}"
            for e in self.entries if not e.ok
        ]


# ── oracle ───────────────────────────────────────────────────────────────────

class ExpectationOracle:
    """Exact and Monte Carlo estimators with a shared exhaustive bound and worker pool."""

    def __init__(
        self,
        bound: Optional[int] = None,
        workers: Optional[int] = None,
        chunk_size: Optional[int] = None,
    ):
        self.bound = Config.EXHAUSTIVE_BOUND if bound is None else bound
        self.workers = Config.get_workers() if workers is None else max(1, workers)
        self.chunk_size = Config.CHUNK_SIZE if chunk_size is None else chunk_size
        if self.chunk_size < 1:
            raise UsageError(f"chunk size must be ≥ 1, got {self.chunk_size}")

    def with_bound(self, bound: Optional[int]) -> "ExpectationOracle":
        if bound is None:
            return self
        return ExpectationOracle(bound=bound, workers=self.workers, chunk_size=self.chunk_size)

    def _require_enumerable(self, g: Graph, what: str) -> None:
        n = g.vertex_count
        if n == 0:
            raise GraphError(f"{what} needs at least one vertex")
        if n > self.bound:
            raise ResourceRefusal(
                f"{what} on {g.name} would enumerate {n}! = {math.factorial(n)} permutations",
                bound=self.bound,
                size=n,
            )

    def _permutation_blocks(self, g: Graph) -> List[PermutationBlock]:
        if self.workers > 1 and g.vertex_count > 1:
            n = g.vertex_count
            with ProcessPoolExecutor(max_workers=self.workers, initializer=configure_logging) as pool:
                return list(pool.map(run_permutation_block, [g] * n, range(n)))
        return [run_permutation_block(g)]

    def _trial_chunks(self, g: Graph, trials: int, seed: int) -> List[TrialChunk]:
        starts = list(range(0, trials, self.chunk_size))
        stops = [min(start + self.chunk_size, trials) for start in starts]
        if self.workers > 1 and len(starts) > 1:
            with ProcessPoolExecutor(max_workers=self.workers, initializer=configure_logging) as pool:
                return list(pool.map(run_trial_chunk, [g] * len(starts), [seed] * len(starts), starts, stops))
        return [run_trial_chunk(g, seed, start, stop) for start, stop in zip(starts, stops)]

    def exact_edge_expectations(self, g: Graph) -> EdgeExpectationReport:
        """Average over all n! permutations of the direct invocations per ordered edge."""
        self._require_enumerable(g, "exact edge expectations")
        n = g.vertex_count
        ordered = g.ordered_edges()
        blocks = self._permutation_blocks(g)

        permutations = sum(block.permutations for block in blocks)
        edge_sum = [0] * len(ordered)
        vertex_sum = [0] * n
        for block in blocks:
            for i, value in enumerate(block.edge_sum):
                edge_sum[i] += value
            for v, value in enumerate(block.vertex_sum):
                vertex_sum[v] += value

        per_edge = {edge: Fraction(s, permutations) for edge, s in zip(ordered, edge_sum)}
        per_vertex = tuple(Fraction(s, permutations) for s in vertex_sum)
        total = sum(per_edge.values(), Fraction(0))
        logger.info("oracle.exact.done", graph=g.name, n=n, permutations=permutations, total=total)
        return EdgeExpectationReport(
            graph=g,
            mode="exact",
            per_edge=per_edge,
            per_vertex=per_vertex,
            total_query_paths=total,
            average_calls=total / n,
            triangle_free=is_triangle_free(g),
            permutations=permutations,
        )

    def exact_average_calls(self, g: Graph, include_top_level: bool = False) -> Fraction:
        """Expected recursive calls per vertex; the top-level invocation is excluded unless asked for."""
        average = self.exact_edge_expectations(g).average_calls
        return average + 1 if include_top_level else average

    def mc_edge_expectations(self, g: Graph, trials: int, seed: int) -> EdgeExpectationReport:
        if trials < 1:
            raise UsageError(f"trials must be ≥ 1, got {trials}")
        if g.vertex_count == 0:
            raise GraphError("Monte Carlo estimation needs at least one vertex")
        ok, msg = GraphSpecValidator.validate_seed(seed)
        if not ok:
            raise UsageError(msg)

        ordered = g.ordered_edges()
        n = g.vertex_count
        chunks = self._trial_chunks(g, trials, seed)

        edge_sum = [0] * len(ordered)
        edge_sq = [0] * len(ordered)
        vertex_sum = [0] * n
        vertex_sq = [0] * n
        total_sum = total_sq = 0
        for chunk in sorted(chunks, key=lambda c: c.start):
            for i in range(len(ordered)):
                edge_sum[i] += chunk.edge_sum[i]
                edge_sq[i] += chunk.edge_sq[i]
            for v in range(n):
                vertex_sum[v] += chunk.vertex_sum[v]
                vertex_sq[v] += chunk.vertex_sq[v]
            total_sum += chunk.total_sum
            total_sq += chunk.total_sq

        per_edge = {
            edge: _estimate(s, sq, trials) for edge, s, sq in zip(ordered, edge_sum, edge_sq)
        }
        per_vertex = tuple(_estimate(s, sq, trials) for s, sq in zip(vertex_sum, vertex_sq))
        total = _estimate(total_sum, total_sq, trials)
        logger.info("oracle.mc.done", graph=g.name, n=n, trials=trials, seed=seed, chunks=len(chunks))
        return EdgeExpectationReport(
            graph=g,
            mode="mc",
            per_edge=per_edge,
            per_vertex=per_vertex,
            total_query_paths=total,
            average_calls=Estimate(total.mean / n, total.stderr / n),
            triangle_free=is_triangle_free(g),
            trials=trials,
            seed=seed,
        )

    def exhaustive_supermartingale_audit(self, g: Graph) -> AuditReport:
        """Visit every permutation prefix of length < n once and check, per ordered edge,
        the one-step supermartingale inequality, the increment identity, the drift of
        every dangerous path and the evolution containment."""
        self._require_enumerable(g, "supermartingale audit")
        n = g.vertex_count
        edges = g.ordered_edges()
        report = AuditReport(graph=g, triangle_free=is_triangle_free(g))
        cache = PathCache(g)

        stack = [FiltrationState.initial(g)]
        while stack:
            state = stack.pop()
            if state.is_final:
                continue
            report.states += 1
            remaining = n - state.t
            step = Fraction(-2, remaining)
            where = f"graph={g.name} prefix={state.revealed}"

            for edge in edges:
                queries, dangerous = cache.listing(state, edge)
                phi = len(queries) + len(dangerous) * HALF
                expect = one_step_expectation(state, edge, cache)
                row = AuditRow(
                    edge=edge,
                    prefix=state.revealed,
                    q=len(queries),
                    d=len(dangerous),
                    phi=phi,
                    next_expect=expect,
                    multiplicity=math.factorial(remaining),
                )
                report.rows.append(row)
                if row.slack < 0:
                    report.slack_failures.append(
                        f"{where} edge={edge} phi={phi} next={expect} Q={queries} D={dangerous}"
                    )

                gained, predicted = query_increment_check(state, edge, cache)
                if gained != predicted:
                    report.increment_failures.append(
                        f"{where} edge={edge} gained={gained} |D|/(n-t)={predicted} D={dangerous}"
                    )

                for path in dangerous:
                    drift = delta_r_expectation(state, path)
                    report.dangerous_paths_checked += 1
                    if drift > step or (report.triangle_free and drift != step):
                        report.delta_failures.append(
                            f"{where} path={path} E[Δ_R]={drift} bound={step}"
                        )

                report.evolution_failures.extend(
                    f"{where} edge={edge}: {problem}"
                    for problem in evolution_violations(state, edge, cache)
                )

            stack.extend(reversed([state.extend(v) for v in state.unrevealed()]))

        logger.info(
            "oracle.audit.done",
            graph=g.name,
            states=report.states,
            rows=len(report.rows),
            cached_listings=len(cache),
            min_slack=report.min_slack,
            all_tight=report.all_tight,
        )
        return report

    def telescope_check(self, g: Graph) -> TelescopeResult:
        """E[Φ_n(a,b)] against the direct-invocation count read from recursion logs
        and against exact_edge_expectations, for every ordered edge."""
        self._require_enumerable(g, "telescope check")
        n = g.vertex_count
        edges = g.ordered_edges()
        final_sum: Dict[OrderedEdge, Fraction] = {edge: Fraction(0) for edge in edges}
        direct_sum: Dict[OrderedEdge, int] = {edge: 0 for edge in edges}
        permutations = 0

        for order in itertools.permutations(g.vertices()):
            ranks = RankAssignment.from_order(order)
            final = filtration(g, ranks, n)
            for edge in edges:
                final_sum[edge] += potential(final, edge)
            table = lower_neighbors(g, ranks)
            for v in g.vertices():
                for caller, callee in recursive_membership(g, ranks, v, order=table).call_log:
                    direct_sum[OrderedEdge(callee, caller)] += 1
            permutations += 1

        exact = self.exact_edge_expectations(g).per_edge
        entries = tuple(
            TelescopeEntry(
                edge=edge,
                final_potential=final_sum[edge] / permutations,
                direct_invocations=Fraction(direct_sum[edge], permutations),
                exact=exact[edge],
            )
            for edge in edges
        )
        result = TelescopeResult(graph=g, entries=entries)
        logger.info("oracle.telescope.done", graph=g.name, total=result.total, ok=result.ok)
        return result
