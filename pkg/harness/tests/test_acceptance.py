"""Acceptance-scale runs over the fixed graph corpus.  Deselect with -m 'not slow'."""

import itertools
import os
from collections import Counter
from fractions import Fraction

import networkx as nx
import pytest

from config import Config
from services.engines import cross_check
from services.expectation_oracle import ExpectationOracle
from services.graph_core import (
    build_graph,
    generate_er,
    generate_named,
    is_triangle_free,
    random_rank_assignment,
    trial_rank_assignment,
)
from services.path_analysis import (
    HALF,
    FiltrationState,
    dangerous_probability_oracle,
    enumerate_query_paths,
    is_dangerous_path,
)

pytestmark = pytest.mark.slow

WORKERS = max(1, min(8, os.cpu_count() or 1))

EXACT_CORPUS = [
    generate_named("complete", 2),
    generate_named("path", 3),
    generate_named("path", 4),
    generate_named("cycle", 4),
    generate_named("cycle", 5),
    generate_named("complete", 3),
    generate_named("complete", 4),
    generate_named("star", 5),
    generate_named("complete_bipartite", 2, 3),
    generate_named("complete_bipartite", 3, 3),
] + [generate_er(n, p, n) for n in range(5, 9) for p in (0.3, 0.6)]

AUDIT_CORPUS = [
    generate_named("complete", 2),
    generate_named("path", 3),
    generate_named("complete", 3),
    generate_named("path", 4),
    generate_named("cycle", 4),
    generate_named("complete", 4),
    generate_er(6, 0.4, 1),
]

CONSISTENCY_CORPUS = [
    generate_named("path", 10),
    generate_named("cycle", 10),
    generate_named("complete", 6),
    generate_er(30, 0.2, Config.DEFAULT_SEED),
    generate_er(100, 0.05, Config.DEFAULT_SEED),
]


def _ids(corpus):
    return [g.name for g in corpus]


@pytest.fixture(scope="module")
def oracle():
    return ExpectationOracle(bound=9, workers=WORKERS)


# ── exact expectations ───────────────────────────────────────────────────────

@pytest.mark.parametrize("g", EXACT_CORPUS, ids=_ids(EXACT_CORPUS))
def test_per_edge_bound_and_tightness(oracle, g):
    report = oracle.exact_edge_expectations(g)
    values = list(report.per_edge.values())
    assert all(v <= HALF for v in values)
    if not values:
        return
    if is_triangle_free(g):
        assert all(v == HALF for v in values)
    else:
        assert any(v < HALF for v in values)


@pytest.mark.parametrize("g", EXACT_CORPUS, ids=_ids(EXACT_CORPUS))
def test_average_calls_bound(oracle, g):
    average = oracle.exact_average_calls(g)
    bound = Fraction(g.edge_count, g.vertex_count)
    if is_triangle_free(g):
        assert average == bound
    else:
        assert average < bound


def test_corpus_has_both_kinds():
    assert any(is_triangle_free(g) for g in EXACT_CORPUS)
    assert any(not is_triangle_free(g) for g in EXACT_CORPUS)


# ── supermartingale audit ────────────────────────────────────────────────────

@pytest.mark.parametrize("g", AUDIT_CORPUS, ids=_ids(AUDIT_CORPUS))
def test_supermartingale_audit(oracle, g):
    report = oracle.exhaustive_supermartingale_audit(g)
    assert report.slack_failures == []
    assert report.increment_failures == []
    assert report.delta_failures == []
    assert report.evolution_failures == []
    assert report.min_slack >= 0
    assert report.all_tight == is_triangle_free(g)
    assert report.ok


@pytest.mark.parametrize("g", AUDIT_CORPUS, ids=_ids(AUDIT_CORPUS))
def test_telescope(oracle, g):
    result = oracle.telescope_check(g)
    assert result.ok, result.witness()
    assert result.total <= g.edge_count


# ── dangerous-path characterization ──────────────────────────────────────────

def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield build_graph(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


def _characterization_mismatches(g):
    stack = [FiltrationState.initial(g)]
    while stack:
        state = stack.pop()
        for edge in g.ordered_edges():
            candidates = [tuple(edge)] + [
                path + (z,)
                for path in enumerate_query_paths(state, edge)
                for z in g.neighbors(path[-1])
                if z not in path
            ]
            for path in candidates:
                p = dangerous_probability_oracle(state, path)
                if is_dangerous_path(state, path) != (0 < p < 1):
                    yield state.revealed, path, p
        if not state.is_final:
            stack.extend(state.extend(v) for v in state.unrevealed())


@pytest.mark.parametrize("n", [2, 3, 4])
def test_characterization_on_every_labelled_graph(n):
    for g in _all_graphs(n):
        assert list(_characterization_mismatches(g)) == [], g.edges()


SHAPES = [
    build_graph(h.number_of_nodes(), list(nx.convert_node_labels_to_integers(h).edges()), name=f"atlas{index}")
    for index, h in enumerate(nx.graph_atlas_g())
    if h.number_of_nodes() in (5, 6)
]


def test_every_shape_of_five_and_six_vertices_is_listed():
    assert [sum(g.vertex_count == n for g in SHAPES) for n in (5, 6)] == [34, 156]


# one graph per isomorphism class
@pytest.mark.parametrize("g", SHAPES, ids=_ids(SHAPES))
def test_characterization_on_every_shape(g):
    assert list(_characterization_mismatches(g)) == [], g.edges()


# ── cross-engine consistency ─────────────────────────────────────────────────

@pytest.mark.parametrize("g", CONSISTENCY_CORPUS, ids=_ids(CONSISTENCY_CORPUS))
def test_engines_agree_on_seeded_permutations(g):
    for trial in range(10_000):
        ranks = trial_rank_assignment(g.vertex_count, Config.DEFAULT_SEED, trial)
        assert cross_check(g, ranks) is None, trial


# ── Monte Carlo calibration ──────────────────────────────────────────────────

@pytest.mark.parametrize(
    "g, exact",
    [
        (generate_named("complete", 3), Fraction(1, 3)),
        (generate_named("path", 3), HALF),
    ],
    ids=["complete(3)", "path(3)"],
)
def test_mc_calibration(oracle, g, exact):
    report = oracle.mc_edge_expectations(g, trials=100_000, seed=Config.DEFAULT_SEED)
    for edge, estimate in report.per_edge.items():
        assert abs(estimate.mean - float(exact)) <= Config.MC_CALIBRATION_SIGMAS * estimate.stderr, edge


def test_mc_k2_within_one_hundredth(oracle):
    report = oracle.mc_edge_expectations(generate_named("complete", 2), trials=100_000, seed=1)
    assert all(abs(e.mean - 0.5) <= 0.01 for e in report.per_edge.values())


def test_mc_sparse_er_bound(oracle):
    report = oracle.mc_edge_expectations(generate_er(50, 0.1, 3), trials=100_000, seed=3)
    for edge, estimate in report.per_edge.items():
        assert estimate.mean <= 0.5 + Config.MC_BOUND_SIGMAS * estimate.stderr, edge
    assert report.ok


@pytest.mark.parametrize("g", AUDIT_CORPUS[:5], ids=_ids(AUDIT_CORPUS[:5]))
def test_mc_agrees_with_exact(oracle, g):
    exact = oracle.exact_edge_expectations(g)
    mc = oracle.mc_edge_expectations(g, trials=100_000, seed=11)
    for edge, value in exact.per_edge.items():
        estimate = mc.per_edge[edge]
        assert abs(estimate.mean - float(value)) <= Config.MC_CALIBRATION_SIGMAS * estimate.stderr, edge


# ── the shuffle ──────────────────────────────────────────────────────────────

def _assert_uniform_over_six(orders, draws):
    counts = Counter(orders)
    assert len(counts) == 6
    assert all(abs(c / draws - 1 / 6) <= 0.02 for c in counts.values())


def test_seeded_permutations_of_three_are_uniform():
    draws = 60_000
    _assert_uniform_over_six((random_rank_assignment(3, seed).order for seed in range(draws)), draws)


def test_trial_permutations_of_three_are_uniform():
    draws = 60_000
    _assert_uniform_over_six((trial_rank_assignment(3, 2024, i).order for i in range(draws)), draws)
