"""Filtration states, query and dangerous paths, the potential and its one-step behaviour."""

import itertools
from fractions import Fraction

import pytest

from errors import FiltrationError, PathError, ResourceRefusal
from services.engines import call_counts_via_dp, early_break_run
from services.graph_core import OrderedEdge, RankAssignment, generate_named
from services.path_analysis import (
    HALF,
    FiltrationState,
    PathCache,
    count_dangerous_paths,
    count_query_paths,
    count_query_paths_ending_at,
    dangerous_probability_oracle,
    delta_r_expectation,
    enumerate_dangerous_paths,
    enumerate_query_paths,
    evolution_violations,
    extension_set,
    filtration,
    is_dangerous_path,
    is_query_path,
    one_step_expectation,
    potential,
    potential_ledger,
    query_increment_check,
)

IDENTITY3 = RankAssignment.from_order([0, 1, 2])


def _all_prefix_states(g):
    """Every reachable state with t < n, one per permutation prefix."""
    stack = [FiltrationState.initial(g)]
    while stack:
        state = stack.pop()
        if state.is_final:
            continue
        yield state
        stack.extend(state.extend(v) for v in state.unrevealed())


# ── filtration ───────────────────────────────────────────────────────────────

def test_filtration_initial_state(p3):
    state = filtration(p3, IDENTITY3, 0)
    assert state.revealed == ()
    assert state.independent_set == frozenset()


def test_filtration_replays_prefix(p3):
    state = filtration(p3, IDENTITY3, 2)
    assert state.revealed == (0, 1)
    assert state.independent_set == frozenset({0})
    assert state.rank(1) == 2
    assert state.rank(2) is None


def test_filtration_final_state_is_greedy_mis(paw):
    ranks = RankAssignment.from_order([3, 1, 0, 2])
    mis, _ = early_break_run(paw, ranks)
    assert filtration(paw, ranks, 4).independent_set == mis.members


def test_filtration_rejects_bad_time(p3):
    with pytest.raises(FiltrationError):
        filtration(p3, IDENTITY3, 4)


def test_extend_rejects_repeat(p3):
    with pytest.raises(FiltrationError, match="already revealed"):
        FiltrationState.initial(p3).extend(1).extend(1)


# ── query paths ──────────────────────────────────────────────────────────────

def test_query_paths_on_p3_full_reveal(p3):
    state = filtration(p3, IDENTITY3, 3)
    assert is_query_path(state, (0, 1))
    assert is_query_path(state, (0, 1, 2))
    assert not is_query_path(state, (1, 0))


def test_query_path_needs_revealed_first_vertex(k3):
    state = filtration(k3, IDENTITY3, 0)
    assert not is_query_path(state, (0, 1))


def test_blocked_query_path_on_k3(k3):
    state = filtration(k3, IDENTITY3, 3)
    assert not is_query_path(state, (0, 1, 2))


def test_non_path_rejected(p3):
    state = filtration(p3, IDENTITY3, 3)
    with pytest.raises(PathError, match="not adjacent"):
        is_query_path(state, (0, 2))
    with pytest.raises(PathError):
        is_dangerous_path(state, (0,))


# ── dangerous paths ──────────────────────────────────────────────────────────

def test_every_edge_dangerous_at_time_zero(k4):
    state = FiltrationState.initial(k4)
    for edge in k4.ordered_edges():
        assert is_dangerous_path(state, edge)
        assert enumerate_dangerous_paths(state, edge) == [tuple(edge)]
        assert enumerate_query_paths(state, edge) == []


def test_revealed_endpoint_is_not_dangerous(p3):
    assert not is_dangerous_path(filtration(p3, IDENTITY3, 1), (0, 1))


def test_mis_neighbour_of_tail_blocks_danger(k3):
    assert not is_dangerous_path(filtration(k3, IDENTITY3, 1), (1, 2))


def test_p3_after_one_reveal(p3):
    state = filtration(p3, IDENTITY3, 1)
    edge = OrderedEdge(0, 1)
    assert enumerate_query_paths(state, edge) == [(0, 1)]
    assert enumerate_dangerous_paths(state, edge) == [(0, 1, 2)]
    assert potential(state, edge) == Fraction(3, 2)


def test_no_dangerous_paths_at_time_n(c4):
    state = filtration(c4, RankAssignment.from_order([3, 1, 2, 0]), 4)
    for edge in c4.ordered_edges():
        assert enumerate_dangerous_paths(state, edge) == []


def test_full_reveal_counts(p3):
    state = filtration(p3, IDENTITY3, 3)
    assert enumerate_query_paths(state, OrderedEdge(0, 1)) == [(0, 1), (0, 1, 2)]
    assert enumerate_query_paths(state, OrderedEdge(1, 0)) == []
    assert potential(state, OrderedEdge(0, 1)) == 2


def test_dp_counts_agree_with_listing(small_graphs):
    for g in small_graphs:
        for state in _all_prefix_states(g):
            for edge in g.ordered_edges():
                assert count_query_paths(state, edge) == len(enumerate_query_paths(state, edge))
                assert count_dangerous_paths(state, edge) == len(enumerate_dangerous_paths(state, edge))


def test_query_paths_ending_at_match_call_counts(paw):
    for order in itertools.permutations(range(4)):
        ranks = RankAssignment.from_order(order)
        _, trace = early_break_run(paw, ranks)
        final = filtration(paw, ranks, 4)
        assert count_query_paths_ending_at(final) == call_counts_via_dp(paw, ranks, trace)


# ── the probability oracle ───────────────────────────────────────────────────

def test_oracle_k2(k2):
    assert dangerous_probability_oracle(FiltrationState.initial(k2), (0, 1)) == HALF


def test_oracle_k3(k3):
    assert dangerous_probability_oracle(FiltrationState.initial(k3), (0, 1)) == Fraction(1, 3)


def test_oracle_zero_once_tail_revealed_first(p3):
    state = FiltrationState.from_prefix(p3, [2])
    assert dangerous_probability_oracle(state, (1, 2)) == 0


def test_oracle_refuses_large_completion_space(k3):
    with pytest.raises(ResourceRefusal) as info:
        dangerous_probability_oracle(FiltrationState.initial(k3), (0, 1), bound=2)
    assert info.value.exit_code == 3


def test_characterization_matches_oracle_on_small_graphs(small_graphs):
    for g in small_graphs:
        for state in _all_prefix_states(g):
            for edge in g.ordered_edges():
                candidates = [tuple(edge)] + [
                    path + (z,)
                    for path in enumerate_query_paths(state, edge)
                    for z in g.neighbors(path[-1])
                    if z not in path
                ]
                for path in candidates:
                    p = dangerous_probability_oracle(state, path)
                    assert is_dangerous_path(state, path) == (0 < p < 1), (state.revealed, path, p)


# ── potential and its expectation ────────────────────────────────────────────

def test_potential_starts_at_one_half(small_graphs):
    for g in small_graphs:
        state = FiltrationState.initial(g)
        assert all(potential(state, e) == HALF for e in g.ordered_edges())


def test_ledger_endpoints(c4):
    ranks = RankAssignment.from_order([1, 3, 0, 2])
    for edge in c4.ordered_edges():
        ledger = potential_ledger(c4, ranks, edge)
        first, last = ledger.at(0), ledger.at(4)
        assert (first.q, first.d, first.phi) == (0, 1, HALF)
        assert last.d == 0
        assert all(row.phi == row.q + row.d * HALF for row in ledger.rows)


def test_one_step_expectation_p3_is_a_martingale(p3):
    edge = OrderedEdge(0, 1)
    assert one_step_expectation(FiltrationState.initial(p3), edge) == HALF


def test_one_step_expectation_k3_strict(k3):
    assert one_step_expectation(FiltrationState.initial(k3), OrderedEdge(0, 1)) == Fraction(1, 3)


def test_one_step_expectation_rejects_final_state(p3):
    with pytest.raises(FiltrationError):
        one_step_expectation(filtration(p3, IDENTITY3, 3), OrderedEdge(0, 1))


def test_supermartingale_on_every_reachable_state(small_graphs):
    for g in small_graphs:
        cache = PathCache(g)
        for state in _all_prefix_states(g):
            for edge in g.ordered_edges():
                assert one_step_expectation(state, edge, cache) <= potential(state, edge, cache)


# ── increment identity ───────────────────────────────────────────────────────

def test_increment_at_time_zero(k4):
    gained, predicted = query_increment_check(FiltrationState.initial(k4), OrderedEdge(2, 3))
    assert gained == predicted == Fraction(1, 4)


def test_increment_p3_after_one_reveal(p3):
    assert query_increment_check(filtration(p3, IDENTITY3, 1), OrderedEdge(0, 1)) == (HALF, HALF)


def test_increment_without_dangerous_paths(p3):
    state = FiltrationState.from_prefix(p3, [1])
    assert query_increment_check(state, OrderedEdge(0, 1)) == (0, 0)


# ── A_R and Δ_R ──────────────────────────────────────────────────────────────

def test_extension_sets(k2, p3):
    assert extension_set(FiltrationState.initial(k2), (0, 1)) == frozenset()
    assert extension_set(FiltrationState.initial(p3), (0, 1)) == frozenset({2})
    star = generate_named("star", 4)
    assert extension_set(FiltrationState.initial(star), (1, 0)) == frozenset({2, 3, 4})


def test_extension_set_requires_dangerous_path(p3):
    with pytest.raises(PathError):
        extension_set(filtration(p3, IDENTITY3, 1), (0, 1))


def test_delta_r_examples(k2, p3, k3):
    assert delta_r_expectation(FiltrationState.initial(k2), (0, 1)) == -1
    assert delta_r_expectation(FiltrationState.initial(p3), (0, 1)) == Fraction(-2, 3)
    assert delta_r_expectation(FiltrationState.initial(k3), (0, 1)) < Fraction(-2, 3)


def test_evolution_containment(small_graphs):
    for g in small_graphs:
        cache = PathCache(g)
        for state in _all_prefix_states(g):
            for edge in g.ordered_edges():
                assert evolution_violations(state, edge, cache) == []


def test_path_cache_belongs_to_one_graph(p3, k3):
    cache = PathCache(p3)
    with pytest.raises(FiltrationError):
        cache.listing(FiltrationState.initial(k3), OrderedEdge(0, 1))
