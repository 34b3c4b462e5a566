"""
commands/consistency.py — Cross-check the three engines on seeded permutations.

Trial i uses the permutation derived from (seed, i).  The first
disagreement stops the run and is reported with its trial, seed and vertex.
"""

import argparse
from dataclasses import replace

from config import Config
from dependencies import graph_witness, resolve_experiment, resolve_graph, seed_of, write_output
from errors import ClaimViolation, HarnessError
from logging_config import bind_graph, get_logger
from schemas import ConsistencyReport, DisagreementEntry
from services.engines import QueryTrace, cross_check, early_break_run
from services.graph_core import trial_rank_assignment
from services.reporting import graph_meta, render

logger = get_logger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "consistency", parents=parents, help="check that the three MIS engines agree"
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--graph", help="generator spec (see verify)")
    source.add_argument("--graph-file", help="edge-list file")
    parser.add_argument("--trace-out", help="write the query trace of the last checked permutation")
    parser.add_argument("--inject-corruption", action="store_true", help=argparse.SUPPRESS)
    parser.set_defaults(handler=cmd_consistency)


def drop_last_query(trace: QueryTrace) -> QueryTrace:
    """Shorten the first non-empty examined list by one, so the DP sees a premature break."""
    examined = list(trace.examined)
    for v, seen in enumerate(examined):
        if seen:
            examined[v] = seen[:-1]
            return replace(trace, examined=tuple(examined))
    return trace


def cmd_consistency(args) -> int:
    config = resolve_experiment(args, mode="consistency")
    g = resolve_graph(config)
    bind_graph(g)
    trials = config.trials if config.trials is not None else Config.DEFAULT_TRIALS
    seed = seed_of(config)
    mutator = drop_last_query if getattr(args, "inject_corruption", False) else None
    logger.info("consistency.start", n=g.vertex_count, trials=trials, seed=seed)

    checked = 0
    last = None
    disagreement = None
    for trial in range(trials):
        ranks = trial_rank_assignment(g.vertex_count, seed, trial)
        problem = cross_check(g, ranks, trace_mutator=mutator)
        if problem is not None:
            disagreement = DisagreementEntry(
                trial=trial, seed=seed, vertex=problem.vertex, reason=problem.reason, order=list(ranks.order)
            )
            break
        checked += 1
        last = ranks

    trace_out = getattr(args, "trace_out", None)
    if trace_out and last is not None:
        _, trace = early_break_run(g, last)
        try:
            with open(trace_out, "w", encoding="utf-8") as fh:
                fh.write(trace.to_text(last))
        except OSError as exc:
            raise HarnessError(f"cannot write {trace_out}: {exc}")

    document = ConsistencyReport(
        graph=graph_meta(g),
        trials=trials,
        seed=seed,
        checked=checked,
        disagreement=disagreement,
        ok=disagreement is None,
    )
    write_output(render(document, config.format), config.out)
    logger.info("consistency.done", checked=checked, ok=document.ok)

    if disagreement is not None:
        vertex = "-" if disagreement.vertex is None else disagreement.vertex
        raise ClaimViolation(
            f"engines disagree at trial {disagreement.trial} (seed {seed}) vertex {vertex}: {disagreement.reason}",
            witness=list(graph_witness(g)) + [f"permutation order {' '.join(map(str, disagreement.order))}"],
        )
    return 0
