"""
commands/verify.py — Check the expectation claims on one graph.

  --mode exact   all n! permutations: per-edge ≤ 1/2, average ≤ m/n, tightness
  --mode mc      seeded Monte Carlo with standard errors (needs --trials)
  --mode audit   supermartingale audit at every reachable state plus the telescope check

Exit 0 when every check holds, 1 with a witness on stderr otherwise.
"""

from dependencies import graph_witness, oracle_for, resolve_experiment, resolve_graph, seed_of, write_output
from errors import ClaimViolation, UsageError
from logging_config import bind_graph, get_logger
from services.reporting import (
    audit_document,
    expectation_document,
    render,
    render_audit_rows,
    witness_lines,
)

logger = get_logger(__name__)

MODES = ("exact", "mc", "audit")


def register(subparsers, parents):
    parser = subparsers.add_parser("verify", parents=parents, help="verify the expectation bounds on a graph")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--graph", help="generator spec: p3, c5, k4, k2,3, s5, er(50,0.1,3), path:3 ...")
    source.add_argument("--graph-file", help="edge-list file")
    parser.add_argument("--mode", choices=MODES, help="default: exact")
    parser.set_defaults(handler=cmd_verify)


def cmd_verify(args) -> int:
    config = resolve_experiment(args)
    if config.mode not in MODES:
        raise UsageError(f"verify runs modes {', '.join(MODES)}; use the consistency command for '{config.mode}'")
    g = resolve_graph(config)
    bind_graph(g)
    oracle = oracle_for(config)
    logger.info("verify.start", n=g.vertex_count, m=g.edge_count, mode=config.mode)

    if config.mode == "audit":
        audit = oracle.exhaustive_supermartingale_audit(g)
        telescope = oracle.telescope_check(g)
        document = audit_document(audit, telescope)
        text = render_audit_rows(audit) if config.format == "csv" else render(document, config.format)
    else:
        if config.mode == "exact":
            report = oracle.exact_edge_expectations(g)
        else:
            report = oracle.mc_edge_expectations(g, config.trials, seed_of(config))
        document = expectation_document(report)
        text = render(document, config.format)

    write_output(text, config.out)
    logger.info("verify.done", mode=config.mode, ok=document.ok)
    if not document.ok:
        failed = [c.name for c in document.checks if not c.holds]
        raise ClaimViolation(
            f"{config.mode} verification failed on {g.name}: {', '.join(failed)}",
            witness=list(graph_witness(g)) + witness_lines(document),
        )
    return 0
