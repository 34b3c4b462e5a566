"""
commands/gen.py — Write a generated graph in the edge-list format.

  gen path 3                 → "3\n0 1\n1 2\n"
  gen er 20 0.2 --seed 7     (same seed, same file)
  gen k2,3                   (the --graph mini-language also works)
"""

from config import Config
from dependencies import write_output
from errors import GraphError
from logging_config import get_logger
from services.graph_core import graph_from_spec, save_edge_list
from utils.validators import ALL_KINDS, GraphSpecValidator, coerce_params, parse_graph_spec

logger = get_logger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "gen",
        parents=parents,
        help="generate a graph and write it as an edge list",
        description=f"Kinds: {', '.join(ALL_KINDS)}. Sizes follow the kind; er takes n and p.",
    )
    parser.add_argument("kind", help="graph kind, or a whole spec such as p3 or er(20,0.2,7)")
    parser.add_argument("params", nargs="*", help="size parameters for the kind")
    parser.set_defaults(handler=cmd_gen)


def cmd_gen(args) -> int:
    seed = getattr(args, "seed", None)
    if args.params:
        kind = args.kind.strip().lower()
        ok, msg = GraphSpecValidator.validate_kind(kind)
        if not ok:
            raise GraphError(msg)
        params = coerce_params(kind, args.params)
        ok, msg = GraphSpecValidator.validate_generator_spec(kind, params)
        if not ok:
            raise GraphError(msg)
    else:
        spec = parse_graph_spec(args.kind, seed=seed)
        kind, params, seed = spec.kind, spec.params, spec.seed

    if kind == "er" and seed is None:
        seed = Config.DEFAULT_SEED
    g = graph_from_spec(kind, params, seed)
    write_output(save_edge_list(g), getattr(args, "out", None))
    logger.info("gen.done", graph=g.name, n=g.vertex_count, m=g.edge_count, fingerprint=g.fingerprint)
    return 0
