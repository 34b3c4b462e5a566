"""Shared command plumbing: experiment config resolution, graph sources and output sinks."""

import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from config import Config
from errors import HarnessError, UsageError
from schemas import ExperimentConfig
from services.expectation_oracle import ExpectationOracle
from services.graph_core import Graph, graph_from_spec, read_edge_list
from utils.validators import parse_graph_spec

# Flags that map one-to-one onto ExperimentConfig fields
_FLAG_FIELDS = ("mode", "trials", "seed", "exhaustive_bound", "out", "format")


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return data


def _first_error(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ()))
    message = first.get("msg", "invalid value")
    return f"{where}: {message}" if where else message


def resolve_experiment(args, mode: Optional[str] = None) -> ExperimentConfig:
    """Merge --config FILE with command-line flags; flags win on conflict."""
    path = getattr(args, "config", None)
    data = load_config_file(path) if path else {}

    graph = getattr(args, "graph", None)
    graph_file = getattr(args, "graph_file", None)
    if graph is not None or graph_file is not None:
        data.pop("graph", None)
        data.pop("graph_file", None)
        data["graph"] = graph
        data["graph_file"] = graph_file

    for name in _FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if mode is not None:
        data["mode"] = mode

    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        raise UsageError(f"invalid experiment config: {_first_error(exc)}")


def seed_of(config: ExperimentConfig) -> int:
    return Config.DEFAULT_SEED if config.seed is None else config.seed


def resolve_graph(config: ExperimentConfig) -> Graph:
    """Load --graph-file, or build --graph; a seedless er(...) spec falls back to --seed."""
    if config.graph_file is not None:
        return read_edge_list(config.graph_file)
    spec = parse_graph_spec(config.graph)
    seed = spec.seed if spec.seed is not None else seed_of(config)
    return graph_from_spec(spec.kind, spec.params, seed)


def oracle_for(config: ExperimentConfig) -> ExpectationOracle:
    from services.registry import oracle

    return oracle.with_bound(config.exhaustive_bound)


def write_output(text: str, out: Optional[str]) -> None:
    if not out:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise HarnessError(f"cannot write {out}: {exc}")


def graph_witness(g: Graph) -> Sequence[str]:
    """Enough to rebuild the graph: name, fingerprint and edge list."""
    edges = " ".join(f"{u}-{v}" for u, v in g.edges())
    return [f"graph {g.name} n={g.vertex_count} {g.fingerprint}", f"edges {edges or '(none)'}"]
