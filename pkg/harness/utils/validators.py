"""Input validation helpers — generator specs and the --graph mini-language."""

import re
from typing import NamedTuple, Optional, Tuple

from errors import GraphError

NAMED_KINDS = ("path", "cycle", "complete", "complete_bipartite", "star")
ALL_KINDS = NAMED_KINDS + ("er",)

SEED_MAX = 2**64


class GraphSpec(NamedTuple):
    kind: str
    params: Tuple
    seed: Optional[int] = None


class GraphSpecValidator:
    """Checks graph kinds, generator sizes and seeds; each returns (ok, message)."""

    ARITY = {
        "path": 1,
        "cycle": 1,
        "complete": 1,
        "star": 1,
        "complete_bipartite": 2,
        "er": 2,
    }

    @classmethod
    def validate_kind(cls, kind: str):
        if kind not in cls.ARITY:
            return False, f"Unknown graph kind '{kind}'. Allowed: {', '.join(ALL_KINDS)}"
        return True, ""

    @classmethod
    def validate_generator_spec(cls, kind: str, params: tuple):
        ok, msg = cls.validate_kind(kind)
        if not ok:
            return ok, msg
        if len(params) != cls.ARITY[kind]:
            return False, f"{kind} takes {cls.ARITY[kind]} size parameter(s), got {len(params)}"
        if kind == "er":
            n, p = params
            if not isinstance(n, int) or n < 0:
                return False, "er requires an integer n ≥ 0"
            if not 0.0 <= p <= 1.0:
                return False, f"er edge probability must lie in [0, 1], got {p}"
            return True, ""
        for size in params:
            if not isinstance(size, int) or size < 1:
                return False, f"{kind} sizes must be integers ≥ 1, got {size}"
        if kind == "cycle" and params[0] < 3:
            return False, "cycle requires ≥ 3 vertices"
        return True, ""

    @staticmethod
    def validate_seed(seed: Optional[int]):
        if seed is None:
            return True, ""
        if not 0 <= seed < SEED_MAX:
            return False, f"seed must be a 64-bit unsigned integer, got {seed}"
        return True, ""


# ── --graph mini-language ────────────────────────────────────────────────────

_SHORTHAND = [
    (re.compile(r"^p(\d+)$"), "path"),
    (re.compile(r"^c(\d+)$"), "cycle"),
    (re.compile(r"^k(\d+),(\d+)$"), "complete_bipartite"),
    (re.compile(r"^k(\d+)$"), "complete"),
    (re.compile(r"^s(?:tar)?(\d+)$"), "star"),
]
_ER_RE = re.compile(
    r"^er\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*(?:,\s*(?:seed\s*=?\s*)?(\d+)\s*)?\)$",
    re.IGNORECASE,
)
_LONG_RE = re.compile(r"^([a-z_]+):(.*)$")


def coerce_params(kind: str, raw: list) -> tuple:
    """Turn string parameters into the typed tuple a generator expects."""
    try:
        if kind == "er":
            return (int(raw[0]), float(raw[1])) + tuple(raw[2:])
        return tuple(int(x) for x in raw)
    except (ValueError, IndexError):
        raise GraphError(f"Invalid parameters for {kind}: {' '.join(map(str, raw))}")


def parse_graph_spec(text: str, seed: Optional[int] = None) -> GraphSpec:
    """Parse 'p3', 'k2,3', 'er(50,0.1,3)', 'path:3', 'er:20,0.2,7' into a validated GraphSpec."""
    spec = text.strip().lower().replace(" ", "")
    kind, raw = None, []

    for pattern, name in _SHORTHAND:
        match = pattern.match(spec)
        if match:
            kind, raw = name, list(match.groups())
            break

    if kind is None:
        match = _ER_RE.match(spec)
        if match:
            kind = "er"
            raw = [match.group(1), match.group(2)]
            if match.group(3) is not None:
                seed = int(match.group(3))

    if kind is None:
        match = _LONG_RE.match(spec)
        if not match:
            raise GraphError(f"Unrecognised graph spec '{text}'")
        kind = match.group(1)
        raw = [x for x in match.group(2).split(",") if x]
        ok, msg = GraphSpecValidator.validate_kind(kind)
        if not ok:
            raise GraphError(msg)
        if kind == "er" and len(raw) == 3:
            seed = int(raw.pop())

    params = coerce_params(kind, raw)
    ok, msg = GraphSpecValidator.validate_generator_spec(kind, params)
    if not ok:
        raise GraphError(msg)
    ok, msg = GraphSpecValidator.validate_seed(seed)
    if not ok:
        raise GraphError(msg)
    return GraphSpec(kind=kind, params=params, seed=seed)
