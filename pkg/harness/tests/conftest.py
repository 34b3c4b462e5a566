"""pytest configuration — sets harness env vars before any harness module is imported."""

import os

# Config reads these at import time
os.environ["RGMIS_ENV"] = "test"
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ["RGMIS_WORKERS"] = "1"
os.environ["RGMIS_EXHAUSTIVE_BOUND"] = "9"
os.environ["RGMIS_ORACLE_BOUND"] = "9"
os.environ["RGMIS_LIST_ENUMERATION_MAX_N"] = "10"

import pytest
from hypothesis import HealthCheck, settings

from services.graph_core import build_graph, generate_er, generate_named

settings.register_profile(
    "harness",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("harness")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale runs (deselect with -m 'not slow')")


# ── graph fixtures ───────────────────────────────────────────────────────────

@pytest.fixture
def k2():
    return generate_named("complete", 2)


@pytest.fixture
def p3():
    return generate_named("path", 3)


@pytest.fixture
def k3():
    return generate_named("complete", 3)


@pytest.fixture
def p4():
    return generate_named("path", 4)


@pytest.fixture
def c4():
    return generate_named("cycle", 4)


@pytest.fixture
def k4():
    return generate_named("complete", 4)


@pytest.fixture
def paw():
    """Triangle 0-1-2 with a pendant vertex 3 on 2."""
    return build_graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)], name="paw")


@pytest.fixture
def er6():
    return generate_er(6, 0.4, 1)


@pytest.fixture
def small_graphs():
    return [
        generate_named("complete", 2),
        generate_named("path", 3),
        generate_named("complete", 3),
        generate_named("path", 4),
        generate_named("cycle", 4),
        generate_named("cycle", 5),
        generate_named("star", 3),
        generate_named("complete_bipartite", 2, 2),
        build_graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)], name="paw"),
    ]
