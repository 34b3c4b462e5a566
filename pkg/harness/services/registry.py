"""
services/registry.py — Module-level service singletons.

The oracle reads Config once, at import.  Commands that override the
exhaustive bound derive a copy with with_bound() rather than mutating it,
so the singleton is safe to share.  No work happens at import time.
"""

from services.expectation_oracle import ExpectationOracle

oracle = ExpectationOracle()
