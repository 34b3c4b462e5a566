"""
errors.py — Exception hierarchy for the harness.

Every error carries the process exit code the CLI reports for it:
  0  all checked assertions hold
  1  a claim failed empirically (the witness travels with the exception)
  2  usage, configuration or input error
  3  resource refusal (instance too large for an exhaustive mode)
"""

from typing import Optional, Sequence


class HarnessError(Exception):
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(HarnessError):
    pass


class GraphError(HarnessError, ValueError):
    pass


class GraphFormatError(GraphError):
    def __init__(self, detail: str, line_number: Optional[int] = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number


class RankError(HarnessError, ValueError):
    pass


class TraceError(HarnessError, ValueError):
    def __init__(self, detail: str, vertex: Optional[int] = None):
        super().__init__(detail)
        self.vertex = vertex


class PathError(HarnessError, ValueError):
    pass


class FiltrationError(HarnessError, ValueError):
    pass


class ReportSchemaError(HarnessError, ValueError):
    pass


class ResourceRefusal(HarnessError):
    exit_code = 3

    def __init__(self, detail: str, bound: int, size: int):
        super().__init__(f"{detail} (size {size} exceeds bound {bound})")
        self.bound = bound
        self.size = size


class ClaimViolation(HarnessError):
    exit_code = 1

    def __init__(self, detail: str, witness: Sequence[str] = ()):
        super().__init__(detail)
        self.witness = list(witness)


class NonSimplePathError(ClaimViolation):
    """A path that repeats a vertex passed a query/dangerous check."""

    def __init__(self, path: Sequence[int]):
        super().__init__(
            f"non-simple path passed classification: {tuple(path)}",
            witness=[f"path={tuple(path)}"],
        )
        self.path = tuple(path)
