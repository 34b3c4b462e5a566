"""Pydantic v2 schemas for experiment configs and machine-readable reports."""

from fractions import Fraction
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from utils.validators import parse_graph_spec

SCHEMA_VERSION = 1


class RationalValue(BaseModel):
    num: int
    den: int = Field(gt=0)

    @classmethod
    def of(cls, value: Fraction) -> "RationalValue":
        value = Fraction(value)
        return cls(num=value.numerator, den=value.denominator)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return str(self.to_fraction())


class EstimateValue(BaseModel):
    mean: float
    stderr: float = Field(ge=0)

    def __str__(self) -> str:
        return f"{self.mean:.6f} ± {self.stderr:.6f}"


Quantity = Union[RationalValue, EstimateValue]


class GraphMeta(BaseModel):
    name: str
    n: int = Field(ge=0)
    m: int = Field(ge=0)
    max_degree: int = Field(ge=0)
    triangle_free: bool
    fingerprint: str
    labeling: str = ""


class EdgeEntry(BaseModel):
    source: int
    target: int
    value: Quantity


class VertexEntry(BaseModel):
    vertex: int
    expected_calls: Quantity


class CheckResult(BaseModel):
    name: str
    holds: bool
    detail: str
    witness: List[str] = Field(default_factory=list)


class Aggregates(BaseModel):
    total_query_paths: Quantity
    average_calls: Quantity
    average_bound: RationalValue
    edge_bound: RationalValue
    max_edge: Optional[EdgeEntry] = None


class ExpectationReportSchema(BaseModel):
    kind: Literal["edge_expectations"] = "edge_expectations"
    schema_version: int = SCHEMA_VERSION
    mode: Literal["exact", "mc"]
    graph: GraphMeta
    permutations: Optional[int] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    per_edge: List[EdgeEntry]
    per_vertex: List[VertexEntry]
    aggregates: Aggregates
    checks: List[CheckResult]
    ok: bool

    @model_validator(mode="after")
    def mode_fields(self):
        if self.mode == "mc" and (self.trials is None or self.seed is None):
            raise ValueError("Monte Carlo reports must record trials and seed")
        if self.mode == "exact":
            if self.permutations is None:
                raise ValueError("exact reports must record the permutation count")
            if any(not isinstance(e.value, RationalValue) for e in self.per_edge):
                raise ValueError("exact reports carry rational per-edge values")
        return self


class AuditEdgeSummary(BaseModel):
    source: int
    target: int
    rows: int
    min_slack: RationalValue
    max_slack: RationalValue
    tight: bool


class TelescopeEntrySchema(BaseModel):
    source: int
    target: int
    final_potential: RationalValue
    direct_invocations: RationalValue
    exact: RationalValue


class AuditReportSchema(BaseModel):
    kind: Literal["supermartingale_audit"] = "supermartingale_audit"
    schema_version: int = SCHEMA_VERSION
    mode: Literal["audit"] = "audit"
    graph: GraphMeta
    states: int
    rows: int
    dangerous_paths_checked: int
    min_slack: Optional[RationalValue] = None
    max_slack: Optional[RationalValue] = None
    all_tight: bool
    per_edge: List[AuditEdgeSummary]
    telescope: List[TelescopeEntrySchema]
    telescope_total: RationalValue
    checks: List[CheckResult]
    ok: bool


class DisagreementEntry(BaseModel):
    trial: int
    seed: int
    vertex: Optional[int] = None
    reason: str
    order: List[int]


class ConsistencyReport(BaseModel):
    kind: Literal["consistency"] = "consistency"
    schema_version: int = SCHEMA_VERSION
    mode: Literal["consistency"] = "consistency"
    graph: GraphMeta
    trials: int = Field(ge=1)
    seed: int
    checked: int
    disagreement: Optional[DisagreementEntry] = None
    ok: bool


class TraceSummary(BaseModel):
    kind: Literal["trace_summary"] = "trace_summary"
    schema_version: int = SCHEMA_VERSION
    source: str
    vertices: int
    query_edges: int
    total_calls: int
    max_calls: int
    max_calls_vertex: Optional[int] = None
    calls: List[int]


ReportDocument = Annotated[
    Union[ExpectationReportSchema, AuditReportSchema, ConsistencyReport, TraceSummary],
    Field(discriminator="kind"),
]
report_adapter = TypeAdapter(ReportDocument)


class ExperimentConfig(BaseModel):
    """A verify/consistency run described as one JSON document; CLI flags override it."""

    model_config = ConfigDict(extra="forbid")

    graph: Optional[str] = None
    graph_file: Optional[str] = None
    mode: Literal["exact", "mc", "audit", "consistency"] = "exact"
    trials: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2**64)
    exhaustive_bound: Optional[int] = Field(None, ge=1)
    out: Optional[str] = None
    format: Literal["json", "csv", "table"] = "json"

    @field_validator("graph")
    @classmethod
    def graph_spec(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            parse_graph_spec(v)
        return v

    @model_validator(mode="after")
    def one_source(self):
        if (self.graph is None) == (self.graph_file is None):
            raise ValueError("exactly one graph source is required: graph or graph_file")
        if self.mode == "mc" and self.trials is None:
            raise ValueError("mode 'mc' requires trials")
        return self
