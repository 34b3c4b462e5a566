"""
services/reporting.py — Oracle results → pydantic documents → JSON / CSV / table text.

Reports carry no timestamps or host data: the same run always renders to
the same bytes.
"""

import csv
import io
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from pydantic import ValidationError

from config import Config
from errors import ReportSchemaError
from schemas import (
    Aggregates,
    AuditEdgeSummary,
    AuditReportSchema,
    CheckResult,
    ConsistencyReport,
    EdgeEntry,
    EstimateValue,
    ExpectationReportSchema,
    GraphMeta,
    RationalValue,
    TelescopeEntrySchema,
    TraceSummary,
    VertexEntry,
    report_adapter,
)
from services.engines import parse_trace_text
from services.expectation_oracle import (
    AuditReport,
    Check,
    EdgeExpectationReport,
    Estimate,
    TelescopeResult,
    audit_csv_rows,
)
from services.graph_core import Graph, OrderedEdge, is_triangle_free


def graph_meta(g: Graph) -> GraphMeta:
    return GraphMeta(
        name=g.name,
        n=g.vertex_count,
        m=g.edge_count,
        max_degree=g.max_degree,
        triangle_free=is_triangle_free(g),
        fingerprint=g.fingerprint,
        labeling=g.labeling,
    )


def _quantity(value):
    if isinstance(value, Estimate):
        return EstimateValue(mean=value.mean, stderr=value.stderr)
    return RationalValue.of(value)


def _checks(checks: Sequence[Check]) -> List[CheckResult]:
    return [
        CheckResult(name=c.name, holds=c.holds, detail=c.detail, witness=list(c.witness))
        for c in checks
    ]


def expectation_document(report: EdgeExpectationReport) -> ExpectationReportSchema:
    per_edge = [
        EdgeEntry(source=edge.source, target=edge.target, value=_quantity(value))
        for edge, value in sorted(report.per_edge.items())
    ]
    top = report.max_edge()
    max_edge = None
    if top is not None:
        edge, value = top
        max_edge = EdgeEntry(source=edge.source, target=edge.target, value=_quantity(value))
    checks = report.checks()
    return ExpectationReportSchema(
        mode=report.mode,
        graph=graph_meta(report.graph),
        permutations=report.permutations,
        trials=report.trials,
        seed=report.seed,
        per_edge=per_edge,
        per_vertex=[
            VertexEntry(vertex=v, expected_calls=_quantity(value))
            for v, value in enumerate(report.per_vertex)
        ],
        aggregates=Aggregates(
            total_query_paths=_quantity(report.total_query_paths),
            average_calls=_quantity(report.average_calls),
            average_bound=RationalValue.of(report.average_bound),
            edge_bound=RationalValue.of(report.edge_bound),
            max_edge=max_edge,
        ),
        checks=_checks(checks),
        ok=all(c.holds for c in checks),
    )


def audit_document(audit: AuditReport, telescope: TelescopeResult) -> AuditReportSchema:
    by_edge: Dict[OrderedEdge, List[Fraction]] = {}
    for row in audit.rows:
        by_edge.setdefault(row.edge, []).append(row.slack)
    per_edge = [
        AuditEdgeSummary(
            source=edge.source,
            target=edge.target,
            rows=len(slacks),
            min_slack=RationalValue.of(min(slacks)),
            max_slack=RationalValue.of(max(slacks)),
            tight=all(s == 0 for s in slacks),
        )
        for edge, slacks in sorted(by_edge.items())
    ]
    checks = audit.checks() + [
        Check(
            "telescope",
            telescope.ok,
            "E[Φ_n] = expected direct invocations ≤ 1/2 per ordered edge",
            tuple(telescope.witness()),
        )
    ]
    return AuditReportSchema(
        graph=graph_meta(audit.graph),
        states=audit.states,
        rows=len(audit.rows),
        dangerous_paths_checked=audit.dangerous_paths_checked,
        min_slack=None if audit.min_slack is None else RationalValue.of(audit.min_slack),
        max_slack=None if audit.max_slack is None else RationalValue.of(audit.max_slack),
        all_tight=audit.all_tight,
        per_edge=per_edge,
        telescope=[
            TelescopeEntrySchema(
                source=e.edge.source,
                target=e.edge.target,
                final_potential=RationalValue.of(e.final_potential),
                direct_invocations=RationalValue.of(e.direct_invocations),
                exact=RationalValue.of(e.exact),
            )
            for e in telescope.entries
        ],
        telescope_total=RationalValue.of(telescope.total),
        checks=_checks(checks),
        ok=all(c.holds for c in checks),
    )


def trace_document(text: str, source: str) -> TraceSummary:
    edges, calls = parse_trace_text(text)
    counts = [calls.get(v, 0) for v in range(max(calls, default=-1) + 1)]
    top = max(range(len(counts)), key=lambda v: (counts[v], -v), default=None)
    return TraceSummary(
        source=source,
        vertices=len(counts),
        query_edges=len(edges),
        total_calls=sum(counts),
        max_calls=counts[top] if top is not None else 0,
        max_calls_vertex=top,
        calls=counts,
    )


def load_report(text: str, source: str = "report"):
    try:
        return report_adapter.validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise ReportSchemaError(f"{source}: not a harness report ({where}: {first.get('msg')})")


# ── headline comparisons ─────────────────────────────────────────────────────

def _exact_status(value: Fraction, bound: Fraction) -> str:
    if value > bound:
        return "VIOLATED"
    return "TIGHT" if value == bound else "STRICT"


def _mc_status(value: EstimateValue, bound: Fraction) -> str:
    if value.mean - Config.MC_BOUND_SIGMAS * value.stderr > float(bound):
        return "VIOLATED"
    return "WITHIN"


def _compare(value, bound: RationalValue) -> Tuple[str, str]:
    if isinstance(value, EstimateValue):
        return f"{value.mean:.6f}±{value.stderr:.6f}", _mc_status(value, bound.to_fraction())
    return str(value), _exact_status(value.to_fraction(), bound.to_fraction())


def headline_rows(document) -> List[Tuple[str, str, str, str]]:
    """(quantity, value, bound, status) rows summarising a report."""
    if isinstance(document, ExpectationReportSchema):
        agg = document.aggregates
        rows = []
        if agg.max_edge is None:
            rows.append(("max_edge_expectation", "none", str(agg.edge_bound), "VACUOUS"))
        else:
            value, status = _compare(agg.max_edge.value, agg.edge_bound)
            rows.append(("max_edge_expectation", value, str(agg.edge_bound), status))
        value, status = _compare(agg.average_calls, agg.average_bound)
        rows.append(("average_calls", value, str(agg.average_bound), status))
        return rows
    if isinstance(document, AuditReportSchema):
        if document.min_slack is None:
            status = "VACUOUS"
        elif document.min_slack.to_fraction() < 0:
            status = "VIOLATED"
        else:
            status = "TIGHT" if document.all_tight else "STRICT"
        m = document.graph.m
        total = document.telescope_total
        return [
            ("min_slack", "none" if document.min_slack is None else str(document.min_slack), "0", status),
            ("telescope_total", str(total), str(m), _exact_status(total.to_fraction(), Fraction(m))),
        ]
    if isinstance(document, ConsistencyReport):
        status = "AGREE" if document.ok else "DISAGREE"
        return [("engine_agreement", str(document.checked), str(document.trials), status)]
    return [
        ("total_calls", str(document.total_calls), "-", "INFO"),
        ("max_calls", str(document.max_calls), "-", "INFO"),
    ]


# ── renderers ────────────────────────────────────────────────────────────────

def _csv_text(rows: Sequence[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _value_cells(value) -> List[str]:
    if isinstance(value, EstimateValue):
        return ["", "", repr(value.mean), repr(value.stderr)]
    return [str(value.num), str(value.den), "", ""]


def csv_rows(document) -> List[List[str]]:
    if isinstance(document, ExpectationReportSchema):
        rows = [["edge_from", "edge_to", "value_num", "value_den", "mean", "stderr"]]
        rows.extend([str(e.source), str(e.target)] + _value_cells(e.value) for e in document.per_edge)
        return rows
    if isinstance(document, AuditReportSchema):
        rows = [["edge_from", "edge_to", "rows", "min_slack_num", "min_slack_den",
                 "max_slack_num", "max_slack_den", "tight"]]
        rows.extend(
            [str(e.source), str(e.target), str(e.rows), str(e.min_slack.num), str(e.min_slack.den),
             str(e.max_slack.num), str(e.max_slack.den), str(e.tight).lower()]
            for e in document.per_edge
        )
        return rows
    if isinstance(document, ConsistencyReport):
        d = document.disagreement
        return [
            ["graph", "trials", "seed", "checked", "ok", "trial", "vertex", "reason"],
            [document.graph.name, str(document.trials), str(document.seed), str(document.checked),
             str(document.ok).lower(),
             "" if d is None else str(d.trial),
             "" if d is None or d.vertex is None else str(d.vertex),
             "" if d is None else d.reason],
        ]
    rows = [["vertex", "calls"]]
    rows.extend([str(v), str(c)] for v, c in enumerate(document.calls))
    return rows


def _table(document) -> str:
    lines = [f"{q} {value} bound {bound} status {status}" for q, value, bound, status in headline_rows(document)]
    if isinstance(document, ExpectationReportSchema):
        lines.append("")
        lines.append(f"graph {document.graph.name}  n={document.graph.n}  m={document.graph.m}  mode={document.mode}")
        lines.append(f"{'edge':>12}  {'expected direct invocations':>28}")
        for e in document.per_edge:
            lines.append(f"{f'({e.source},{e.target})':>12}  {str(e.value):>28}")
    elif isinstance(document, AuditReportSchema):
        lines.append("")
        lines.append(f"graph {document.graph.name}  states={document.states}  rows={document.rows}")
        lines.append(f"{'edge':>12}  {'min slack':>12}  {'max slack':>12}  {'E[Φ_n]':>10}")
        finals = {(e.source, e.target): e.final_potential for e in document.telescope}
        for e in document.per_edge:
            final = finals.get((e.source, e.target))
            lines.append(
                f"{f'({e.source},{e.target})':>12}  {str(e.min_slack):>12}  "
                f"{str(e.max_slack):>12}  {str(final) if final else '-':>10}"
            )
    elif isinstance(document, TraceSummary):
        lines.append(f"query_edges {document.query_edges}")
    checks = getattr(document, "checks", [])
    if checks:
        lines.append("")
        for check in checks:
            lines.append(f"{'PASS' if check.holds else 'FAIL'}  {check.name}: {check.detail}")
    return "\n".join(lines) + "\n"


def render(document, fmt: str) -> str:
    if fmt == "json":
        return document.model_dump_json(indent=2) + "\n"
    if fmt == "csv":
        return _csv_text(csv_rows(document))
    if fmt == "table":
        return _table(document)
    raise ReportSchemaError(f"unknown format '{fmt}'; expected one of {', '.join(Config.REPORT_FORMATS)}")


def render_audit_rows(audit: AuditReport) -> str:
    """Every (state, edge) row of an audit, the CSV form of verify --mode audit."""
    return _csv_text(audit_csv_rows(audit))


def witness_lines(document) -> List[str]:
    lines: List[str] = []
    for check in getattr(document, "checks", []):
        if not check.holds:
            lines.append(f"failed {check.name}: {check.detail}")
            lines.extend(f"  {w}" for w in check.witness)
    return lines
