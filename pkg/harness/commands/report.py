"""
commands/report.py — Re-render saved reports or query traces as table, CSV or JSON.

A table starts with the headline comparisons, e.g.
  max_edge_expectation 1/2 bound 1/2 status TIGHT
"""

from pathlib import Path

from dependencies import write_output
from errors import HarnessError, UsageError
from logging_config import get_logger
from services.reporting import load_report, render, trace_document

logger = get_logger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser("report", parents=parents, help="summarise saved reports or trace files")
    parser.add_argument("inputs", nargs="+", help="JSON report(s) written by verify/consistency, or trace files")
    parser.set_defaults(handler=cmd_report)


def _load(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise HarnessError(f"cannot read {path}: {exc}")
    if text.lstrip().startswith("{"):
        return load_report(text, source=str(path))
    return trace_document(text, source=str(path))


def cmd_report(args) -> int:
    fmt = getattr(args, "format", None) or "table"
    if getattr(args, "config", None):
        raise UsageError("report takes its inputs as arguments, not --config")
    blocks = []
    for raw in args.inputs:
        document = _load(Path(raw))
        blocks.append(render(document, fmt))
        logger.debug("report.rendered", source=raw, kind=document.kind, format=fmt)
    if fmt == "json" and len(blocks) > 1:
        text = "[\n" + ",\n".join(block.rstrip("\n") for block in blocks) + "\n]\n"
    else:
        text = "\n".join(blocks) if fmt == "table" else "".join(blocks)
    write_output(text, getattr(args, "out", None))
    return 0
