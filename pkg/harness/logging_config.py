"""Structured logging configuration using structlog.

Logs go to stderr; stdout carries reports only.  Each command binds its run
context (command, graph, fingerprint) once, and every event after that
carries it.
"""

import logging
import os
import sys
from fractions import Fraction

import structlog

_configured = False


def _rational_processor(logger, method_name, event_dict):
    """structlog processor that renders exact rationals as 'p/q' strings."""
    for key, value in event_dict.items():
        if isinstance(value, Fraction):
            event_dict[key] = f"{value.numerator}/{value.denominator}"
    return event_dict


def _renderer():
    if os.getenv("RGMIS_ENV", "development") == "production":
        return structlog.processors.JSONRenderer()
    return structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())


def configure_logging():
    """Configure structlog over the stdlib root logger.  Idempotent; pool workers call it on start."""
    global _configured
    if _configured:
        return
    level_name = os.getenv("LOG_LEVEL", "INFO").upper()

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            _rational_processor,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(structlog.stdlib.ProcessorFormatter(
        # stdlib records from the service modules get the same rendering
        foreign_pre_chain=[structlog.stdlib.add_log_level, structlog.stdlib.add_logger_name],
        processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, _renderer()],
    ))

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))
    logging.getLogger("concurrent.futures").setLevel(logging.WARNING)

    _configured = True


def bind_run(**context):
    """Start a fresh run context, e.g. bind_run(command="verify")."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**context)


def bind_graph(g):
    structlog.contextvars.bind_contextvars(graph=g.name, fingerprint=g.fingerprint)


def get_logger(name):
    """Drop-in replacement for logging.getLogger() that returns a structlog logger."""
    configure_logging()
    return structlog.get_logger(name)
