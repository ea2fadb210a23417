"""Structured logging for the CLI.

Modules log through stdlib `logging`; structlog only formats the records, so
the command and scenario bound by `scenario_context` appear on every line.
"""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager

import structlog


def setup_logging(env: str = "development", level: str = "INFO") -> None:
    """Route every record to stderr, as JSON in production or as console lines otherwise."""
    processors: list[structlog.types.Processor] = [structlog.stdlib.ProcessorFormatter.remove_processors_meta]
    if env == "development":
        # ConsoleRenderer formats exc_info itself
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))
    else:
        processors += [structlog.processors.format_exc_info, structlog.processors.JSONRenderer()]

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso"),
        ],
        processors=processors,
    )
    # stdout carries `helictl design` output and artifact paths
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    logging.getLogger("matplotlib").setLevel(logging.WARNING)


@contextmanager
def scenario_context(command: str, scenario: str) -> Iterator[None]:
    """Bind command and scenario name for the records of one scenario."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=command, scenario=scenario)
    try:
        yield
    finally:
        structlog.contextvars.clear_contextvars()
