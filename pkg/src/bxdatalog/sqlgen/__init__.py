"""SQL view and trigger text generated from a put/get pair."""

from .emit import SqlArtifact, emit_procedure, emit_trigger, emit_trigger_sql, emit_view, sql_literal
from .subset import evaluate_sql, parse_view

__all__ = [
    "SqlArtifact",
    "emit_procedure",
    "emit_trigger",
    "emit_trigger_sql",
    "emit_view",
    "evaluate_sql",
    "parse_view",
    "sql_literal",
]
