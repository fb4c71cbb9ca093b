"""Datalog with stratified negation and order comparisons over finite databases."""

from .ast import (
    ANON,
    Anon,
    Const,
    Literal,
    Program,
    Rule,
    Schema,
    Var,
    atom,
    builtin,
    normalize,
)
from .database import Database, Delta, apply_delta, diff
from .engine import evaluate, query
from .io import dumps_database, loads_database, read_database, write_database
from .parser import parse_program
from .stratify import stratify
from .values import Dec

__all__ = [
    "ANON",
    "Anon",
    "Const",
    "Database",
    "Dec",
    "Delta",
    "Literal",
    "Program",
    "Rule",
    "Schema",
    "Var",
    "apply_delta",
    "atom",
    "builtin",
    "diff",
    "dumps_database",
    "evaluate",
    "loads_database",
    "normalize",
    "parse_program",
    "query",
    "read_database",
    "stratify",
    "write_database",
]
