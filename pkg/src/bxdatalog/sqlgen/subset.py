"""A tiny SQL subset: enough to parse and run generated view definitions.

Grammar::

    view    := CREATE OR REPLACE VIEW name AS select (UNION select)* [;]
    select  := SELECT item (, item)* FROM table [alias] (, table [alias])*
               [WHERE cond (AND cond)*]
    item    := operand [AS name]
    cond    := operand (= | <> | < | <= | > | >=) operand
    operand := [qualifier .] column | integer | decimal | 'string'

It is an independent check on the emitter, evaluated by nested loops.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from typing import Mapping

from ..datalog.ast import Schema
from ..datalog.database import Database
from ..datalog.values import Dec
from ..errors import SqlGenError

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<str>'(?:[^']|'')*')
  | (?P<num>-?\d+(?:\.\d+)?)
  | (?P<op><>|<=|>=|=|<|>)
  | (?P<punct>[(),.;*])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"CREATE", "OR", "REPLACE", "VIEW", "AS", "SELECT", "FROM", "WHERE", "AND", "UNION"}


def tokenize(text: str) -> list[tuple[str, object]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SqlGenError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            continue
        if kind == "str":
            out.append(("const", tok[1:-1].replace("''", "'")))
        elif kind == "num":
            out.append(("const", Dec(tok) if "." in tok else int(tok)))
        elif kind == "word" and tok.upper() in _KEYWORDS:
            out.append(("kw", tok.upper()))
        else:
            out.append((kind, tok))
    return out


@dataclass(frozen=True)
class Column:
    qualifier: str | None
    name: str


@dataclass(frozen=True)
class Select:
    items: tuple[tuple[object, str | None], ...]
    tables: tuple[tuple[str, str], ...]
    where: tuple[tuple[object, str, object], ...]


@dataclass(frozen=True)
class ParsedView:
    name: str
    selects: tuple[Select, ...]


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, object] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, kind: str, value: object | None = None) -> object:
        tok = self.peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            raise SqlGenError(f"expected {value or kind}, found {tok[1] if tok else 'end of input'!r}")
        self.i += 1
        return tok[1]

    def accept(self, kind: str, value: object | None = None) -> bool:
        tok = self.peek()
        if tok is not None and tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return True
        return False

    def view(self) -> ParsedView:
        for kw in ("CREATE", "OR", "REPLACE", "VIEW"):
            self.take("kw", kw)
        name = self.take("word")
        self.take("kw", "AS")
        selects = [self.select()]
        while self.accept("kw", "UNION"):
            selects.append(self.select())
        self.accept("punct", ";")
        if self.peek() is not None:
            raise SqlGenError(f"trailing input after view definition: {self.peek()[1]!r}")
        return ParsedView(str(name), tuple(selects))

    def operand(self) -> object:
        tok = self.peek()
        if tok and tok[0] == "const":
            self.i += 1
            return tok[1]
        first = str(self.take("word"))
        if self.accept("punct", "."):
            return Column(first, str(self.take("word")))
        return Column(None, first)

    def select(self) -> Select:
        self.take("kw", "SELECT")
        items = []
        while True:
            op = self.operand()
            alias = str(self.take("word")) if self.accept("kw", "AS") else None
            items.append((op, alias))
            if not self.accept("punct", ","):
                break
        self.take("kw", "FROM")
        tables = []
        while True:
            t = str(self.take("word"))
            tok = self.peek()
            alias = t
            if tok and tok[0] == "word":
                alias = str(tok[1])
                self.i += 1
            tables.append((t, alias))
            if not self.accept("punct", ","):
                break
        where = []
        if self.accept("kw", "WHERE"):
            while True:
                a = self.operand()
                op = str(self.take("op"))
                b = self.operand()
                where.append((a, op, b))
                if not self.accept("kw", "AND"):
                    break
        return Select(tuple(items), tuple(tables), tuple(where))


def parse_view(text: str) -> ParsedView:
    """Parse one ``CREATE OR REPLACE VIEW`` statement of the subset."""
    return _Parser(text).view()


_OPS = {
    "=": lambda a, b: a == b,
    "<>": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _resolver(sel: Select, schemas: Mapping[str, Schema]):
    where: dict[Column, tuple[int, int]] = {}
    for ti, (table, alias) in enumerate(sel.tables):
        if table not in schemas:
            raise SqlGenError(f"unknown table {table}")
        for ci, attr in enumerate(schemas[table].attrs):
            where[Column(alias, attr)] = (ti, ci)

    def resolve(op: object):
        if not isinstance(op, Column):
            return lambda rows: op
        if op.qualifier is not None:
            hit = where.get(op)
            if hit is None:
                raise SqlGenError(f"unknown column {op.qualifier}.{op.name}")
        else:
            hits = [v for k, v in where.items() if k.name == op.name]
            if len(hits) != 1:
                raise SqlGenError(f"column {op.name} is {'ambiguous' if hits else 'unknown'}")
            hit = hits[0]
        ti, ci = hit
        return lambda rows: rows[ti][ci]

    return resolve


def evaluate_sql(view: ParsedView | str, db: Database, schemas: Mapping[str, Schema]) -> frozenset:
    """Rows of the view over ``db``; ``schemas`` names each table's columns."""
    if isinstance(view, str):
        view = parse_view(view)
    out: set[tuple] = set()
    for sel in view.selects:
        resolve = _resolver(sel, schemas)
        items = [resolve(op) for op, _ in sel.items]
        conds = [(resolve(a), _OPS[op], resolve(b)) for a, op, b in sel.where]
        rels = [sorted(db.relation(t), key=repr) for t, _ in sel.tables]
        for rows in product(*rels):
            if all(f(l(rows), r(rows)) for l, f, r in conds):
                out.add(tuple(i(rows) for i in items))
    return frozenset(out)
