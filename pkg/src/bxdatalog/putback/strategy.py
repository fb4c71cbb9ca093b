"""Putback strategies and their file format.

A strategy file is a header block followed by delta rules::

    % comments are allowed anywhere
    view: prov1_public(*vid, area, rid)
    sources: vehicles(*vid, loc, rid)
    references: area_map(*loc, area)
    edits: delete, update(rid)

    -vehicles(V, L, R) :- vehicles(V, L, R), area_map(L, A), not prov1_public(V, A, R).
    +vehicles(V, L, R) :- prov1_public(V, _, R), vehicles(V, L, R2), R <> R2.

Schemas list attribute names, ``*`` marking key attributes; ``name/3``
declares positional attributes ``a1..a3``. ``edits`` names the class of view
updates the strategy is written to accept (default ``insert, delete``); the
law checker draws PutGet test edits from that class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import ParseError, StrategyError
from ..datalog.ast import Program, Schema
from ..datalog.parser import parse_program

_HEADER = re.compile(r"\s*(view|sources|references|edits|name)\s*:(.*)\Z")
_SCHEMA = re.compile(r"\s*([a-z][A-Za-z0-9_]*)\s*(?:\((.*)\)|/\s*(\d+))\s*\Z")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class EditClass:
    insert: bool = True
    delete: bool = True
    update: tuple[str, ...] = ()

    def kinds(self) -> list[str]:
        out = []
        if self.insert:
            out.append("insert")
        if self.delete:
            out.append("delete")
        if self.update:
            out.append("update")
        return out

    def __str__(self) -> str:
        parts = self.kinds()
        if self.update:
            parts[-1] = f"update({', '.join(self.update)})"
        return ", ".join(parts)


@dataclass(frozen=True)
class PutStrategy:
    """A view update strategy: delta rules over sources and the updated view.

    Every rule head is a ``+s``/``-s`` delta of a declared source ``s``.
    References are read but never updated.
    """

    program: Program
    view: str
    sources: tuple[str, ...]
    references: tuple[str, ...] = ()
    edits: EditClass = field(default_factory=EditClass)
    name: str = "strategy"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "references", tuple(self.references))
        names = [self.view, *self.sources, *self.references]
        if len(set(names)) != len(names):
            raise StrategyError(f"view, sources and references must be distinct: {names}")
        allowed = set(names)
        for rule in self.program.rules:
            head = rule.head
            if head.delta is None:
                raise StrategyError(f"rule head must be a delta predicate (+s or -s): {rule}")
            if head.pred not in self.sources:
                what = "the view" if head.pred == self.view else (
                    "a reference" if head.pred in self.references else "an undeclared predicate")
                raise StrategyError(f"delta head on {what} {head.pred!r}: {rule}")
            for lit in rule.body:
                if not lit.is_builtin and lit.pred not in allowed:
                    raise StrategyError(f"body predicate {lit.pred!r} is not declared: {rule}")
        for attr in self.edits.update:
            schema = self.schema(self.view)
            if attr not in schema.attrs:
                raise StrategyError(f"update({attr}) names no attribute of {self.view}")
            if schema.attrs.index(attr) in schema.key:
                raise StrategyError(f"update({attr}) would change the key of {self.view}")

    @property
    def base(self) -> tuple[str, ...]:
        """Sources followed by references."""
        return self.sources + self.references

    def schema(self, name: str) -> Schema:
        if name in self.program.schemas:
            return self.program.schemas[name]
        arity = self.program.arities().get(name)
        if arity is None:
            raise StrategyError(f"arity of {name!r} is unknown; declare its schema")
        return Schema.positional(name, arity)

    def schemas(self) -> dict[str, Schema]:
        return {n: self.schema(n) for n in (self.view, *self.base)}

    def with_program(self, program: Program, name: str | None = None) -> "PutStrategy":
        return PutStrategy(program, self.view, self.sources, self.references, self.edits,
                           name or self.name)

    def to_text(self) -> str:
        lines = [f"name: {self.name}", f"view: {self.schema(self.view)}",
                 "sources: " + ", ".join(str(self.schema(s)) for s in self.sources)]
        if self.references:
            lines.append("references: " + ", ".join(str(self.schema(r)) for r in self.references))
        lines.append(f"edits: {self.edits}")
        lines.append("")
        lines.extend(str(r) for r in self.program.rules)
        return "\n".join(lines) + "\n"


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_schema(text: str, line: int = 0) -> Schema:
    m = _SCHEMA.match(text)
    if not m:
        raise ParseError(f"bad schema declaration {text!r}", line, 1)
    name, attrs, arity = m.groups()
    if arity is not None:
        return Schema.positional(name, int(arity))
    cols, key = [], []
    for i, a in enumerate(x.strip() for x in attrs.split(",") if x.strip()):
        if a.startswith("*"):
            key.append(i)
            a = a[1:].strip()
        if not _IDENT.match(a):
            raise ParseError(f"bad attribute name {a!r} in {text!r}", line, 1)
        cols.append(a)
    return Schema(name, tuple(cols), tuple(key))


def _parse_edits(text: str, line: int) -> EditClass:
    ins = dele = False
    update: tuple[str, ...] = ()
    for part in _split_top(text):
        if part == "insert":
            ins = True
        elif part == "delete":
            dele = True
        elif m := re.fullmatch(r"update\s*\((.*)\)", part):
            update = tuple(a.strip() for a in m.group(1).split(",") if a.strip())
        else:
            raise ParseError(f"unknown edit kind {part!r}", line, 1)
    return EditClass(ins, dele, update)


def parse_strategy(text: str, name: str = "strategy") -> PutStrategy:
    lines = text.split("\n")
    header: dict[str, tuple[str, int]] = {}
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.strip()
        if not stripped or stripped[0] in "%#":
            i += 1
            continue
        m = _HEADER.match(raw)
        if not m:
            break
        header[m.group(1)] = (m.group(2).strip(), i + 1)
        i += 1
    if "view" not in header or "sources" not in header:
        raise ParseError("strategy header must declare 'view:' and 'sources:'", i + 1, 1)
    schemas: dict[str, Schema] = {}
    view = parse_schema(*header["view"])
    schemas[view.name] = view
    decl: dict[str, list[str]] = {"sources": [], "references": []}
    for kind in decl:
        if kind in header:
            text_, ln = header[kind]
            for part in _split_top(text_):
                s = parse_schema(part, ln)
                schemas[s.name] = s
                decl[kind].append(s.name)
    edits = _parse_edits(*header["edits"]) if "edits" in header else EditClass()
    if "name" in header:
        name = header["name"][0]
    program = parse_program("\n".join(lines[i:]), schemas, line_offset=i)
    return PutStrategy(program, view.name, tuple(decl["sources"]), tuple(decl["references"]),
                       edits, name)


BUNDLED_PREFIX = "bundled:"


def bundled_path(name: str) -> Path:
    """Filesystem path of a strategy or scenario file shipped with the package."""
    root = resources.files("bxdatalog") / "scenarios"
    candidate = root / name
    if not candidate.is_file():
        candidate = root / f"{name}.strategy"
    return Path(str(candidate))


def resolve_path(path: str | Path) -> Path:
    text = str(path)
    if text.startswith(BUNDLED_PREFIX):
        return bundled_path(text[len(BUNDLED_PREFIX):])
    return Path(path)


def load_strategy(path: str | Path) -> PutStrategy:
    """Load a strategy file; ``bundled:<name>`` refers to a shipped strategy."""
    p = resolve_path(path)
    return parse_strategy(p.read_text(encoding="utf-8"), name=p.stem)


BUNDLED_STRATEGIES = (
    "union",
    "union_s2",
    "union_both",
    "rideshare_mediator",
    "rideshare_provider",
)
