"""Abstract syntax of the Datalog dialect.

Rules may use stratified negation and the builtin comparisons ``=``, ``<>``,
``<`` and ``<=``. Head predicates may carry a ``+``/``-`` sigil marking an
insertion or deletion delta relation of the underlying predicate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from ..errors import ProgramError, UnsafeRuleError
from .values import Dec, Value, as_value, kind_of

BUILTINS = ("=", "<>", "<", "<=")
DELTA_SIGILS = ("+", "-")

_BARE_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_KEYWORDS = {"not"}


@dataclass(frozen=True)
class Const:
    value: Value

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", as_value(self.value))

    def __str__(self) -> str:
        return format_value(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Anon:
    def __str__(self) -> str:
        return "_"


Term = Union[Const, Var, Anon]
ANON = Anon()


def format_value(value: Value) -> str:
    kind = kind_of(value)
    if kind in ("int", "dec"):
        return str(value)
    if _BARE_ATOM.match(value) and value not in _KEYWORDS:
        return value
    escaped = value.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
    return "'" + escaped + "'"


@dataclass(frozen=True)
class Literal:
    pred: str
    args: tuple[Term, ...]
    negated: bool = False
    delta: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if self.delta is not None and self.delta not in DELTA_SIGILS:
            raise ProgramError(f"bad delta sigil {self.delta!r}")

    @property
    def is_builtin(self) -> bool:
        return self.pred in BUILTINS

    @property
    def key(self) -> str:
        """Relation name this literal reads or writes (``+s``/``-s`` for deltas)."""
        return f"{self.delta}{self.pred}" if self.delta else self.pred

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if isinstance(t, Var):
                yield t.name

    def __str__(self) -> str:
        if self.is_builtin:
            return f"{self.args[0]} {self.pred} {self.args[1]}"
        prefix = "not " if self.negated else ""
        inner = ", ".join(str(a) for a in self.args)
        return f"{prefix}{self.key}({inner})"


def atom(pred: str, *args: Term | Value | str, negated: bool = False, delta: str | None = None) -> Literal:
    """Convenience constructor: strings starting uppercase become variables."""
    return Literal(pred, tuple(_coerce_term(a) for a in args), negated, delta)


def builtin(op: str, lhs: Term | Value, rhs: Term | Value) -> Literal:
    if op not in BUILTINS:
        raise ProgramError(f"unknown builtin {op!r}")
    return Literal(op, (_coerce_term(lhs), _coerce_term(rhs)))


def _coerce_term(a: object) -> Term:
    if isinstance(a, (Const, Var, Anon)):
        return a
    if a == "_":
        return ANON
    if isinstance(a, str) and a[:1].isupper():
        return Var(a)
    return Const(a)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Rule:
    head: Literal
    body: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(b) for b in self.body)}."

    def variables(self) -> set[str]:
        out = set(self.head.variables())
        for lit in self.body:
            out.update(lit.variables())
        return out


@dataclass(frozen=True)
class Schema:
    """Declared relation schema. ``key`` holds the positions of key attributes."""

    name: str
    attrs: tuple[str, ...]
    key: tuple[int, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.attrs)

    @classmethod
    def positional(cls, name: str, arity: int) -> "Schema":
        return cls(name, tuple(f"a{i + 1}" for i in range(arity)))

    def __str__(self) -> str:
        cols = ", ".join(("*" if i in self.key else "") + a for i, a in enumerate(self.attrs))
        return f"{self.name}({cols})"


def limited_variables(body: Iterable[Literal]) -> set[str]:
    """Variables range-restricted by a body.

    A variable is limited when it occurs in a positive ordinary literal, or is
    equated by ``=`` to a constant or to an already limited variable.
    """
    body = list(body)
    limited: set[str] = set()
    for lit in body:
        if not lit.is_builtin and not lit.negated:
            limited.update(lit.variables())
    changed = True
    while changed:
        changed = False
        for lit in body:
            if lit.pred != "=":
                continue
            lhs, rhs = lit.args
            for a, b in ((lhs, rhs), (rhs, lhs)):
                if isinstance(a, Var) and a.name not in limited:
                    if isinstance(b, Const) or (isinstance(b, Var) and b.name in limited):
                        limited.add(a.name)
                        changed = True
    return limited


def check_rule(rule: Rule) -> None:
    head = rule.head
    if head.is_builtin or head.negated:
        raise ProgramError(f"rule head must be a positive ordinary atom: {rule}")
    if any(isinstance(t, Anon) for t in head.args):
        raise ProgramError(f"anonymous variable in rule head: {rule}")
    for lit in rule.body:
        if lit.delta is not None:
            raise ProgramError(f"delta predicates may only appear in rule heads: {rule}")
        if lit.is_builtin:
            if len(lit.args) != 2:
                raise ProgramError(f"builtin {lit.pred} takes two arguments: {rule}")
            if lit.negated:
                raise ProgramError(f"builtin literals cannot be negated: {rule}")
            if any(isinstance(t, Anon) for t in lit.args):
                raise ProgramError(f"anonymous variable in builtin: {rule}")
    limited = limited_variables(rule.body)
    needed: list[str] = list(head.variables())
    for lit in rule.body:
        if lit.negated or lit.is_builtin:
            needed.extend(lit.variables())
    for name in needed:
        if name not in limited:
            raise UnsafeRuleError(rule, name)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    schemas: Mapping[str, Schema] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        seen: dict[Rule, None] = {}
        for r in self.rules:
            seen.setdefault(r, None)
        object.__setattr__(self, "rules", tuple(seen))
        object.__setattr__(self, "schemas", dict(self.schemas))
        for r in self.rules:
            check_rule(r)
        self.arities()
        object.__setattr__(self, "_hash", hash(self.rules))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def arities(self) -> dict[str, int]:
        """Arity of every ordinary predicate, keyed by name without delta sigil."""
        arity = {name: s.arity for name, s in self.schemas.items()}
        for r in self.rules:
            for lit in (r.head, *r.body):
                if lit.is_builtin:
                    continue
                known = arity.setdefault(lit.pred, lit.arity)
                if known != lit.arity:
                    raise ProgramError(
                        f"predicate {lit.pred} used with arity {lit.arity} and {known}: {r}"
                    )
        return arity

    def idb(self) -> set[str]:
        return {r.head.key for r in self.rules}

    def predicates(self) -> set[str]:
        out = set()
        for r in self.rules:
            out.add(r.head.key)
            out.update(lit.key for lit in r.body if not lit.is_builtin)
        return out

    def edb(self) -> set[str]:
        return self.predicates() - self.idb()

    def rules_for(self, key: str) -> list[Rule]:
        return [r for r in self.rules if r.head.key == key]

    def schema(self, name: str) -> Schema:
        if name in self.schemas:
            return self.schemas[name]
        return Schema.positional(name, self.arities()[name])

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rules)


def rename_rule(rule: Rule, prefix: str = "V") -> Rule:
    """Canonical variable renaming by order of first occurrence (head, then body)."""
    mapping: dict[str, str] = {}

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name not in mapping:
                mapping[t.name] = f"{prefix}{len(mapping)}"
            return Var(mapping[t.name])
        return t

    def lit(l: Literal) -> Literal:
        return Literal(l.pred, tuple(ren(t) for t in l.args), l.negated, l.delta)

    head = lit(rule.head)
    return Rule(head, tuple(lit(b) for b in rule.body))


def normalize(program: Program | Iterable[Rule]) -> tuple[str, ...]:
    """Order- and alpha-insensitive normal form used to compare programs."""
    rules = program.rules if isinstance(program, Program) else tuple(program)
    return tuple(sorted({str(rename_rule(r)) for r in rules}))


__all__ = [
    "ANON",
    "Anon",
    "BUILTINS",
    "Const",
    "Dec",
    "Literal",
    "Program",
    "Rule",
    "Schema",
    "Term",
    "Var",
    "atom",
    "builtin",
    "check_rule",
    "format_value",
    "limited_variables",
    "normalize",
    "rename_rule",
]
