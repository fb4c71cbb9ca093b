"""Recursive-descent parser for the rule language.

Concrete syntax::

    % comment (also '#')
    v(X) :- s1(X).
    -s1(X) :- s1(X), not v(X).          % '-' head sigil: deletion delta
    +s1(X) :- v(X), -s1(X), -s2(X).      % '-' in a body: negation
    p(V, A) :- q(V, _, R), R <> 'r 1', A = 3.

Variables start with an uppercase letter or ``_``; a lone ``_`` is anonymous.
Constants are integers, decimals, quoted strings or bare lowercase atoms.
``>`` and ``>=`` are accepted and normalised to ``<``/``<=`` with swapped sides.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from ..errors import ParseError, ProgramError
from .ast import ANON, Const, Literal, Program, Rule, Schema, Term, Var
from .values import Dec

_TOKEN_SPEC = [
    ("WS", r"[ \t\r]+"),
    ("NL", r"\n"),
    ("COMMENT", r"[%#][^\n]*"),
    ("DEC", r"-?\d+\.\d+"),
    ("INT", r"-?\d+"),
    ("STRING", r"'(?:[^'\\\n]|\\.)*'|\"(?:[^\"\\\n]|\\.)*\""),
    ("IF", r":-"),
    ("OP", r"<>|!=|<=|>=|<|>|=|¬"),
    ("VAR", r"[A-Z_][A-Za-z0-9_]*"),
    ("IDENT", r"[a-z][A-Za-z0-9_]*"),
    ("PUNCT", r"[(),.+\-]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))
_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}
_FLIP = {">": "<", ">=": "<="}
_COMPARISONS = {"=", "<>", "!=", "<", "<=", ">", ">="}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line_offset: int = 0) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1 + line_offset, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        assert kind is not None
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _unquote(text: str) -> str:
    body = text[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{message} (found {found!r})", tok.line, tok.col)

    def take(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.error(f"expected {text or kind}")
        self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def program(self) -> list[tuple[Rule, Token]]:
        rules = []
        while not self.at("EOF"):
            start = self.tok
            rules.append((self.rule(), start))
        return rules

    def rule(self) -> Rule:
        head = self.head()
        body: list[Literal] = []
        if self.at("IF"):
            self.i += 1
            body.append(self.body_literal())
            while self.at("PUNCT", ","):
                self.i += 1
                body.append(self.body_literal())
        self.take("PUNCT", ".")
        return Rule(head, tuple(body))

    def head(self) -> Literal:
        delta = None
        if self.at("PUNCT", "+") or self.at("PUNCT", "-"):
            delta = self.tok.text
            self.i += 1
        if not self.at("IDENT"):
            raise self.error("expected a predicate name in rule head")
        return self.atom(negated=False, delta=delta)

    def atom(self, negated: bool, delta: str | None = None) -> Literal:
        name = self.take("IDENT").text
        args: list[Term] = []
        if self.at("PUNCT", "("):
            self.i += 1
            if not self.at("PUNCT", ")"):
                args.append(self.term())
                while self.at("PUNCT", ","):
                    self.i += 1
                    args.append(self.term())
            self.take("PUNCT", ")")
        return Literal(name, tuple(args), negated, delta)

    def body_literal(self) -> Literal:
        tok = self.tok
        if (tok.kind == "IDENT" and tok.text == "not" and self.peek().kind == "IDENT") or (
            tok.kind == "PUNCT" and tok.text == "-" or tok.kind == "OP" and tok.text == "¬"
        ):
            self.i += 1
            if self.at("PUNCT", "+") or self.at("PUNCT", "-"):
                raise self.error("delta predicates may only appear in rule heads")
            return self.atom(negated=True)
        if tok.kind == "PUNCT" and tok.text == "+":
            raise self.error("delta predicates may only appear in rule heads")
        if tok.kind == "IDENT" and not (self.peek().kind == "OP" and self.peek().text in _COMPARISONS):
            return self.atom(negated=False)
        lhs = self.term()
        op_tok = self.tok
        if op_tok.kind != "OP" or op_tok.text not in _COMPARISONS:
            raise self.error("expected a comparison operator")
        self.i += 1
        rhs = self.term()
        op = op_tok.text
        if op == "!=":
            op = "<>"
        if op in _FLIP:
            op, lhs, rhs = _FLIP[op], rhs, lhs
        return Literal(op, (lhs, rhs))

    def term(self) -> Term:
        tok = self.tok
        self.i += 1
        if tok.kind == "VAR":
            return ANON if tok.text == "_" else Var(tok.text)
        if tok.kind == "INT":
            return Const(int(tok.text))
        if tok.kind == "DEC":
            return Const(Dec(tok.text))
        if tok.kind == "STRING":
            return Const(_unquote(tok.text))
        if tok.kind == "IDENT":
            return Const(tok.text)
        self.i -= 1
        raise self.error("expected a term")


def parse_rules(text: str, line_offset: int = 0) -> list[tuple[Rule, Token]]:
    """Parse rules, returning each with the token where it starts."""
    return _Parser(tokenize(text, line_offset)).program()


def parse_program(
    text: str, schemas: Mapping[str, Schema] | None = None, line_offset: int = 0
) -> Program:
    """Parse ``text`` into a validated :class:`Program`.

    Syntax errors raise :class:`ParseError`. Ill-formed rules raise the
    matching :class:`ProgramError` subclass (e.g. ``UnsafeRuleError``) with the
    rule's starting ``line``/``column`` attached.
    """
    parsed = parse_rules(text, line_offset)
    schemas = dict(schemas or {})
    # validate rule by rule so errors carry a position
    for idx, (_, start) in enumerate(parsed):
        try:
            Program(tuple(r for r, _ in parsed[: idx + 1]), schemas)
        except ProgramError as exc:
            exc.line, exc.column = start.line, start.col
            exc.args = (f"line {start.line}, column {start.col}: {exc}",)
            raise
    return Program(tuple(r for r, _ in parsed), schemas)
