"""Deliberately broken strategies used to show the law checker has teeth.

Each mutation edits one bundled strategy and is paired with the view
definition derived from the *unmutated* strategy, so a correct checker must
report a GetPut or PutGet failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..datalog.ast import Const, Literal, Program, Rule
from .derive import BxPair, derive_get
from .laws import LawReport, run_law_suite
from .strategy import PutStrategy, load_strategy


def _edit_rules(strategy: PutStrategy, fn: Callable[[int, Rule], Rule | None], name: str) -> PutStrategy:
    rules = []
    for i, r in enumerate(strategy.program.rules):
        new = fn(i, r)
        if new is not None:
            rules.append(new)
    return strategy.with_program(Program(tuple(rules), strategy.program.schemas), name)


def drop_literal(rule_index: int, lit: str) -> Callable[[PutStrategy, str], PutStrategy]:
    """Remove the body literal printed as ``lit`` from one rule."""
    def apply(s: PutStrategy, name: str) -> PutStrategy:
        def fn(i: int, r: Rule) -> Rule:
            if i != rule_index:
                return r
            body = tuple(b for b in r.body if str(b) != lit)
            if len(body) == len(r.body):
                raise ValueError(f"{lit} not found in {r}")
            return Rule(r.head, body)
        return _edit_rules(s, fn, name)
    return apply


def drop_rule(rule_index: int) -> Callable[[PutStrategy, str], PutStrategy]:
    def apply(s: PutStrategy, name: str) -> PutStrategy:
        return _edit_rules(s, lambda i, r: None if i == rule_index else r, name)
    return apply


def swap_constant(rule_index: int, old, new) -> Callable[[PutStrategy, str], PutStrategy]:
    def apply(s: PutStrategy, name: str) -> PutStrategy:
        def sub(l: Literal) -> Literal:
            args = tuple(Const(new) if isinstance(t, Const) and t.value == old else t for t in l.args)
            return Literal(l.pred, args, l.negated, l.delta)

        def fn(i: int, r: Rule) -> Rule:
            return r if i != rule_index else Rule(r.head, tuple(sub(b) for b in r.body))
        return _edit_rules(s, fn, name)
    return apply


@dataclass(frozen=True)
class Mutation:
    name: str
    base: str
    description: str
    transform: Callable[[PutStrategy, str], PutStrategy]

    def strategies(self) -> tuple[PutStrategy, PutStrategy]:
        """The original and the mutated strategy."""
        original = load_strategy(f"bundled:{self.base}")
        return original, self.transform(original, self.name)

    def pair(self, **derive_kw) -> BxPair:
        """Mutated put with the get derived from the original strategy."""
        original, mutated = self.strategies()
        return BxPair(mutated, derive_get(original, **derive_kw).get)

    def run(self, corpus_size: int = 500, seed: int = 42) -> LawReport:
        return run_law_suite(self.pair(), corpus_size=corpus_size, seed=seed)


MUTATIONS: tuple[Mutation, ...] = (
    Mutation("union_keep_all_s1", "union",
             "drop 'not v(X)' from the s1 deletion rule",
             drop_literal(0, "not v(X)")),
    Mutation("union_insert_ignores_s2", "union",
             "drop 'not s2(X)' from the s1 insertion rule",
             drop_literal(2, "not s2(X)")),
    Mutation("union_no_insert", "union",
             "remove the s1 insertion rule",
             drop_rule(2)),
    Mutation("provider_reinsert_same_rid", "rideshare_provider",
             "drop 'R <> R2' from the vehicles insertion rule",
             drop_literal(1, "R <> R2")),
    Mutation("mediator_wrong_company", "rideshare_mediator",
             "delete rule filters on C = 2 instead of C = 1",
             swap_constant(0, 1, 2)),
)


def mutation(name: str) -> Mutation:
    for m in MUTATIONS:
        if m.name == name:
            return m
    raise KeyError(name)
