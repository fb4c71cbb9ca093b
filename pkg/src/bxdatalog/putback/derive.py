"""Deriving the view definition of a putback strategy.

GetPut demands that an unchanged view produce no delta, so every delta rule
becomes a constraint "this body has no solutions". A constraint whose only
mention of the view is one negated literal ``not v(t)`` is turned into the
view rule ``v(t) :- rest`` by the swapping law ``p :- q, not r  <=>  r :- q, not p``.
The remaining constraints are residuals: they must hold once the view is
defined, which is checked by bounded model checking over small instances.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from ..datalog.ast import Anon, Literal, Program, Rule, Var, limited_variables
from ..datalog.database import Database
from ..datalog.engine import evaluate
from ..errors import DerivationError
from .corpus import make_space
from .kinds import column_domains
from .strategy import PutStrategy

DEFAULT_BOUND = 3
DEFAULT_CAP = 10_000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class Constraint:
    """``⊥ :- body``: the body must be unsatisfiable."""

    body: tuple[Literal, ...]
    origin: Rule

    def __str__(self) -> str:
        return "⊥ :- " + ", ".join(str(b) for b in self.body) + "."


@dataclass(frozen=True)
class ResidualCheck:
    constraint: Constraint
    instances: int
    exhaustive: bool
    seed: int
    bound: int
    counterexample: Database | None = None
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def to_dict(self) -> dict:
        out = {
            "constraint": str(self.constraint),
            "status": "pass" if self.ok else "fail",
            "instances": self.instances,
            "exhaustive": self.exhaustive,
            "seed": self.seed,
            "bound": self.bound,
        }
        if self.counterexample is not None:
            from ..datalog.io import dumps_database
            import json

            out["counterexample"] = json.loads(dumps_database(self.counterexample))
            out["witness"] = {k: str(v) for k, v in sorted((self.witness or {}).items())}
        return out


@dataclass(frozen=True)
class BxPair:
    """A putback strategy paired with a view definition."""

    put: PutStrategy
    get: Program
    residuals: tuple[Constraint, ...] = ()
    checks: tuple[ResidualCheck, ...] = field(default=(), compare=False)

    @property
    def view(self) -> str:
        return self.put.view

    def view_of(self, source: Database) -> Database:
        """``get(source)`` as a database holding just the view relation."""
        model = evaluate(self.get, source.restrict(self.put.base))
        return Database._trusted({self.view: model.relation(self.view)})


def constraints(strategy: PutStrategy) -> list[Constraint]:
    return [Constraint(rule.body, rule) for rule in strategy.program.rules]


def _split(c: Constraint, view: str) -> tuple[str, Rule | None]:
    neg = [l for l in c.body if not l.is_builtin and l.pred == view and l.negated]
    pos = [l for l in c.body if not l.is_builtin and l.pred == view and not l.negated]
    if neg and pos:
        raise DerivationError(
            f"unsupported form: constraint mentions {view} both positively and negatively: {c}"
        )
    if len(neg) > 1:
        raise DerivationError(f"unsupported form: several negated {view} literals: {c}")
    if not neg:
        return "residual", None
    lit = neg[0]
    if any(isinstance(t, Anon) for t in lit.args):
        raise DerivationError(f"unsupported form: anonymous variable in negated {view}: {c}")
    rest = tuple(l for l in c.body if l is not lit)
    head = Literal(view, lit.args)
    limited = limited_variables(rest)
    for v in head.variables():
        if v not in limited:
            raise DerivationError(f"swapped rule would leave {v} unbound: {c}")
    return "swap", Rule(head, rest)


def swap_constraints(strategy: PutStrategy) -> tuple[list[Rule], list[Constraint]]:
    """Split constraints into swapped view rules and residual constraints."""
    rules: list[Rule] = []
    residuals: list[Constraint] = []
    for c in constraints(strategy):
        kind, rule = _split(c, strategy.view)
        if kind == "swap":
            if rule not in rules:
                rules.append(rule)
        elif all(r.body != c.body for r in residuals):
            residuals.append(c)
    return rules, residuals


def residual_program(get: Program, residuals: list[Constraint] | tuple[Constraint, ...]) -> Program:
    """The view rules plus one ``__residual_i`` rule per constraint body."""
    extra = []
    for i, c in enumerate(residuals):
        names = sorted(limited_variables(c.body))
        extra.append(Rule(Literal(f"__residual_{i}", tuple(Var(n) for n in names)), c.body))
    return Program(get.rules + tuple(extra), get.schemas)


def verify_residuals(
    strategy: PutStrategy,
    get: Program,
    residuals: list[Constraint] | tuple[Constraint, ...],
    bound: int = DEFAULT_BOUND,
    cap: int = DEFAULT_CAP,
    seed: int = DEFAULT_SEED,
) -> list[ResidualCheck]:
    """Check each residual is unsatisfiable once the view is defined by ``get``.

    Instances range over the strategy's sources and references with at most
    ``bound`` values per column (strategy constants first) and honour declared
    keys. All instances are tried when there are at most ``cap``; otherwise
    ``cap`` seeded random samples.
    """
    if not residuals:
        return []
    schemas = strategy.schemas()
    base = list(strategy.base)
    domains = column_domains(strategy.program, schemas, base, bound)
    space = make_space(schemas, domains, base)
    rng = random.Random(seed)
    instances, exhaustive = space.instances(cap, rng)
    check = residual_program(get, residuals)
    found: dict[int, tuple[Database, dict]] = {}
    n = 0
    for db in instances:
        n += 1
        model = evaluate(check, db)
        for i, c in enumerate(residuals):
            if i in found:
                continue
            rows = model.relation(f"__residual_{i}")
            if rows:
                names = sorted(limited_variables(c.body))
                row = min(rows, key=repr)
                found[i] = (db, dict(zip(names, row)))
        if len(found) == len(residuals):
            break
    out = []
    for i, c in enumerate(residuals):
        db, witness = found.get(i, (None, None))
        out.append(ResidualCheck(c, n, exhaustive, seed, bound, db, witness))
    return out


def derive_get(
    strategy: PutStrategy,
    bound: int = DEFAULT_BOUND,
    cap: int = DEFAULT_CAP,
    seed: int = DEFAULT_SEED,
    verify: bool = True,
) -> BxPair:
    """Derive the view definition of ``strategy`` and verify its residuals.

    Raises :class:`DerivationError` when no constraint can be swapped, when a
    constraint has an unsupported shape, or when a residual has a
    counterexample (carried on the exception).
    """
    rules, residuals = swap_constraints(strategy)
    if not rules:
        raise DerivationError(
            f"derivation impossible: no delta rule of {strategy.name} constrains "
            f"{strategy.view} through a single negated literal"
        )
    schemas = {n: s for n, s in strategy.schemas().items()}
    get = Program(tuple(rules), schemas)
    checks: list[ResidualCheck] = []
    if verify:
        checks = verify_residuals(strategy, get, residuals, bound, cap, seed)
        for chk in checks:
            if not chk.ok:
                raise DerivationError(
                    f"residual {chk.constraint} is violated under the derived view "
                    f"(witness {chk.witness})",
                    counterexample=chk,
                )
    return BxPair(strategy, get, tuple(residuals), tuple(checks))


def timed_derive(strategy: PutStrategy, **kw) -> tuple[BxPair, float]:
    start = time.perf_counter()
    bx = derive_get(strategy, **kw)
    return bx, time.perf_counter() - start
