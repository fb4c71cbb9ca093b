"""Join planning and semi-naive bottom-up evaluation.

A rule body is compiled into a list of steps (scan, negation check,
comparison, equality binding) run left to right over a list of variable
bindings. Relations are indexed lazily on the positions bound at each scan.
Comparisons only ever filter bound values; the dense order is never
enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from ..errors import EvaluationError, ProgramError
from .ast import Anon, Const, Literal, Program, Rule, Var, limited_variables
from .database import Database
from .stratify import stratify
from .values import kind_of

SCAN, NEG, CMP, BIND = range(4)

Resolve = Callable[[str, str], frozenset]
"""``resolve(source_tag, relation_key)`` returns the relation to read."""


class IndexCache:
    """Hash indexes over relations, keyed by relation identity and positions."""

    def __init__(self) -> None:
        self._cache: dict[tuple[int, tuple[int, ...]], tuple[frozenset, dict]] = {}

    def lookup(self, rel: frozenset, positions: tuple[int, ...]) -> dict:
        k = (id(rel), positions)
        hit = self._cache.get(k)
        if hit is not None and hit[0] is rel:
            return hit[1]
        index: dict[tuple, list[tuple]] = {}
        for row in rel:
            index.setdefault(tuple(row[p] for p in positions), []).append(row)
        self._cache[k] = (rel, index)
        return index


def _operand(term) -> tuple[bool, object]:
    if isinstance(term, Const):
        return (True, term.value)
    return (False, term.name)


def _scan_step(lit: Literal, bound: set[str], src: str) -> tuple:
    key_parts = []  # (is_const, value_or_var) per indexed position
    positions = []
    new_vars: list[tuple[int, str]] = []
    repeats: list[tuple[int, int]] = []
    first_pos: dict[str, int] = {}
    for pos, t in enumerate(lit.args):
        if isinstance(t, Anon):
            continue
        if isinstance(t, Const):
            positions.append(pos)
            key_parts.append((True, t.value))
        elif t.name in bound:
            positions.append(pos)
            key_parts.append((False, t.name))
        elif t.name in first_pos:
            repeats.append((pos, first_pos[t.name]))
        else:
            first_pos[t.name] = pos
            new_vars.append((pos, t.name))
    return (SCAN if not lit.negated else NEG, src, lit.key, tuple(positions), tuple(key_parts),
            tuple(new_vars), tuple(repeats))


def plan_body(
    body: Iterable[Literal],
    seed: int | None = None,
    bound: Iterable[str] = (),
    sources: Mapping[int, str] | None = None,
    default_source: str = "main",
) -> list[tuple]:
    """Order a rule body into executable steps.

    ``seed`` forces that body literal to be scanned first (used for delta
    rules). ``sources`` maps body positions to the relation source tag they
    read from; everything else reads ``default_source``.
    """
    body = list(body)
    sources = dict(sources or {})
    bound_vars = set(bound)
    pending = list(range(len(body)))
    steps: list[tuple] = []
    # variables a positive atom can supply; "=" binds only the others, so a
    # cross-kind equality is always checked rather than turned into a join
    scanned = {v for l in body if not l.is_builtin and not l.negated for v in l.variables()}

    def ready(i: int) -> bool:
        return all(v in bound_vars for v in body[i].variables())

    def emit_filters() -> None:
        progress = True
        while progress:
            progress = False
            for i in list(pending):
                lit = body[i]
                if lit.is_builtin:
                    if ready(i):
                        lhs, rhs = lit.args
                        steps.append((CMP, lit.pred, _operand(lhs), _operand(rhs)))
                    elif lit.pred == "=":
                        lhs, rhs = lit.args
                        target = other = None
                        if isinstance(lhs, Var) and lhs.name not in bound_vars | scanned and (
                            isinstance(rhs, Const) or rhs.name in bound_vars
                        ):
                            target, other = lhs, rhs
                        elif isinstance(rhs, Var) and rhs.name not in bound_vars | scanned and (
                            isinstance(lhs, Const) or lhs.name in bound_vars
                        ):
                            target, other = rhs, lhs
                        if target is None:
                            continue
                        steps.append((BIND, target.name, _operand(other)))
                        bound_vars.add(target.name)
                    else:
                        continue
                elif lit.negated:
                    if not ready(i):
                        continue
                    steps.append(_scan_step(lit, bound_vars, sources.get(i, default_source)))
                else:
                    continue
                pending.remove(i)
                progress = True

    def take_scan(i: int) -> None:
        lit = body[i]
        steps.append(_scan_step(lit, bound_vars, sources.get(i, default_source)))
        bound_vars.update(lit.variables())
        pending.remove(i)

    if seed is not None:
        take_scan(seed)
    emit_filters()
    while pending:
        scans = [i for i in pending if not body[i].is_builtin and not body[i].negated]
        if not scans:
            raise ProgramError(
                "unsafe body, cannot bind: " + ", ".join(str(body[i]) for i in pending)
            )
        best = max(scans, key=lambda i: (sum(1 for v in body[i].variables() if v in bound_vars)
                                          + sum(isinstance(t, Const) for t in body[i].args), -i))
        take_scan(best)
        emit_filters()
    return steps


def _value(operand: tuple[bool, object], binding: dict):
    is_const, x = operand
    return x if is_const else binding[x]


def _compare(op: str, a, b, binding: dict):
    if kind_of(a) != kind_of(b):
        raise EvaluationError(
            f"builtin {a!r} {op} {b!r} compares values of different kinds "
            f"(binding {dict(sorted(binding.items()))})"
        )
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    return a <= b


def run_steps(
    steps: list[tuple],
    resolve: Resolve,
    cache: IndexCache,
    binding: dict | None = None,
) -> list[dict]:
    """Run a compiled body; returns every satisfying binding."""
    envs = [dict(binding or {})]
    for step in steps:
        if not envs:
            break
        kind = step[0]
        if kind == SCAN:
            _, src, key, positions, key_parts, new_vars, repeats = step
            rel = resolve(src, key)
            nxt = []
            if positions:
                index = cache.lookup(rel, positions)
                for env in envs:
                    k = tuple(x if c else env[x] for c, x in key_parts)
                    for row in index.get(k, ()):
                        if repeats and any(row[p] != row[q] for p, q in repeats):
                            continue
                        e = dict(env)
                        for p, name in new_vars:
                            e[name] = row[p]
                        nxt.append(e)
            else:
                for env in envs:
                    for row in rel:
                        if repeats and any(row[p] != row[q] for p, q in repeats):
                            continue
                        e = dict(env)
                        for p, name in new_vars:
                            e[name] = row[p]
                        nxt.append(e)
            envs = nxt
        elif kind == NEG:
            _, src, key, positions, key_parts, new_vars, repeats = step
            rel = resolve(src, key)
            if not rel:
                continue
            if len(positions) == len(next(iter(rel))):
                envs = [e for e in envs if tuple(x if c else e[x] for c, x in key_parts) not in rel]
            else:
                index = cache.lookup(rel, positions)
                envs = [e for e in envs
                        if tuple(x if c else e[x] for c, x in key_parts) not in index]
        elif kind == CMP:
            _, op, lhs, rhs = step
            envs = [e for e in envs if _compare(op, _value(lhs, e), _value(rhs, e), e)]
        else:
            _, name, operand = step
            for e in envs:
                e[name] = _value(operand, e)
    return envs


def head_row(head: Literal, env: dict) -> tuple:
    return tuple(t.value if isinstance(t, Const) else env[t.name] for t in head.args)


@dataclass(frozen=True)
class CompiledRule:
    rule: Rule
    full: list[tuple]
    # (body position, plan reading that position from the "delta" source)
    variants: tuple[tuple[int, list[tuple]], ...]


@dataclass(frozen=True)
class CompiledStratum:
    preds: frozenset[str]
    rules: tuple[CompiledRule, ...]
    recursive: bool


@dataclass(frozen=True)
class CompiledProgram:
    program: Program
    strata: tuple[CompiledStratum, ...]


def compile_rule(rule: Rule, stratum_preds: frozenset[str] = frozenset()) -> CompiledRule:
    full = plan_body(rule.body)
    variants = []
    for i, lit in enumerate(rule.body):
        if not lit.is_builtin and not lit.negated and lit.key in stratum_preds:
            variants.append((i, plan_body(rule.body, seed=i, sources={i: "delta"})))
    return CompiledRule(rule, full, tuple(variants))


@lru_cache(maxsize=512)
def compile_program(program: Program) -> CompiledProgram:
    strata = []
    for preds in stratify(program):
        frozen = frozenset(preds)
        rules = [r for r in program.rules if r.head.key in frozen]
        if not rules:
            continue
        compiled = tuple(compile_rule(r, frozen) for r in rules)
        recursive = any(c.variants for c in compiled)
        strata.append(CompiledStratum(frozen, compiled, recursive))
    return CompiledProgram(program, tuple(strata))


def _derive(crule: CompiledRule, steps: list[tuple], resolve: Resolve, cache: IndexCache) -> set:
    head = crule.rule.head
    return {head_row(head, env) for env in run_steps(steps, resolve, cache)}


def evaluate_compiled(compiled: CompiledProgram, edb: Database) -> Database:
    total: dict[str, frozenset] = dict(edb._rels)
    cache = IndexCache()
    empty: frozenset = frozenset()

    for stratum in compiled.strata:
        for p in stratum.preds:
            total.setdefault(p, empty)
        delta: dict[str, frozenset] = {}

        def resolve(src: str, key: str) -> frozenset:
            if src == "delta":
                return delta.get(key, empty)
            return total.get(key, empty)

        new: dict[str, set] = {}
        for crule in stratum.rules:
            new.setdefault(crule.rule.head.key, set()).update(_derive(crule, crule.full, resolve, cache))
        while True:
            delta = {}
            for key, rows in new.items():
                fresh = frozenset(rows) - total[key]
                if fresh:
                    delta[key] = fresh
                    total[key] = total[key] | fresh
            if not delta or not stratum.recursive:
                break
            new = {}
            for crule in stratum.rules:
                for pos, steps in crule.variants:
                    if crule.rule.body[pos].key in delta:
                        new.setdefault(crule.rule.head.key, set()).update(
                            _derive(crule, steps, resolve, cache)
                        )
    return Database._trusted(total)


def evaluate(program: Program, edb: Database) -> Database:
    """Least stratified model of ``program`` over ``edb``.

    The result holds every relation of ``edb`` plus every predicate defined by
    a rule. Predicates with neither facts nor rules read as empty. ``edb`` is
    not modified.
    """
    return evaluate_compiled(compile_program(program), edb)


def derivable(rules: Iterable[Rule], row: tuple, resolve: Resolve, cache: IndexCache | None = None) -> bool:
    """Whether some rule derives ``row`` in one step over the given relations."""
    cache = cache or IndexCache()
    for rule in rules:
        env: dict = {}
        ok = True
        for t, v in zip(rule.head.args, row):
            if isinstance(t, Const):
                ok = t.value == v
            elif t.name in env:
                ok = env[t.name] == v
            else:
                env[t.name] = v
            if not ok:
                break
        if not ok:
            continue
        steps = _plan_bound(rule, frozenset(env))
        if run_steps(steps, resolve, cache, env):
            return True
    return False


@lru_cache(maxsize=1024)
def _plan_bound(rule: Rule, bound: frozenset[str]) -> list[tuple]:
    return plan_body(rule.body, bound=bound)


def query(body: Iterable[Literal], db: Database) -> list[dict]:
    """All bindings satisfying a conjunctive body over ``db``."""
    body = tuple(body)
    lim = limited_variables(body)
    for lit in body:
        for v in lit.variables():
            if (lit.negated or lit.is_builtin) and v not in lim:
                raise ProgramError(f"unsafe query variable {v}")
    steps = plan_body(body)
    return run_steps(steps, lambda src, key: db.relation(key), IndexCache())
