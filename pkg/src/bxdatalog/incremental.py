"""Incremental get and put.

``inc_get`` pushes a source delta through the view definition with delta
rules instead of recomputing the view; ``inc_put`` turns a view delta into the
source delta the strategy induces. Both are checked against full
recomputation by :func:`check_contracts`.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from functools import lru_cache

from .datalog.ast import Program, Rule
from .datalog.database import Database, Delta, apply_delta, diff
from .datalog.engine import IndexCache, derivable, evaluate, head_row, plan_body, run_steps
from .datalog.stratify import stratify
from .putback.corpus import make_space, random_edit
from .putback.derive import BxPair
from .putback.kinds import column_domains
from .putback.laws import _edit, _view_space
from .putback.put import put_apply, put_eval


@dataclass(frozen=True)
class DeltaVariant:
    rule: Rule
    position: int
    insert_steps: list
    delete_steps: list


@dataclass(frozen=True)
class StratumPlan:
    preds: frozenset[str]
    rules: tuple[Rule, ...]
    variants: tuple[DeltaVariant, ...]
    reads: frozenset[str]
    negated: frozenset[str]
    recursive: bool


@dataclass(frozen=True)
class IncrementalPlan:
    program: Program
    strata: tuple[StratumPlan, ...]

    def propagate(self, old: Database, edb_delta: Delta) -> tuple[Delta, Database]:
        """Change of every relation, and the new model, after ``edb_delta``.

        ``old`` must be the full model of the program over the old EDB.
        Strata that are recursive or negate a changed relation are
        recomputed and diffed.
        """
        plus: dict[str, frozenset] = {k: v for k, v in edb_delta.insert.items()}
        minus: dict[str, frozenset] = {k: v for k, v in edb_delta.delete.items()}
        new = dict(old._rels)
        for name in edb_delta.relations():
            new[name] = (old.relation(name) - minus.get(name, frozenset())) | plus.get(name, frozenset())
        empty: frozenset = frozenset()
        full_new: Database | None = None
        cache = IndexCache()

        def resolve(src: str, key: str) -> frozenset:
            if src == "plus":
                return plus.get(key, empty)
            if src == "minus":
                return minus.get(key, empty)
            if src == "new":
                return new.get(key, empty)
            return old.relation(key)

        for st in self.strata:
            changed = {k for k in st.reads if plus.get(k) or minus.get(k)}
            if not changed:
                continue
            if st.recursive or changed & st.negated:
                if full_new is None:
                    edb = Database._trusted({k: new.get(k, empty) for k in self.program.edb()})
                    full_new = evaluate(self.program, edb)
                for p in st.preds:
                    before, after = old.relation(p), full_new.relation(p)
                    plus[p], minus[p] = after - before, before - after
                    new[p] = after
                continue
            ins: dict[str, set] = {p: set() for p in st.preds}
            gone: dict[str, set] = {p: set() for p in st.preds}
            for v in st.variants:
                key = v.rule.body[v.position].key
                head = v.rule.head
                if plus.get(key):
                    ins[head.key].update(head_row(head, e) for e in run_steps(v.insert_steps, resolve, cache))
                if minus.get(key):
                    gone[head.key].update(head_row(head, e) for e in run_steps(v.delete_steps, resolve, cache))
            for p in st.preds:
                before = old.relation(p)
                added = frozenset(ins[p]) - before
                rules = [r for r in st.rules if r.head.key == p]
                new_resolve = lambda src, key: new.get(key, empty)  # noqa: E731
                removed = frozenset(r for r in gone[p] & before
                                    if not derivable(rules, r, new_resolve, cache))
                plus[p], minus[p] = added, removed
                new[p] = (before - removed) | added
        return Delta(plus, minus), Database._trusted(new)


@lru_cache(maxsize=256)
def build_plan(program: Program) -> IncrementalPlan:
    strata = []
    for preds in stratify(program):
        frozen = frozenset(preds)
        rules = tuple(r for r in program.rules if r.head.key in frozen)
        if not rules:
            continue
        reads, negated, variants = set(), set(), []
        recursive = False
        for r in rules:
            for i, lit in enumerate(r.body):
                if lit.is_builtin:
                    continue
                reads.add(lit.key)
                if lit.key in frozen:
                    recursive = True
                if lit.negated:
                    negated.add(lit.key)
                    continue
                variants.append(DeltaVariant(
                    r, i,
                    plan_body(r.body, seed=i, sources={i: "plus"}, default_source="new"),
                    plan_body(r.body, seed=i, sources={i: "minus"}, default_source="old"),
                ))
        strata.append(StratumPlan(frozen, rules, tuple(variants), frozenset(reads),
                                  frozenset(negated), recursive))
    return IncrementalPlan(program, tuple(strata))


def inc_get(bx: BxPair, source: Database, source_delta: Delta) -> Delta:
    """View delta caused by ``source_delta``; it must apply strictly to ``source``."""
    base = bx.put.base
    src = source.restrict(base)
    change = source_delta.restrict(base)
    apply_delta(src, change, strict=True)
    old = evaluate(bx.get, src)
    out, _ = build_plan(bx.get).propagate(old, change)
    return out.restrict([bx.view])


def inc_put(bx: BxPair, source: Database, view: Database, view_delta: Delta) -> Delta:
    """Source delta induced by ``view_delta``; redundant tuples are dropped."""
    updated = apply_delta(view, view_delta.restrict([bx.view]), strict=True)
    return put_eval(bx.put, source, updated).effective(source)


def random_source_edit(bx: BxPair, source: Database, spaces: dict, rng: random.Random) -> Delta | None:
    """One inserted or deleted tuple in a random source or reference relation."""
    names = list(bx.put.base)
    rng.shuffle(names)
    for name in names:
        picked = random_edit(source.relation(name), spaces[name], ["insert", "delete"], [], rng)
        if picked is not None:
            return picked[1]
    return None


@dataclass(frozen=True)
class ContractReport:
    strategy: str
    seed: int
    cases: int
    get_checked: int
    get_failures: int
    put_checked: int
    put_failures: int
    inc_get_seconds: float
    full_get_seconds: float
    inc_put_seconds: float
    full_put_seconds: float
    first_failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.get_failures == 0 and self.put_failures == 0

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "strategy": self.strategy, "seed": self.seed, "cases": self.cases,
            "get": {"checked": self.get_checked, "failures": self.get_failures},
            "put": {"checked": self.put_checked, "failures": self.put_failures},
        }
        if timings:
            out["get"].update(incremental_s=round(self.inc_get_seconds, 4),
                              recompute_s=round(self.full_get_seconds, 4))
            out["put"].update(incremental_s=round(self.inc_put_seconds, 4),
                              recompute_s=round(self.full_put_seconds, 4))
        if self.first_failure is not None:
            out["first_failure"] = self.first_failure
        return out


def check_contracts(bx: BxPair, cases: int = 500, seed: int = 42, domain_size: int = 4) -> ContractReport:
    """Compare inc_get and inc_put with full recomputation on seeded cases.

    get: for (S, w) with w one inserted or deleted tuple, apply(get(S), inc_get) = get(w(S)).
    put: for (S, u) with u an edit of get(S) from the strategy's edit class,
    apply(S, inc_put) = put(S, u(get(S))).
    """
    from .datalog.io import jsonable

    put = bx.put
    schemas = put.schemas()
    base = list(put.base)
    space = make_space(schemas, column_domains(put.program, schemas, base, domain_size), base)
    spaces = {r.schema.name: r for r in space.relations}
    view_space = _view_space(put, domain_size)
    plan = build_plan(bx.get)
    rng = random.Random(seed)
    t_inc = t_full = p_inc = p_full = 0.0
    g_n = g_bad = p_n = p_bad = 0
    failure = None
    for _ in range(cases):
        source = space.sample(rng)
        w = random_source_edit(bx, source, spaces, rng)
        if w is None:
            continue
        g_n += 1
        old = evaluate(bx.get, source)
        t0 = time.perf_counter()
        dv, _ = plan.propagate(old, w)
        t1 = time.perf_counter()
        want = bx.view_of(apply_delta(source, w))
        t2 = time.perf_counter()
        t_inc += t1 - t0
        t_full += t2 - t1
        got = apply_delta(bx.view_of(source), dv.restrict([bx.view]))
        if got != want:
            g_bad += 1
            failure = failure or {"contract": "get", "source": jsonable(source),
                                  "delta": jsonable(w), "expected": jsonable(want),
                                  "got": jsonable(got)}
    rng = random.Random(seed + 1)
    for _ in range(cases):
        for _attempt in range(50):
            source = space.sample(rng)
            edit = _edit(bx, source, view_space, rng)
            if edit is not None:
                break
        else:
            continue
        p_n += 1
        view = bx.view_of(source)
        u = diff(edit[1], view)
        t0 = time.perf_counter()
        ds = inc_put(bx, source, view, u)
        t1 = time.perf_counter()
        want_s = put_apply(put, source, edit[1])
        t2 = time.perf_counter()
        p_inc += t1 - t0
        p_full += t2 - t1
        got_s = apply_delta(source, ds)
        if got_s != want_s:
            p_bad += 1
            failure = failure or {"contract": "put", "source": jsonable(source),
                                  "view_delta": jsonable(u), "expected": jsonable(want_s),
                                  "got": jsonable(got_s)}
    return ContractReport(put.name, seed, cases, g_n, g_bad, p_n, p_bad,
                          t_inc, t_full, p_inc, p_full, failure)
