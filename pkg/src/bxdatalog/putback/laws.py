"""Well-behavedness checks for a put/get pair, one instance or a seeded corpus at a time."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..datalog.ast import Program
from ..datalog.database import Database, Delta, apply_delta
from ..datalog.engine import evaluate
from ..datalog.io import jsonable
from ..errors import BxError
from .corpus import make_space, random_edit
from .derive import BxPair
from .kinds import column_domains
from .put import put_eval
from .strategy import PutStrategy

PASS = "pass"
FAIL = "fail"
REJECTED = "rejected"
VACUOUS = "vacuous"

DEFAULT_CORPUS = 500
DEFAULT_DOMAIN = 4


@dataclass(frozen=True)
class LawResult:
    """Outcome of one law instance.

    ``status`` is ``pass``, ``fail`` (GetPut produced a delta, or put raised)
    or ``rejected`` (PutGet: the view read back differs from the one put).
    """

    status: str
    source: Database | None = None
    view: Database | None = None
    delta: Delta | None = None
    view_after: Database | None = None
    missing: frozenset = frozenset()
    extra: frozenset = frozenset()
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out: dict = {"status": self.status}
        for name in ("source", "view", "delta", "view_after"):
            value = getattr(self, name)
            if value is not None:
                out[name] = jsonable(value)
        if self.missing or self.extra:
            out["missing"] = jsonable(self.missing)
            out["extra"] = jsonable(self.extra)
        if self.reason:
            out["reason"] = self.reason
        return out


def _view(get: Program, view: str, base: Iterable[str], source: Database) -> Database:
    model = evaluate(get, source.restrict(base))
    return Database._trusted({view: model.relation(view)})


def check_getput(bx: BxPair, source: Database) -> LawResult:
    """put(s, get(s)) must produce an empty delta, redundant tuples included."""
    view = bx.view_of(source)
    try:
        delta = put_eval(bx.put, source, view)
    except BxError as exc:
        return LawResult(FAIL, source, view, reason=str(exc))
    if delta:
        return LawResult(FAIL, source, view, delta=delta, reason="put changes the source")
    return LawResult(PASS)


def check_putget(bx: BxPair, source: Database, view: Database) -> LawResult:
    """get(put(s, v)) must give back v; otherwise the update is rejected."""
    try:
        delta = put_eval(bx.put, source, view)
        after = apply_delta(source, delta, strict=False)
    except BxError as exc:
        return LawResult(REJECTED, source, view, reason=str(exc))
    back = bx.view_of(after)
    want, got = view.relation(bx.view), back.relation(bx.view)
    if want == got:
        return LawResult(PASS)
    return LawResult(
        REJECTED, source, view, delta=delta, view_after=back,
        missing=want - got, extra=got - want, reason="view not reproduced",
    )


@dataclass(frozen=True)
class UniquenessResult:
    ok: bool
    excluded: tuple[tuple[int, str], ...] = ()
    witness: dict | None = None

    def to_dict(self) -> dict:
        out: dict = {"status": PASS if self.ok else FAIL,
                     "excluded": [{"candidate": i, "reason": r} for i, r in self.excluded]}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def check_uniqueness(
    put: PutStrategy,
    candidate_gets: Sequence[Program],
    corpus: Sequence[Database],
    seed: int = 42,
) -> UniquenessResult:
    """Well-behaved candidate gets must agree on every corpus database.

    A candidate is excluded (not a witness) when it fails GetPut on some
    corpus database or PutGet on a seeded edit drawn from the put's edit class.
    """
    excluded: list[tuple[int, str]] = []
    kept: list[tuple[int, BxPair]] = []
    view_space = _view_space(put, DEFAULT_DOMAIN)
    for i, get in enumerate(candidate_gets):
        bx = BxPair(put, get)
        rng = random.Random(seed)
        reason = ""
        for db in corpus:
            if not check_getput(bx, db).ok:
                reason = "fails GetPut"
                break
            edit = _edit(bx, db, view_space, rng)
            if edit is not None and not check_putget(bx, db, edit[1]).ok:
                reason = f"fails PutGet on a {edit[0]} edit"
                break
        if reason:
            excluded.append((i, reason))
        else:
            kept.append((i, bx))
    for db in corpus:
        views = [(i, bx.view_of(db)) for i, bx in kept]
        for (i, a), (j, b) in zip(views, views[1:]):
            if a != b:
                return UniquenessResult(False, tuple(excluded), {
                    "candidates": [i, j],
                    "source": jsonable(db),
                    "views": [jsonable(a), jsonable(b)],
                })
    return UniquenessResult(True, tuple(excluded))


def _view_space(put: PutStrategy, size: int):
    schemas = put.schemas()
    domains = column_domains(put.program, schemas, [put.view], size)
    return make_space(schemas, domains, [put.view]).relations[0]


def _edit(bx: BxPair, source: Database, space, rng: random.Random) -> tuple[str, Database] | None:
    view = bx.view_of(source)
    schema = space.schema
    cols = [schema.attrs.index(a) for a in bx.put.edits.update]
    picked = random_edit(view.relation(bx.view), space, bx.put.edits.kinds(), cols, rng)
    if picked is None:
        return None
    kind, delta = picked
    return kind, apply_delta(view, delta)


def source_corpus(
    strategy: PutStrategy, size: int, seed: int = 42, domain_size: int = DEFAULT_DOMAIN
) -> list[Database]:
    """``size`` seeded random sources honouring declared keys."""
    schemas = strategy.schemas()
    base = list(strategy.base)
    space = make_space(schemas, column_domains(strategy.program, schemas, base, domain_size), base)
    rng = random.Random(seed)
    return [space.sample(rng) for _ in range(size)]


@dataclass(frozen=True)
class LawOutcome:
    law: str
    status: str
    corpus_size: int
    seed: int
    checked: int
    counterexample: LawResult | None = None

    def to_dict(self) -> dict:
        out = {"law": self.law, "status": self.status, "corpus_size": self.corpus_size,
               "seed": self.seed, "checked": self.checked}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_dict()
        return out


@dataclass(frozen=True)
class LawReport:
    strategy: str
    seed: int
    corpus_size: int
    outcomes: tuple[LawOutcome, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return all(o.status != FAIL for o in self.outcomes)

    def summary(self) -> dict[str, str]:
        return {o.law: o.status for o in self.outcomes}

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "corpus_size": self.corpus_size,
            "summary": self.summary(),
            "laws": [o.to_dict() for o in self.outcomes],
        }


def run_law_suite(
    bx: BxPair,
    corpus_size: int = DEFAULT_CORPUS,
    seed: int = 42,
    domain_size: int = DEFAULT_DOMAIN,
) -> LawReport:
    """GetPut over ``corpus_size`` random sources; PutGet over as many (source, edit) pairs.

    Edits are single-row inserts, deletes or updates of get(source) drawn from
    the strategy's declared edit class. Sources with no possible edit are
    redrawn a bounded number of times. Any PutGet rejection is a failure.
    """
    put = bx.put
    sources = source_corpus(put, corpus_size, seed, domain_size)
    getput = _first_failure(check_getput(bx, s) for s in sources)
    outcomes = [_outcome("GetPut", getput, corpus_size, seed, len(sources))]

    schemas = put.schemas()
    base = list(put.base)
    space = make_space(schemas, column_domains(put.program, schemas, base, domain_size), base)
    view_space = _view_space(put, domain_size)
    rng = random.Random(seed + 1)
    checked = 0
    failure = None
    for _ in range(corpus_size):
        for _attempt in range(50):
            source = space.sample(rng)
            edit = _edit(bx, source, view_space, rng)
            if edit is not None:
                break
        else:
            continue
        checked += 1
        res = check_putget(bx, source, edit[1])
        if not res.ok:
            failure = res
            break
    outcomes.append(_outcome("PutGet", failure, corpus_size, seed, checked))
    return LawReport(put.name, seed, corpus_size, tuple(outcomes))


def _first_failure(results: Iterable[LawResult]) -> LawResult | None:
    for r in results:
        if not r.ok:
            return r
    return None


def _outcome(law: str, failure: LawResult | None, size: int, seed: int, checked: int) -> LawOutcome:
    if failure is not None:
        return LawOutcome(law, FAIL, size, seed, checked, failure)
    return LawOutcome(law, PASS if checked else VACUOUS, size, seed, checked)
