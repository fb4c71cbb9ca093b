from __future__ import annotations

from ..datalog.database import Database, Delta, apply_delta
from ..datalog.engine import evaluate
from ..datalog.values import tuple_key
from ..errors import DeltaError
from .strategy import PutStrategy


def put_input(strategy: PutStrategy, source: Database, view: Database) -> Database:
    """The database a strategy runs over: base relations plus the updated view."""
    rels = {n: source.relation(n) for n in strategy.base}
    rels[strategy.view] = view.relation(strategy.view)
    return Database._trusted(rels)


def put_eval(strategy: PutStrategy, source: Database, view: Database) -> Delta:
    """Run the strategy and collect its insertion/deletion relations.

    Raises :class:`DeltaError` when a tuple lands in both ``+s`` and ``-s``.
    """
    model = evaluate(strategy.program, put_input(strategy, source, view))
    ins, dele = {}, {}
    for s in strategy.sources:
        plus, minus = model.relation(f"+{s}"), model.relation(f"-{s}")
        clash = plus & minus
        if clash:
            row = min(clash, key=tuple_key)
            raise DeltaError(
                f"strategy {strategy.name} both inserts and deletes {row!r} in {s}", s, row
            )
        ins[s], dele[s] = plus, minus
    return Delta(ins, dele)


def put_apply(
    strategy: PutStrategy, source: Database, view: Database, strict: bool = False
) -> Database:
    """The updated source. Reference relations pass through unchanged.

    Redundant inserts and deletes of absent tuples are no-ops unless
    ``strict`` is set.
    """
    return apply_delta(source, put_eval(strategy, source, view), strict=strict)
