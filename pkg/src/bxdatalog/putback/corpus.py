"""Seeded random and exhaustive database instances for law and residual checks."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from math import prod
from typing import Iterator, Sequence

from ..datalog.ast import Schema
from ..datalog.database import Database, Delta
from ..datalog.values import Value, tuple_key


@dataclass(frozen=True)
class RelationSpace:
    """All instances of one relation over fixed column domains, honouring its key."""

    schema: Schema
    domains: tuple[tuple[Value, ...], ...]

    @property
    def key(self) -> tuple[int, ...]:
        return self.schema.key

    @cached_property
    def rest(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.schema.arity) if i not in self.key)

    @cached_property
    def _rows(self) -> list[tuple]:
        return list(product(*self.domains))

    @cached_property
    def _keys(self) -> list[tuple]:
        return list(product(*(self.domains[i] for i in self.key)))

    @cached_property
    def _rest_domains(self) -> list[tuple]:
        return [self.domains[i] for i in self.rest]

    def all_rows(self) -> list[tuple]:
        return list(self._rows)

    def count(self) -> int:
        if self.key:
            keys = prod(len(self.domains[i]) for i in self.key)
            vals = prod(len(self.domains[i]) for i in self.rest)
            return (1 + vals) ** keys
        return 2 ** prod(len(d) for d in self.domains)

    def _assemble(self, k: tuple, v: tuple) -> tuple:
        row: list = [None] * self.schema.arity
        for i, x in zip(self.schema.key, k):
            row[i] = x
        for i, x in zip(self.rest, v):
            row[i] = x
        return tuple(row)

    def enumerate(self) -> Iterator[frozenset]:
        if self.key:
            keys = self._keys
            vals = [None, *product(*(self.domains[i] for i in self.rest))]
            for choice in product(vals, repeat=len(keys)):
                yield frozenset(self._assemble(k, v) for k, v in zip(keys, choice) if v is not None)
        else:
            rows = self.all_rows()
            for mask in range(2 ** len(rows)):
                yield frozenset(r for i, r in enumerate(rows) if mask >> i & 1)

    def sample(self, rng: random.Random) -> frozenset:
        density = rng.random()
        if self.key:
            out = set()
            rest = self._rest_domains
            for k in self._keys:
                if rng.random() < density:
                    out.add(self._assemble(k, tuple(rng.choice(d) for d in rest)))
            return frozenset(out)
        return frozenset(r for r in self._rows if rng.random() < density)


@dataclass(frozen=True)
class InstanceSpace:
    relations: tuple[RelationSpace, ...]

    def count(self) -> int:
        return prod(r.count() for r in self.relations)

    def sample(self, rng: random.Random) -> Database:
        return Database._trusted({r.schema.name: r.sample(rng) for r in self.relations})

    def enumerate(self) -> Iterator[Database]:
        names = [r.schema.name for r in self.relations]
        for combo in product(*(list(r.enumerate()) for r in self.relations)):
            yield Database._trusted(dict(zip(names, combo)))

    def instances(self, cap: int, rng: random.Random) -> tuple[Iterator[Database], bool]:
        """Every instance when there are at most ``cap``, else ``cap`` seeded samples.

        Returns the iterator and whether it is exhaustive.
        """
        if self.count() <= cap:
            return self.enumerate(), True
        return (self.sample(rng) for _ in range(cap)), False


def make_space(schemas: dict[str, Schema], domains: dict[str, list], names: Sequence[str]) -> InstanceSpace:
    return InstanceSpace(tuple(RelationSpace(schemas[n], tuple(domains[n])) for n in names))


def random_edit(
    view_rows: frozenset,
    space: RelationSpace,
    kinds: Sequence[str],
    update_cols: Sequence[int],
    rng: random.Random,
) -> tuple[str, Delta] | None:
    """One row-level edit of a view relation: insert, delete or update of one row.

    Inserts respect the view key; updates change only ``update_cols``.
    Returns None when no edit of the allowed kinds exists.
    """
    name = space.schema.name
    rows = sorted(view_rows, key=tuple_key)
    options = list(kinds)
    rng.shuffle(options)
    for kind in options:
        if kind == "delete" and rows:
            row = rng.choice(rows)
            return kind, Delta(delete={name: [row]})
        if kind == "insert":
            taken = {tuple(r[i] for i in space.key) for r in rows} if space.key else set()
            cands = [r for r in space.all_rows() if r not in view_rows
                     and (not space.key or tuple(r[i] for i in space.key) not in taken)]
            if cands:
                return kind, Delta(insert={name: [rng.choice(cands)]})
        if kind == "update" and rows and update_cols:
            cands = []
            for row in rows:
                for c in update_cols:
                    for val in space.domains[c]:
                        if val != row[c]:
                            new = row[:c] + (val,) + row[c + 1:]
                            if new not in view_rows:
                                cands.append((row, new))
            if cands:
                old, new = rng.choice(cands)
                return kind, Delta(insert={name: [new]}, delete={name: [old]})
    return None
