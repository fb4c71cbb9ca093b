"""Immutable databases, deltas, and the diff/apply pair relating them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from ..errors import DeltaError, SchemaMismatchError
from .values import as_value, tuple_key

Relation = frozenset  # frozenset[tuple]


def _freeze_rows(name: str, rows: Iterable[Iterable]) -> frozenset:
    out = set()
    arity = None
    for row in rows:
        t = tuple(as_value(v) for v in row)
        if arity is None:
            arity = len(t)
        elif len(t) != arity:
            raise SchemaMismatchError(f"relation {name} mixes arities {arity} and {len(t)}: {t}")
        out.add(t)
    return frozenset(out)


class Database(Mapping[str, frozenset]):
    """Named relations, each a finite set of constant tuples.

    Instances are immutable and hashable; every "update" returns a new value.
    Looking up an absent relation with :meth:`relation` yields the empty set.
    """

    __slots__ = ("_rels", "_hash")

    def __init__(self, relations: Mapping[str, Iterable[Iterable]] | None = None) -> None:
        rels = {}
        for name, rows in (relations or {}).items():
            rels[name] = _freeze_rows(name, rows)
        self._rels: dict[str, frozenset] = rels
        self._hash: int | None = None

    @classmethod
    def _trusted(cls, rels: dict[str, frozenset]) -> "Database":
        db = cls.__new__(cls)
        db._rels = rels
        db._hash = None
        return db

    def __getitem__(self, name: str) -> frozenset:
        return self._rels[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._rels)

    def __len__(self) -> int:
        return len(self._rels)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Database):
            return self._rels == other._rels
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._rels.items()))
        return self._hash

    def __repr__(self) -> str:
        parts = []
        for name in sorted(self._rels):
            rows = ", ".join(repr(r) for r in self.sorted_rows(name))
            parts.append(f"{name}={{{rows}}}")
        return f"Database({'; '.join(parts)})"

    def relation(self, name: str) -> frozenset:
        return self._rels.get(name, frozenset())

    def sorted_rows(self, name: str) -> list[tuple]:
        return sorted(self.relation(name), key=tuple_key)

    def arity(self, name: str) -> int | None:
        for row in self.relation(name):
            return len(row)
        return None

    def with_relations(self, relations: Mapping[str, Iterable[Iterable]]) -> "Database":
        rels = dict(self._rels)
        for name, rows in relations.items():
            rels[name] = rows if isinstance(rows, frozenset) else _freeze_rows(name, rows)
        return Database._trusted(rels)

    def merge(self, other: "Database") -> "Database":
        """Union of two databases; shared relation names are unioned."""
        rels = dict(self._rels)
        for name, rows in other._rels.items():
            rels[name] = rels[name] | rows if name in rels else rows
        return Database._trusted(rels)

    def restrict(self, names: Iterable[str]) -> "Database":
        """Keep only ``names``; names absent here become empty relations."""
        return Database._trusted({n: self.relation(n) for n in names})

    def without(self, names: Iterable[str]) -> "Database":
        drop = set(names)
        return Database._trusted({n: r for n, r in self._rels.items() if n not in drop})

    def size(self) -> int:
        return sum(len(r) for r in self._rels.values())


def _freeze_map(m: Mapping[str, Iterable[Iterable]]) -> dict[str, frozenset]:
    out = {}
    for name, rows in m.items():
        rows = rows if isinstance(rows, frozenset) else _freeze_rows(name, rows)
        if rows:
            out[name] = rows
    return out


@dataclass(frozen=True)
class Delta:
    """Per-relation insertion and deletion sets.

    Empty entries are dropped, so two deltas with the same effect compare
    equal. A tuple may not be both inserted into and deleted from a relation.
    """

    insert: Mapping[str, frozenset] = field(default_factory=dict)
    delete: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ins = _freeze_map(self.insert)
        dele = _freeze_map(self.delete)
        for name in sorted(ins.keys() & dele.keys()):
            both = ins[name] & dele[name]
            if both:
                row = min(both, key=tuple_key)
                raise DeltaError(
                    f"inconsistent delta: {row!r} is both inserted into and deleted from {name}",
                    name,
                    row,
                )
        object.__setattr__(self, "insert", ins)
        object.__setattr__(self, "delete", dele)

    def __hash__(self) -> int:
        return hash((frozenset(self.insert.items()), frozenset(self.delete.items())))

    def __bool__(self) -> bool:
        return bool(self.insert or self.delete)

    def is_empty(self) -> bool:
        return not self

    def relations(self) -> set[str]:
        return set(self.insert) | set(self.delete)

    def inserted(self, name: str) -> frozenset:
        return self.insert.get(name, frozenset())

    def deleted(self, name: str) -> frozenset:
        return self.delete.get(name, frozenset())

    def restrict(self, names: Iterable[str]) -> "Delta":
        keep = set(names)
        return Delta(
            {n: r for n, r in self.insert.items() if n in keep},
            {n: r for n, r in self.delete.items() if n in keep},
        )

    def inverse(self) -> "Delta":
        return Delta(self.delete, self.insert)

    def size(self) -> int:
        return sum(map(len, self.insert.values())) + sum(map(len, self.delete.values()))

    def effective(self, db: Database) -> "Delta":
        """Drop inserts already present in ``db`` and deletes absent from it."""
        return Delta(
            {n: r - db.relation(n) for n, r in self.insert.items()},
            {n: r & db.relation(n) for n, r in self.delete.items()},
        )

    def to_dict(self) -> dict:
        def rows(m: Mapping[str, frozenset]) -> dict:
            return {n: [list(t) for t in sorted(m[n], key=tuple_key)] for n in sorted(m)}

        return {"insert": rows(self.insert), "delete": rows(self.delete)}

    def __repr__(self) -> str:
        parts = []
        for sign, m in (("+", self.insert), ("-", self.delete)):
            for n in sorted(m):
                rows = ", ".join(repr(t) for t in sorted(m[n], key=tuple_key))
                parts.append(f"{sign}{n}={{{rows}}}")
        return f"Delta({'; '.join(parts)})"


def diff(after: Database, before: Database) -> Delta:
    """Delta turning ``before`` into ``after``, relation by relation."""
    if set(after) != set(before):
        raise SchemaMismatchError(
            f"cannot diff databases with different relations: {sorted(after)} vs {sorted(before)}"
        )
    ins, dele = {}, {}
    for name in after:
        a, b = after[name], before[name]
        ar, br = after.arity(name), before.arity(name)
        if ar is not None and br is not None and ar != br:
            raise SchemaMismatchError(f"relation {name} has arity {ar} vs {br}")
        if a is not b:
            ins[name] = a - b
            dele[name] = b - a
    return Delta(ins, dele)


def apply_delta(db: Database, delta: Delta, strict: bool = True) -> Database:
    """Remove the deletions, then add the insertions.

    In strict mode every deleted tuple must be present and every inserted
    tuple absent; otherwise violations are silently ignored.
    """
    rels = dict(db._rels)
    for name in sorted(delta.relations()):
        current = rels.get(name, frozenset())
        dels = delta.deleted(name)
        ins = delta.inserted(name)
        if strict:
            missing = dels - current
            if missing:
                row = min(missing, key=tuple_key)
                raise DeltaError(f"cannot delete {row!r} from {name}: tuple not present", name, row)
            present = ins & current
            if present:
                row = min(present, key=tuple_key)
                raise DeltaError(f"cannot insert {row!r} into {name}: tuple already present", name, row)
        arity = db.arity(name)
        for row in ins:
            if arity is not None and len(row) != arity:
                raise SchemaMismatchError(f"relation {name} has arity {arity}; cannot insert {row!r}")
            break
        rels[name] = (current - dels) | ins
    return Database._trusted(rels)
