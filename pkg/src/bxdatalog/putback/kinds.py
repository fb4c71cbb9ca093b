"""Column kind inference and test domains for strategies.

Columns that share a variable, or are compared with each other, fall into
one class. A class takes the kind of any constant it meets (strings by
default) and collects those constants, so random instances always compare
values of matching kinds and exercise the strategy's own constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count

from ..datalog.ast import Const, Program, Var
from ..datalog.values import Dec, Value, kind_of, value_key
from ..errors import StrategyError

Column = tuple[str, int]


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[object, object] = {}

    def find(self, x: object) -> object:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: object, b: object) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class ColumnClasses:
    classes: dict[Column, int]
    kinds: dict[int, str]
    constants: dict[int, tuple[Value, ...]]
    labels: dict[int, str]

    def domain(self, cls: int, size: int) -> tuple[Value, ...]:
        """Strategy constants of the class, topped up with fresh values to ``size``."""
        consts = list(self.constants.get(cls, ()))
        kind = self.kinds[cls]
        label = self.labels[cls]
        fresh: list[Value] = []
        need = max(size - len(consts), 1 if not consts else 0)
        gen = count()
        while len(fresh) < need:
            i = next(gen)
            if kind == "int":
                v: Value = i + 1
            elif kind == "dec":
                v = Dec(Dec(i + 1) / 2)
            else:
                v = f"{label}{i}"
            if v not in consts:
                fresh.append(v)
        return tuple(consts + fresh)


def infer_columns(program: Program, schemas: dict) -> ColumnClasses:
    uf = _UnionFind()
    arities = program.arities()
    for name, schema in schemas.items():
        arities.setdefault(name, schema.arity)
    for name, n in arities.items():
        for i in range(n):
            uf.find((name, i))
    const_of: dict[object, set] = {}

    def note(node: object, value: Value) -> None:
        const_of.setdefault(node, set()).add(value)

    for ri, rule in enumerate(program.rules):
        for lit in (rule.head, *rule.body):
            if lit.is_builtin:
                a, b = lit.args
                na = ("var", ri, a.name) if isinstance(a, Var) else None
                nb = ("var", ri, b.name) if isinstance(b, Var) else None
                if na and nb:
                    uf.union(na, nb)
                elif na and isinstance(b, Const):
                    note(na, b.value)
                elif nb and isinstance(a, Const):
                    note(nb, a.value)
                continue
            for pos, t in enumerate(lit.args):
                col = (lit.pred, pos)
                if isinstance(t, Var):
                    uf.union(col, ("var", ri, t.name))
                elif isinstance(t, Const):
                    note(col, t.value)
    roots: dict[object, int] = {}
    classes: dict[Column, int] = {}
    for col in sorted(k for k in uf.parent if len(k) == 2):
        r = uf.find(col)
        classes[col] = roots.setdefault(r, len(roots))
    consts: dict[int, set] = {}
    for node, values in const_of.items():
        r = uf.find(node)
        if r in roots:
            consts.setdefault(roots[r], set()).update(values)
    kinds: dict[int, str] = {}
    for cls in roots.values():
        ks = {kind_of(v) for v in consts.get(cls, ())}
        if len(ks) > 1:
            raise StrategyError(f"constants of different kinds share a column: {sorted(map(str, ks))}")
        kinds[cls] = ks.pop() if ks else "str"
    labels: dict[int, str] = {}
    for (name, pos), cls in sorted(classes.items()):
        if cls in labels:
            continue
        schema = schemas.get(name)
        labels[cls] = schema.attrs[pos] if schema is not None else "c"
    return ColumnClasses(
        classes,
        kinds,
        {c: tuple(sorted(v, key=value_key)) for c, v in consts.items()},
        labels,
    )


def column_domains(
    program: Program, schemas: dict, relations: list[str], size: int
) -> dict[str, list[tuple[Value, ...]]]:
    """Per relation, the list of per-column value domains."""
    cc = infer_columns(program, schemas)
    out = {}
    for name in relations:
        arity = schemas[name].arity
        out[name] = [cc.domain(cc.classes[(name, i)], size) for i in range(arity)]
    return out
