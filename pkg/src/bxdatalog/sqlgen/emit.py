"""PostgreSQL text for a view definition and the trigger that runs its update strategy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..datalog.ast import Anon, Const, Literal, Program, Rule, Schema, Var
from ..datalog.values import kind_of
from ..errors import SqlGenError
from ..putback.derive import BxPair

INDENT = "   "


@dataclass(frozen=True)
class SqlArtifact:
    view_sql: str
    trigger_sql: str
    procedure_sql: str

    def files(self, name: str) -> dict[str, str]:
        return {
            f"{name}.view.sql": self.view_sql,
            f"{name}.trigger.sql": self.trigger_sql,
            f"{name}.proc.sql": self.procedure_sql,
        }


def sql_literal(value) -> str:
    if kind_of(value) == "str":
        return "'" + value.replace("'", "''") + "'"
    return str(value)


def _schema(name: str, arity: int, schemas: Mapping[str, Schema]) -> Schema:
    s = schemas.get(name)
    if s is None:
        return Schema.positional(name, arity)
    if s.arity != arity:
        raise SqlGenError(f"{name} is used with arity {arity} but declared as {s}")
    return s


class _Query:
    """One conjunctive rule body rendered as SELECT ... FROM ... WHERE."""

    def __init__(self, rule: Rule, schemas: Mapping[str, Schema],
                 rename: Mapping[str, str] | None = None, allow_negation: bool = False) -> None:
        self.schemas = schemas
        self.rename = dict(rename or {})
        pos = [l for l in rule.body if not l.is_builtin and not l.negated]
        if not pos:
            raise SqlGenError(f"rule has no positive body atom to select from: {rule}")
        counts: dict[str, int] = {}
        for l in pos:
            counts[l.pred] = counts.get(l.pred, 0) + 1
        self.tables: list[tuple[str, str, Schema]] = []  # (table, qualifier, schema)
        seen: dict[str, int] = {}
        for l in pos:
            table = self.rename.get(l.pred, l.pred)
            if counts[l.pred] > 1:
                seen[l.pred] = seen.get(l.pred, 0) + 1
                qual = f"{table}_{seen[l.pred]}"
            else:
                qual = table
            self.tables.append((table, qual, _schema(l.pred, l.arity, schemas)))
        names: dict[str, int] = {}
        for _, _, s in self.tables:
            for a in s.attrs:
                names[a] = names.get(a, 0) + 1
        self.ambiguous = {a for a, n in names.items() if n > 1} | (
            {a for _, _, s in self.tables for a in s.attrs}
            if any(counts[p] > 1 for p in counts) else set())
        self.env: dict[str, str] = {}
        self.conds: list[str] = []
        for (table, qual, schema), lit in zip(self.tables, pos):
            for i, t in enumerate(lit.args):
                col = self.col(qual, schema.attrs[i])
                if isinstance(t, Anon):
                    continue
                if isinstance(t, Const):
                    self.conds.append(f"{col} = {sql_literal(t.value)}")
                elif t.name in self.env:
                    self.conds.append(f"{self.env[t.name]} = {col}")
                else:
                    self.env[t.name] = col
        pending = [l for l in rule.body if l.is_builtin]
        progress = True
        while progress:
            progress = False
            for l in list(pending):
                a, b = l.args
                if l.pred == "=" and isinstance(a, Var) and a.name not in self.env and self._known(b):
                    self.env[a.name] = self.expr(b)
                elif l.pred == "=" and isinstance(b, Var) and b.name not in self.env and self._known(a):
                    self.env[b.name] = self.expr(a)
                elif self._known(a) and self._known(b):
                    self.conds.append(f"{self.expr(a)} {l.pred} {self.expr(b)}")
                else:
                    continue
                pending.remove(l)
                progress = True
        if pending:
            raise SqlGenError(f"cannot translate comparison {pending[0]} in {rule}")
        for l in rule.body:
            if l.negated:
                if not allow_negation:
                    raise SqlGenError(f"negation is not supported in a view definition: {rule}")
                self.conds.append(self.not_exists(l))

    def col(self, qual: str, attr: str) -> str:
        return f"{qual}.{attr}" if attr in self.ambiguous else attr

    def _known(self, t) -> bool:
        return isinstance(t, Const) or (isinstance(t, Var) and t.name in self.env)

    def expr(self, t) -> str:
        if isinstance(t, Const):
            return sql_literal(t.value)
        return self.env[t.name]

    def qualified(self, t) -> str:
        """Expression usable inside a subquery: always table-qualified."""
        if isinstance(t, Const):
            return sql_literal(t.value)
        e = self.env[t.name]
        if "." in e or e.startswith("'") or e[:1].isdigit() or e[:1] == "-":
            return e
        for _, qual, s in self.tables:
            if e in s.attrs:
                return f"{qual}.{e}"
        return e

    def not_exists(self, lit: Literal) -> str:
        table = self.rename.get(lit.pred, lit.pred)
        schema = _schema(lit.pred, lit.arity, self.schemas)
        clash = any(q == table for _, q, _ in self.tables)
        qual = f"{table}_n" if clash else table
        conds = [f"{qual}.{schema.attrs[i]} = {self.qualified(t)}"
                 for i, t in enumerate(lit.args) if not isinstance(t, Anon)]
        where = f" WHERE {' AND '.join(conds)}" if conds else ""
        source = f"{table} {qual}" if clash else table
        return f"NOT EXISTS (SELECT 1 FROM {source}{where})"

    def select(self, head: Literal, out: Schema, qualify: bool = False) -> str:
        items = []
        for t, attr in zip(head.args, out.attrs):
            e = self.qualified(t) if qualify else self.expr(t)
            bare = e.split(".")[-1]
            items.append(e if bare == attr else f"{e} AS {attr}")
        tables = ", ".join(t if t == q else f"{t} {q}" for t, q, _ in self.tables)
        sql = f"SELECT {', '.join(items)} FROM {tables}"
        if self.conds:
            sql += " WHERE " + " AND ".join(self.conds)
        return sql


def _view_name(get: Program) -> str:
    heads = sorted({r.head.pred for r in get.rules})
    if not heads:
        raise SqlGenError("nothing to emit: the view definition has no rules")
    if len(heads) > 1:
        raise SqlGenError(f"a view definition must define one predicate, found {heads}")
    return heads[0]


def emit_view(get: Program, schemas: Mapping[str, Schema] | None = None) -> str:
    """``CREATE OR REPLACE VIEW`` for a union of conjunctive rules (no terminator)."""
    view = _view_name(get)
    schemas = {**get.schemas, **(schemas or {})}
    for r in get.rules:
        if any(not l.is_builtin and l.pred == view for l in r.body):
            raise SqlGenError(f"recursive view definitions are not supported: {r}")
    out = _schema(view, get.rules[0].head.arity, schemas)
    selects = [_Query(r, schemas).select(r.head, out) for r in get.rules]
    return f"CREATE OR REPLACE VIEW {view} AS\n{INDENT}" + f"\n{INDENT}UNION\n{INDENT}".join(selects)


def emit_trigger_sql(view: str, events: tuple[str, ...] = ("INSERT", "DELETE")) -> str:
    return (f"CREATE TRIGGER {view}_trigger\n"
            f"{INDENT}INSTEAD OF {' OR '.join(events)} ON {view}\n"
            f"{INDENT}FOR EACH ROW\n"
            f"{INDENT}EXECUTE PROCEDURE {view}_proc();")


def _row_match(table: str, schema: Schema, ref: str) -> str:
    return " AND ".join(f"{table}.{a} = {ref}.{a}" for a in schema.attrs)


def emit_procedure(bx: BxPair, events: tuple[str, ...]) -> str:
    put = bx.put
    if not put.program.rules:
        raise SqlGenError(f"nothing to emit: strategy {put.name} has no rules")
    schemas = put.schemas()
    view = put.view
    vs = schemas[view]
    upd = f"{view}_upd"
    cols = ", ".join(vs.attrs)
    b = "    "
    lines = [
        f"CREATE OR REPLACE FUNCTION {view}_proc()",
        "RETURNS trigger AS $$",
        "  BEGIN",
        f"{b}CREATE TEMPORARY TABLE {upd} AS SELECT * FROM {view};",
    ]
    new_row = ", ".join(f"NEW.{a}" for a in vs.attrs)
    branches = []
    if "INSERT" in events:
        branches.append(("INSERT", [
            f"INSERT INTO {upd} SELECT {new_row}",
            f"  WHERE NOT EXISTS (SELECT 1 FROM {upd} WHERE {_row_match(upd, vs, 'NEW')});",
        ]))
    if "UPDATE" in events:
        branches.append(("UPDATE", [
            f"DELETE FROM {upd} WHERE {_row_match(upd, vs, 'OLD')};",
            f"INSERT INTO {upd} SELECT {new_row}",
            f"  WHERE NOT EXISTS (SELECT 1 FROM {upd} WHERE {_row_match(upd, vs, 'NEW')});",
        ]))
    if "DELETE" in events:
        branches.append(("DELETE", [f"DELETE FROM {upd} WHERE {_row_match(upd, vs, 'OLD')};"]))
    for i, (op, body) in enumerate(branches):
        kw = "IF" if i == 0 else "ELSIF"
        lines.append(f"{b}{kw} TG_OP = '{op}' THEN")
        lines.extend(f"{b}  {x}" for x in body)
    lines.append(f"{b}END IF;")
    rename = {view: upd}
    deltas: dict[str, list[Rule]] = {}
    for r in put.program.rules:
        deltas.setdefault(r.head.key, []).append(r)
    order = [f"-{s}" for s in put.sources] + [f"+{s}" for s in put.sources]
    temps = []
    for key in order:
        rules = deltas.get(key)
        if not rules:
            continue
        src = key[1:]
        temp = f"{'del' if key[0] == '-' else 'ins'}_{src}"
        temps.append(temp)
        ss = schemas[src]
        selects = []
        for r in rules:
            lines.append(f"{b}-- {r}")
            selects.append(_Query(r, schemas, rename, allow_negation=True).select(r.head, ss, qualify=True))
        lines.append(f"{b}CREATE TEMPORARY TABLE {temp} AS")
        lines.append(f"{b}  " + f"\n{b}  UNION\n{b}  ".join(selects) + ";")
    for key in order:
        if key not in deltas:
            continue
        src = key[1:]
        ss = schemas[src]
        if key[0] == "-":
            temp = f"del_{src}"
            lines.append(f"{b}DELETE FROM {src} WHERE EXISTS "
                         f"(SELECT 1 FROM {temp} WHERE {_row_match(temp, ss, src)});")
        else:
            temp = f"ins_{src}"
            lines.append(f"{b}INSERT INTO {src} SELECT * FROM {temp};")
    for t in [upd, *temps]:
        lines.append(f"{b}DROP TABLE {t};")
    lines.append(f"{b}RETURN NULL;")
    lines.append("  END;")
    lines.append("$$ LANGUAGE plpgsql;")
    return "\n".join(lines)


def trigger_events(bx: BxPair) -> tuple[str, ...]:
    """INSERT and DELETE always; UPDATE too when the strategy accepts row updates."""
    if bx.put.edits.update:
        return ("INSERT", "UPDATE", "DELETE")
    return ("INSERT", "DELETE")


def emit_trigger(bx: BxPair) -> SqlArtifact:
    if not bx.put.program.rules:
        raise SqlGenError(f"nothing to emit: strategy {bx.put.name} has no rules")
    events = trigger_events(bx)
    view_sql = emit_view(bx.get, bx.put.schemas()) + ";\n"
    return SqlArtifact(view_sql, emit_trigger_sql(bx.view, events) + "\n",
                       emit_procedure(bx, events) + "\n")
