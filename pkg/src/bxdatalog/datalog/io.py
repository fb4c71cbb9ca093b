"""Database interchange: a directory of headerless CSV files, or one JSON document.

Both writers sort relations by name and tuples lexicographically, so equal
databases always serialize to identical bytes. CSV fields matching an
integer or decimal literal are read back as numbers; use JSON when a string
constant looks numeric.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Mapping

from .database import Database, Delta
from .values import Dec, Value, kind_of, tuple_key

_INT = re.compile(r"-?\d+\Z")
_DEC = re.compile(r"-?\d+\.\d+\Z")


def parse_field(text: str) -> Value:
    if _INT.match(text):
        return int(text)
    if _DEC.match(text):
        return Dec(text)
    return text


def read_csv_dir(path: str | Path) -> Database:
    path = Path(path)
    rels = {}
    for f in sorted(path.glob("*.csv")):
        with f.open(newline="", encoding="utf-8") as fh:
            rels[f.stem] = [tuple(parse_field(x) for x in row) for row in csv.reader(fh)]
    return Database(rels)


def csv_text(db: Database, name: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in db.sorted_rows(name):
        writer.writerow([str(v) for v in row])
    return buf.getvalue()


def write_csv_dir(db: Database, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for name in sorted(db):
        (path / f"{name}.csv").write_text(csv_text(db, name), encoding="utf-8")


def _json_value(v: Value) -> str:
    if kind_of(v) == "str":
        return json.dumps(v, ensure_ascii=False)
    return str(v)


def _json_relations(rels: Mapping[str, frozenset], indent: str) -> str:
    if not rels:
        return "{}"
    chunks = []
    for name in sorted(rels):
        rows = sorted(rels[name], key=tuple_key)
        if rows:
            body = ",\n".join(
                f"{indent}    [" + ", ".join(_json_value(v) for v in row) + "]" for row in rows
            )
            chunks.append(f"{indent}  {json.dumps(name)}: [\n{body}\n{indent}  ]")
        else:
            chunks.append(f"{indent}  {json.dumps(name)}: []")
    return "{\n" + ",\n".join(chunks) + f"\n{indent}}}"


def dumps_database(db: Database) -> str:
    return _json_relations({n: db[n] for n in db}, "") + "\n"


def loads_database(text: str) -> Database:
    data = json.loads(text, parse_float=Dec, parse_int=int)
    return Database({name: [tuple(r) for r in rows] for name, rows in data.items()})


def dumps_delta(delta: Delta) -> str:
    return (
        "{\n  \"insert\": " + _json_relations(delta.insert, "  ")
        + ",\n  \"delete\": " + _json_relations(delta.delete, "  ") + "\n}\n"
    )


def loads_delta(text: str) -> Delta:
    data = json.loads(text, parse_float=Dec, parse_int=int)
    return delta_from_json(data)


def delta_from_json(data: Mapping) -> Delta:
    def rels(m: Mapping) -> dict:
        return {n: [tuple(r) for r in rows] for n, rows in (m or {}).items()}

    return Delta(rels(data.get("insert", {})), rels(data.get("delete", {})))


def read_database(path: str | Path) -> Database:
    """Read a CSV directory or a ``.json`` file."""
    path = Path(path)
    if path.is_dir():
        return read_csv_dir(path)
    return loads_database(path.read_text(encoding="utf-8"))


def write_database(db: Database, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(dumps_database(db), encoding="utf-8")
    else:
        write_csv_dir(db, path)


def jsonable(obj):
    """Plain JSON data for databases, deltas, rows and values (decimals become floats)."""
    if isinstance(obj, Database):
        return {n: [jsonable(r) for r in obj.sorted_rows(n)] for n in sorted(obj)}
    if isinstance(obj, Delta):
        return jsonable(obj.to_dict())
    if isinstance(obj, Dec):
        return float(obj)
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, (frozenset, set)):
        return [jsonable(x) for x in sorted(obj, key=tuple_key)]
    return obj
