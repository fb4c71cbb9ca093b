import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bxdatalog.datalog import Database, Schema, evaluate, parse_program
from bxdatalog.errors import SqlGenError
from bxdatalog.putback import parse_strategy
from bxdatalog.putback.derive import BxPair
from bxdatalog.putback.laws import source_corpus
from bxdatalog.sqlgen import emit_trigger, emit_view, evaluate_sql, parse_view
from conftest import bundled_pair

GOLDEN = Path(__file__).parent / "golden"

REFERENCE_VIEW = """
CREATE OR REPLACE VIEW v AS
   SELECT a FROM s1
   UNION
   SELECT a FROM s2
"""

REFERENCE_TRIGGER = """
CREATE TRIGGER v_trigger
   INSTEAD OF INSERT OR DELETE ON v
   FOR EACH ROW
   EXECUTE PROCEDURE v_proc();
"""


def squash(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip().rstrip(";")


def test_union_view_matches_reference(union_bx):
    assert squash(emit_view(union_bx.get, union_bx.put.schemas())) == squash(REFERENCE_VIEW)


def test_union_trigger_matches_reference(union_bx):
    assert squash(emit_trigger(union_bx).trigger_sql) == squash(REFERENCE_TRIGGER)


@pytest.mark.parametrize("name", ["union", "rideshare_provider", "rideshare_mediator"])
def test_golden_files(name):
    art = emit_trigger(bundled_pair(name))
    for fname, text in art.files(name).items():
        assert text == (GOLDEN / fname).read_text(), fname


def test_provider_view_shape(provider_bx):
    sql = emit_view(provider_bx.get, provider_bx.put.schemas())
    assert squash(sql).endswith(
        "SELECT vid, area, rid FROM vehicles, area_map WHERE vehicles.loc = area_map.loc")


def test_identity_view():
    get = parse_program("v(X) :- s(X).")
    assert squash(emit_view(get, {"s": Schema("s", ("a",)), "v": Schema("v", ("a",))})) == \
        "CREATE OR REPLACE VIEW v AS SELECT a FROM s"


def test_positional_attribute_fallback():
    sql = emit_view(parse_program("v(X, Y) :- s(Y, X)."))
    assert squash(sql) == "CREATE OR REPLACE VIEW v AS SELECT a2 AS a1, a1 AS a2 FROM s"


def test_provider_procedure_updates_by_vid(provider_bx):
    proc = emit_trigger(provider_bx).procedure_sql
    assert "DELETE FROM vehicles WHERE EXISTS" in proc
    assert "INSERT INTO vehicles SELECT * FROM ins_vehicles;" in proc
    assert "prov1_public_upd.vid = vehicles.vid" in proc
    assert "TG_OP = 'UPDATE'" in proc


def test_union_procedure_branches(union_bx):
    proc = emit_trigger(union_bx).procedure_sql
    assert proc.startswith("CREATE OR REPLACE FUNCTION v_proc()")
    assert "IF TG_OP = 'INSERT' THEN" in proc and "ELSIF TG_OP = 'DELETE' THEN" in proc
    assert "UPDATE" not in proc
    assert proc.count("CREATE TEMPORARY TABLE") == 4
    assert proc.rstrip().endswith("$$ LANGUAGE plpgsql;")


def test_emit_deterministic(provider_bx):
    assert emit_trigger(provider_bx) == emit_trigger(bundled_pair("rideshare_provider"))


def test_recursive_view_rejected():
    with pytest.raises(SqlGenError, match="recursive"):
        emit_view(parse_program("v(X) :- s(X).\nv(X) :- v(X), s(X)."))


def test_negation_rejected():
    with pytest.raises(SqlGenError, match="negation"):
        emit_view(parse_program("v(X) :- s(X), not t(X)."))


def test_empty_view_rejected():
    with pytest.raises(SqlGenError, match="nothing to emit"):
        emit_view(parse_program(""))


def test_empty_strategy_rejected(union_bx):
    empty = parse_strategy("view: v(a)\nsources: s1(a), s2(a)\n")
    with pytest.raises(SqlGenError, match="nothing to emit"):
        emit_trigger(BxPair(empty, union_bx.get))


def test_string_literal_escaping():
    get = parse_program("v(X) :- s(X, Y), Y = 'it\\'s'.")
    sql = emit_view(get)
    assert "'it''s'" in sql
    db = Database({"s": [(1, "it's"), (2, "its")]})
    schemas = {"s": Schema.positional("s", 2)}
    assert evaluate_sql(sql, db, schemas) == evaluate(get, db)["v"] == {(1,)}


def test_subset_parser_accepts_emitted_views(union_bx, provider_bx, mediator_bx):
    for bx in (union_bx, provider_bx, mediator_bx):
        view = parse_view(emit_trigger(bx).view_sql)
        assert view.name == bx.view


def test_subset_parser_errors():
    with pytest.raises(SqlGenError):
        parse_view("CREATE VIEW v AS SELECT a FROM s")
    with pytest.raises(SqlGenError):
        parse_view("CREATE OR REPLACE VIEW v AS SELECT a FROM s WHERE")
    with pytest.raises(SqlGenError):
        parse_view("CREATE OR REPLACE VIEW v AS SELECT a FROM s; extra")


def test_subset_ambiguous_column():
    view = parse_view("CREATE OR REPLACE VIEW v AS SELECT a FROM s, t")
    schemas = {"s": Schema("s", ("a",)), "t": Schema("t", ("a",))}
    with pytest.raises(SqlGenError, match="ambiguous"):
        evaluate_sql(view, Database({"s": [(1,)], "t": [(1,)]}), schemas)


@pytest.mark.parametrize("name", ["union", "rideshare_provider", "rideshare_mediator"])
def test_sql_oracle_agrees_with_datalog(name):
    bx = bundled_pair(name)
    schemas = bx.put.schemas()
    view = parse_view(emit_view(bx.get, schemas))
    for db in source_corpus(bx.put, 100, seed=42):
        assert evaluate_sql(view, db, schemas) == bx.view_of(db).relation(bx.view)


GENERAL = """
w(X, Z) :- s(X, Y), t(Y, Z), Z < 3, X <> 1.
w(X, X) :- s(X, X).
w(X, Y) :- s(X, Y), s(Y, X), Y <= X.
w(X, C) :- t(X, _), C = 2.
"""

_rel = st.frozensets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8)


@settings(max_examples=100, deadline=None)
@given(_rel, _rel)
def test_sql_oracle_general_views(s, t):
    get = parse_program(GENERAL)
    schemas = {"s": Schema("s", ("a", "b")), "t": Schema("t", ("b", "c")),
               "w": Schema("w", ("x", "y"))}
    db = Database({"s": s, "t": t})
    sql = emit_view(get, schemas)
    assert evaluate_sql(sql, db, schemas) == evaluate(get, db)["w"]
