import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bxdatalog.datalog import Database, Delta, apply_delta, diff, evaluate
from bxdatalog.errors import DeltaError
from bxdatalog.incremental import build_plan, check_contracts, inc_get, inc_put
from bxdatalog.putback import BUNDLED_STRATEGIES
from conftest import bundled_pair
from test_engine import edbs, programs


def test_union_insert(union_bx):
    src = Database({"s1": [(1,)], "s2": []})
    d = inc_get(union_bx, src, Delta({"s1": [(2,)]}))
    assert d == Delta({"v": [(2,)]})


def test_union_delete_still_supported(union_bx):
    src = Database({"s1": [(1,)], "s2": [(1,)]})
    assert inc_get(union_bx, src, Delta(delete={"s1": [(1,)]})).is_empty()


def test_union_delete_last_support(union_bx):
    src = Database({"s1": [(1,)], "s2": [(2,)]})
    assert inc_get(union_bx, src, Delta(delete={"s1": [(1,)]})) == Delta(delete={"v": [(1,)]})


def test_provider_vehicle_insert(provider_bx):
    src = Database({"vehicles": [], "area_map": [("new_loc", "area")]})
    d = inc_get(provider_bx, src, Delta({"vehicles": [("new_vid", "new_loc", "new_rid")]}))
    assert d == Delta({"prov1_public": [("new_vid", "area", "new_rid")]})


def test_provider_reference_change(provider_bx):
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    d = inc_get(provider_bx, src, Delta({"area_map": [("l1", "a2")]}, {"area_map": [("l1", "a1")]}))
    assert d == Delta({"prov1_public": [("v1", "a2", "r0")]}, {"prov1_public": [("v1", "a1", "r0")]})


def test_inc_get_empty_delta(union_bx, provider_bx):
    assert inc_get(union_bx, Database({"s1": [(1,)], "s2": []}), Delta()).is_empty()
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    assert inc_get(provider_bx, src, Delta()).is_empty()


def test_inc_get_requires_strict_delta(union_bx):
    with pytest.raises(DeltaError):
        inc_get(union_bx, Database({"s1": [(1,)], "s2": []}), Delta({"s1": [(1,)]}))


def test_inc_put_rid_change(provider_bx):
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    view = provider_bx.view_of(src)
    u = Delta({"prov1_public": [("v1", "a1", "r9")]}, {"prov1_public": [("v1", "a1", "r0")]})
    ds = inc_put(provider_bx, src, view, u)
    assert ds == Delta({"vehicles": [("v1", "l1", "r9")]}, {"vehicles": [("v1", "l1", "r0")]})


def test_inc_put_empty_view_delta(provider_bx, union_bx):
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    assert inc_put(provider_bx, src, provider_bx.view_of(src), Delta()).is_empty()
    s = Database({"s1": [(1,)], "s2": [(2,)]})
    assert inc_put(union_bx, s, union_bx.view_of(s), Delta()).is_empty()


def test_inc_put_union_insert(union_bx):
    s = Database({"s1": [(1,)], "s2": [(2,)]})
    ds = inc_put(union_bx, s, union_bx.view_of(s), Delta({"v": [(3,)]}))
    assert ds == Delta({"s1": [(3,)]})


@pytest.mark.parametrize("name", BUNDLED_STRATEGIES)
def test_contracts_small(name):
    rep = check_contracts(bundled_pair(name), cases=100, seed=5)
    assert rep.ok, rep.first_failure
    assert rep.get_checked == 100 and rep.put_checked == 100


def test_contract_report_json():
    d = check_contracts(bundled_pair("union"), cases=10).to_dict(timings=False)
    assert d == {"strategy": "union", "seed": 42, "cases": 10,
                 "get": {"checked": 10, "failures": 0}, "put": {"checked": 10, "failures": 0}}


_edb_rows = st.tuples(st.integers(0, 3), st.integers(0, 3))


@st.composite
def edb_changes(draw):
    before = draw(edbs)
    after = {k: set(v) for k, v in before.items()}
    for _ in range(draw(st.integers(0, 3))):
        rel = draw(st.sampled_from(["e0", "e1"]))
        row = draw(_edb_rows)
        if row in after[rel]:
            after[rel].discard(row)
        else:
            after[rel].add(row)
    return Database(before), Database(after)


@settings(max_examples=150, deadline=None)
@given(programs(), edb_changes())
def test_propagation_equals_recompute(program, change):
    before, after = change
    old = evaluate(program, before)
    delta, new = build_plan(program).propagate(old, diff(after, before))
    full = evaluate(program, after)
    assert new == full
    for p in program.idb():
        assert delta.inserted(p) == full.relation(p) - old.relation(p)
        assert delta.deleted(p) == old.relation(p) - full.relation(p)


@settings(max_examples=50, deadline=None)
@given(programs(), edbs)
def test_propagation_of_empty_delta(program, edb):
    old = evaluate(program, Database(edb))
    delta, new = build_plan(program).propagate(old, Delta())
    assert delta.is_empty() and new == old
