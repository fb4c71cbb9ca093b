import pytest

from bxdatalog.datalog import Database, Delta, normalize, parse_program
from bxdatalog.datalog.ast import Program
from bxdatalog.errors import DeltaError, ParseError, DerivationError, StrategyError
from bxdatalog.putback import (
    BUNDLED_STRATEGIES, derive_get, load_strategy, parse_strategy, put_apply, put_eval,
)
from bxdatalog.putback.derive import timed_derive
from conftest import bundled_pair

UNION = load_strategy("bundled:union")
PROVIDER = load_strategy("bundled:rideshare_provider")
MEDIATOR = load_strategy("bundled:rideshare_mediator")

HEADER = "view: v(a)\nsources: s1(a), s2(a)\n"


def union_db(s1, s2, v=None):
    rels = {"s1": [(x,) for x in s1], "s2": [(x,) for x in s2]}
    if v is not None:
        rels["v"] = [(x,) for x in v]
    return Database(rels)


def test_put_eval_union_example():
    d = put_eval(UNION, union_db("a", "b"), union_db("", "", "ac"))
    assert d.deleted("s2") == {("b",)}
    assert d.inserted("s1") == {("c",)}
    assert d.deleted("s1") == frozenset()


def test_put_eval_unchanged_view():
    src = union_db("ab", "bc")
    assert put_eval(UNION, src, union_db("", "", "abc")).is_empty()


def test_put_eval_provider_rid_change():
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    view = Database({"prov1_public": [("v1", "a1", "r9")]})
    d = put_eval(PROVIDER, src, view)
    assert d.deleted("vehicles") == {("v1", "l1", "r0")}
    assert d.inserted("vehicles") == {("v1", "l1", "r9")}
    assert "area_map" not in d.relations()


def test_put_apply_union_example():
    out = put_apply(UNION, union_db("a", "b"), union_db("", "", "ac"))
    assert out["s1"] == {("a",), ("c",)} and out["s2"] == frozenset()


def test_put_apply_provider_booking():
    src = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    out = put_apply(PROVIDER, src, Database({"prov1_public": [("v1", "a1", "r9")]}))
    assert out["vehicles"] == {("v1", "l1", "r9")}
    assert out["area_map"] == src["area_map"]


def test_put_eval_inconsistent_delta():
    s = parse_strategy(HEADER + "-s1(X) :- s1(X), not v(X).\n+s1(X) :- s1(X), not v(X).")
    with pytest.raises(DeltaError) as exc:
        put_eval(s, union_db("a", ""), union_db("", "", ""))
    assert exc.value.relation == "s1" and exc.value.row == ("a",)


def test_strategy_rejects_view_delta():
    with pytest.raises(StrategyError):
        parse_strategy(HEADER + "+v(X) :- s1(X).")


def test_strategy_rejects_reference_delta():
    with pytest.raises(StrategyError):
        parse_strategy("view: v(a)\nsources: s(a)\nreferences: r(a)\n+r(X) :- v(X), not r(X).")


def test_strategy_rejects_plain_head():
    with pytest.raises(StrategyError):
        parse_strategy(HEADER + "s1(X) :- v(X).")


def test_strategy_rejects_undeclared_body():
    with pytest.raises(StrategyError):
        parse_strategy(HEADER + "+s1(X) :- v(X), not t(X).")


def test_strategy_requires_view_header():
    with pytest.raises(ParseError):
        parse_strategy("sources: s1(a)\n-s1(X) :- s1(X).")


def test_strategy_update_cannot_touch_key():
    with pytest.raises(StrategyError):
        parse_strategy("view: v(*k, a)\nsources: s(*k, a)\nedits: update(k)\n"
                       "-s(K, A) :- s(K, A), not v(K, A).")


def test_strategy_text_round_trip():
    for name in BUNDLED_STRATEGIES:
        s = load_strategy(f"bundled:{name}")
        again = parse_strategy(s.to_text(), s.name)
        assert again.program.rules == s.program.rules
        assert again.schemas() == s.schemas()
        assert again.edits == s.edits


def test_derive_union():
    bx, secs = timed_derive(UNION)
    want = parse_program("v(X) :- s1(X).\nv(X) :- s2(X).")
    assert normalize(bx.get) == normalize(want)
    assert len(bx.checks) == 1 and bx.checks[0].ok
    assert secs < 1.0


def test_derive_mediator():
    bx = derive_get(MEDIATOR)
    want = parse_program("prov1_public(V, A, R) :- all_vehicles(C, V, A, R), C = 1.")
    assert normalize(bx.get) == normalize(want)


def test_derive_provider():
    bx = derive_get(PROVIDER)
    want = parse_program("prov1_public(V, A, R) :- vehicles(V, L, R), area_map(L, A).")
    assert normalize(bx.get) == normalize(want)


def test_derive_guarded_provider_same_view():
    bx = derive_get(load_strategy("bundled:rideshare_provider_guarded"))
    assert normalize(bx.get) == normalize(derive_get(PROVIDER).get)


def test_derive_union_variants_share_get():
    base = normalize(bundled_pair("union").get)
    assert normalize(bundled_pair("union_s2").get) == base
    assert normalize(bundled_pair("union_both").get) == base


def test_derive_impossible():
    s = parse_strategy(HEADER + "+s1(X) :- v(X), not s1(X), not s2(X).")
    with pytest.raises(DerivationError, match="derivation impossible"):
        derive_get(s)


def test_derive_unsupported_mixed_polarity():
    s = parse_strategy("view: v(a, b)\nsources: s(a, b)\n"
                       "-s(X, Y) :- s(X, Y), v(X, X), not v(X, Y).")
    with pytest.raises(DerivationError, match="unsupported form"):
        derive_get(s)


def test_derive_unsupported_two_negations():
    s = parse_strategy("view: v(a, b)\nsources: s(a, b)\n"
                       "-s(X, Y) :- s(X, Y), not v(X, Y), not v(Y, X).")
    with pytest.raises(DerivationError, match="unsupported form"):
        derive_get(s)


def test_derive_residual_counterexample():
    # Insertion into s1 without the s2 guard: the residual "v, not s1, s2"
    # is satisfiable under v = s1 ∪ s2.
    s = parse_strategy(HEADER + "-s1(X) :- s1(X), not v(X).\n-s2(X) :- s2(X), not v(X).\n"
                       "+s1(X) :- v(X), not s1(X).")
    with pytest.raises(DerivationError) as exc:
        derive_get(s)
    chk = exc.value.counterexample
    assert chk is not None and not chk.ok
    x = chk.witness["X"]
    db = chk.counterexample
    assert (x,) in db["s2"] and (x,) not in db["s1"]


def test_derive_deterministic_modulo_rule_order():
    rev = UNION.with_program(Program(tuple(reversed(UNION.program.rules)), UNION.program.schemas))
    assert normalize(derive_get(rev).get) == normalize(derive_get(UNION).get)
    assert derive_get(UNION).get == derive_get(UNION).get


def test_residual_check_report():
    d = bundled_pair("union").checks[0].to_dict()
    assert d["status"] == "pass" and d["seed"] == 42 and d["bound"] == 3
    assert d["exhaustive"] is True


@pytest.mark.parametrize("name", BUNDLED_STRATEGIES)
def test_bundled_derive_under_a_second(name):
    _, secs = timed_derive(load_strategy(f"bundled:{name}"))
    assert secs < 1.0
