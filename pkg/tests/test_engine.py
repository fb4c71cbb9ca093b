import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bxdatalog.datalog import Database, Dec, evaluate, parse_program, query, stratify
from bxdatalog.datalog.ast import Program
from bxdatalog.errors import EvaluationError, StratificationError
from oracle import naive_evaluate, naive_strata

UNION_GET = "v(X) :- s1(X).\nv(X) :- s2(X)."


def _check_strata(program: Program, strata):
    level = {p: i for i, s in enumerate(strata) for p in s}
    for r in program.rules:
        for l in r.body:
            if l.is_builtin:
                continue
            if l.negated:
                assert level[r.head.key] > level[l.key]
            else:
                assert level[r.head.key] >= level[l.key]


def test_stratify_union_view():
    p = parse_program(UNION_GET)
    strata = stratify(p)
    assert strata in ([{"s1", "s2"}, {"v"}], [{"s1", "s2", "v"}])
    _check_strata(p, strata)


def test_stratify_self_negation():
    with pytest.raises(StratificationError) as exc:
        stratify(parse_program("p(X) :- q(X), not p(X)."))
    assert exc.value.cycle[0] == exc.value.cycle[-1] == "p"


def test_stratify_negative_cycle_reports_cycle():
    p = parse_program("p(X) :- e(X), not q(X).\nq(X) :- e(X), p(X).")
    with pytest.raises(StratificationError) as exc:
        stratify(p)
    assert set(exc.value.cycle) == {"p", "q"}


def test_stratify_empty_program():
    assert stratify(parse_program("")) == []


def test_stratify_negation_raises_level():
    p = parse_program("a(X) :- e(X).\nb(X) :- e(X), not a(X).\nc(X) :- b(X), not a(X).")
    strata = stratify(p)
    _check_strata(p, strata)
    assert strata == naive_strata(p)


def test_union_evaluation():
    p = parse_program(UNION_GET)
    out = evaluate(p, Database({"s1": [(1,), (2,)], "s2": [(2,), (3,)]}))
    assert out["v"] == {(1,), (2,), (3,)}


def test_union_empty():
    p = parse_program(UNION_GET)
    out = evaluate(p, Database({"s1": [], "s2": []}))
    assert out["v"] == frozenset()


def test_provider_join():
    p = parse_program("prov1_public(V, A, R) :- vehicles(V, L, R), area_map(L, A).")
    db = Database({"vehicles": [("v1", "l1", "r0")], "area_map": [("l1", "a1")]})
    assert evaluate(p, db)["prov1_public"] == {("v1", "a1", "r0")}


def test_input_not_mutated():
    p = parse_program(UNION_GET)
    db = Database({"s1": [(1,)], "s2": []})
    before = dict(db)
    evaluate(p, db)
    assert dict(db) == before and "v" not in db


def test_unknown_predicate_is_empty():
    p = parse_program("v(X) :- s1(X), not missing(X).")
    out = evaluate(p, Database({"s1": [(1,)]}))
    assert out["v"] == {(1,)}
    assert evaluate(parse_program("v(X) :- nothing(X)."), Database())["v"] == frozenset()


def test_cross_kind_comparison_is_an_error():
    p = parse_program("v(X) :- s(X), X < 3.")
    with pytest.raises(EvaluationError) as exc:
        evaluate(p, Database({"s": [("a",)]}))
    assert "'a'" in str(exc.value)


@pytest.mark.parametrize("text", [
    "v(X) :- s(X), t(Y), X = Y.",
    "v(X) :- t(Y), X = Y, s(X).",
    "v(X) :- s(X), X = Y, t(Y).",
])
def test_cross_kind_equality_builtin_is_an_error_in_any_body_order(text):
    with pytest.raises(EvaluationError):
        evaluate(parse_program(text), Database({"s": [(1,)], "t": [("a",)]}))


def test_equality_still_binds_unscanned_variables():
    p = parse_program("v(X, C) :- s(X), C = 1.")
    assert evaluate(p, Database({"s": [("a",)]}))["v"] == {("a", 1)}


def test_cross_kind_equality_is_false_for_relations():
    p = parse_program("v(X) :- s(X), t(X).")
    out = evaluate(p, Database({"s": [(1,)], "t": [(Dec("1"),)]}))
    assert out["v"] == frozenset()


def test_decimal_comparison():
    p = parse_program("v(X) :- s(X), X <= 1.5.")
    out = evaluate(p, Database({"s": [(Dec("1.2"),), (Dec("2.0"),)]}))
    assert out["v"] == {(Dec("1.2"),)}


def test_transitive_closure():
    p = parse_program("t(X, Y) :- e(X, Y).\nt(X, Z) :- t(X, Y), e(Y, Z).")
    out = evaluate(p, Database({"e": [(1, 2), (2, 3), (3, 4)]}))
    assert out["t"] == {(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4)}


def test_duplicate_rules_tolerated():
    p = parse_program("v(X) :- s(X).\nv(X) :- s(X).")
    assert evaluate(p, Database({"s": [(1,)]}))["v"] == {(1,)}


def test_query_bindings():
    p = parse_program("x(A) :- s(A, B), B = 2.")
    rows = query(p.rules[0].body, Database({"s": [(1, 2), (3, 4)]}))
    assert rows == [{"A": 1, "B": 2}]


# random stratified programs for oracle comparison

_EDB = ("e0", "e1")
_IDB = ("p0", "p1", "p2")
_VARS = ("X", "Y", "Z")


@st.composite
def programs(draw, allow_negation=True):
    rules = []
    for i, head in enumerate(_IDB):
        for _ in range(draw(st.integers(1, 2))):
            usable = list(_EDB) + list(_IDB[: i + 1])
            n = draw(st.integers(1, 3))
            pos = [(draw(st.sampled_from(usable)),
                    [draw(st.sampled_from(_VARS + ("1",))) for _ in range(2)]) for _ in range(n)]
            bound = sorted({a for _, args in pos for a in args if a in _VARS})
            if not bound:
                pos[0][1][0] = "X"
                bound = ["X"]
            extra = []
            if allow_negation and draw(st.booleans()):
                neg = draw(st.sampled_from(list(_EDB) + list(_IDB[:i])))
                extra.append(f"not {neg}({draw(st.sampled_from(bound))}, {draw(st.sampled_from(bound))})")
            if draw(st.booleans()):
                op = draw(st.sampled_from(["<", "<=", "<>", "="]))
                extra.append(f"{draw(st.sampled_from(bound))} {op} {draw(st.sampled_from(bound + ['2']))}")
            head_args = [draw(st.sampled_from(bound)) for _ in range(2)]
            body = [f"{p}({', '.join(a)})" for p, a in pos] + extra
            rules.append(f"{head}({', '.join(head_args)}) :- {', '.join(body)}.")
    return parse_program("\n".join(rules))


_pairs = st.frozensets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8)
edbs = st.fixed_dictionaries({"e0": _pairs, "e1": _pairs})


@settings(max_examples=150, deadline=None)
@given(programs(), edbs)
def test_semi_naive_equals_naive(program, edb):
    got = evaluate(program, Database(edb))
    want = naive_evaluate(program, edb)
    for p in _IDB:
        assert got.relation(p) == want.get(p, set()), p


@settings(max_examples=100, deadline=None)
@given(programs())
def test_strata_conditions(program):
    _check_strata(program, stratify(program))


@settings(max_examples=100, deadline=None)
@given(programs(), edbs)
def test_evaluation_idempotent(program, edb):
    once = evaluate(program, Database(edb))
    assert evaluate(program, once) == once


@settings(max_examples=100, deadline=None)
@given(programs(allow_negation=False), edbs, edbs)
def test_positive_programs_monotone(program, a, b):
    small = evaluate(program, Database(a))
    big = evaluate(program, Database({k: a[k] | b[k] for k in a}))
    for p in _IDB:
        assert small.relation(p) <= big.relation(p)


@settings(max_examples=60, deadline=None)
@given(programs(), edbs, st.randoms(use_true_random=False))
def test_rule_order_irrelevant(program, edb, rnd):
    rules = list(program.rules)
    rnd.shuffle(rules)
    shuffled = Program(tuple(rules), program.schemas)
    assert evaluate(shuffled, Database(edb)) == evaluate(program, Database(edb))
