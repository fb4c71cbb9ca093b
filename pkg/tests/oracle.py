"""Deliberately naive reference implementations used as test oracles.

Nothing here shares code with the engine: stratification is found by
relaxation, and each stratum is iterated to a fixpoint by brute-force
backtracking over the body in a safe order.
"""

from __future__ import annotations

from bxdatalog.datalog.ast import Anon, Const, Program, Var


def naive_strata(program: Program) -> list[set[str]]:
    preds = set()
    for r in program.rules:
        preds.add(r.head.key)
        preds.update(l.key for l in r.body if not l.is_builtin)
    level = {p: 0 for p in preds}
    for _ in range(len(preds) + 2):
        changed = False
        for r in program.rules:
            h = r.head.key
            for l in r.body:
                if l.is_builtin:
                    continue
                need = level[l.key] + (1 if l.negated else 0)
                if level[h] < need:
                    level[h] = need
                    changed = True
        if not changed:
            break
    else:
        raise ValueError("not stratifiable")
    if any(v > len(preds) for v in level.values()):
        raise ValueError("not stratifiable")
    out: dict[int, set] = {}
    for p, v in level.items():
        out.setdefault(v, set()).add(p)
    return [out[k] for k in sorted(out)]


def _value(t, env):
    return t.value if isinstance(t, Const) else env[t.name]


def _bound(t, env) -> bool:
    return isinstance(t, Const) or (isinstance(t, Var) and t.name in env)


def _solve(body, db, env):
    if not body:
        yield env
        return
    # pick the first literal that can run: positive atoms always, the rest once bound
    for idx, lit in enumerate(body):
        if not lit.is_builtin and not lit.negated:
            break
        args = lit.args
        if all(isinstance(a, Anon) or _bound(a, env) for a in args):
            break
        if lit.is_builtin and lit.pred == "=" and (_bound(args[0], env) or _bound(args[1], env)):
            break
    else:
        raise ValueError("unsafe body")
    rest = body[:idx] + body[idx + 1:]
    if lit.is_builtin:
        a, b = lit.args
        if lit.pred == "=" and not _bound(a, env):
            yield from _solve(rest, db, {**env, a.name: _value(b, env)})
            return
        if lit.pred == "=" and not _bound(b, env):
            yield from _solve(rest, db, {**env, b.name: _value(a, env)})
            return
        x, y = _value(a, env), _value(b, env)
        ok = {"=": x == y, "<>": x != y, "<": x < y, "<=": x <= y}[lit.pred]
        if ok:
            yield from _solve(rest, db, env)
        return
    rel = db.get(lit.key, set())
    if lit.negated:
        for row in rel:
            if all(isinstance(a, Anon) or row[i] == _value(a, env) for i, a in enumerate(lit.args)):
                return
        yield from _solve(rest, db, env)
        return
    for row in rel:
        e = dict(env)
        ok = True
        for i, a in enumerate(lit.args):
            if isinstance(a, Anon):
                continue
            if isinstance(a, Const):
                ok = row[i] == a.value
            elif a.name in e:
                ok = e[a.name] == row[i]
            else:
                e[a.name] = row[i]
            if not ok:
                break
        if ok:
            yield from _solve(rest, db, e)


def naive_evaluate(program: Program, edb: dict[str, set]) -> dict[str, set]:
    db = {k: set(v) for k, v in edb.items()}
    for stratum in naive_strata(program):
        rules = [r for r in program.rules if r.head.key in stratum]
        while True:
            added = False
            for r in rules:
                for env in list(_solve(list(r.body), db, {})):
                    row = tuple(_value(t, env) for t in r.head.args)
                    target = db.setdefault(r.head.key, set())
                    if row not in target:
                        target.add(row)
                        added = True
            if not added:
                break
    for r in program.rules:
        db.setdefault(r.head.key, set())
    return db
