"""Command-line interface.

Exit codes: 0 success, 1 law or derivation failure, 2 invalid input
(syntax, schema, strategy or topology errors), 3 unreadable files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from .datalog.database import Database
from .datalog.engine import evaluate
from .datalog.io import jsonable, read_database
from .datalog.parser import parse_program
from .datalog.stratify import stratify
from .errors import BxError, DerivationError, SqlGenError
from .putback.derive import BxPair, derive_get
from .putback.laws import run_law_suite
from .putback.mutations import MUTATIONS, mutation
from .putback.strategy import load_strategy, resolve_path

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_FILE = 3

DEFAULT_SEED = 42
DEFAULT_BOUND = 3


def _dump(data: object) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _derive(args) -> BxPair:
    strategy = load_strategy(args.strategy)
    return derive_get(strategy, bound=args.bound, seed=args.seed, cap=args.cap)


def cmd_check(args) -> int:
    s = load_strategy(args.strategy)
    strata = [sorted(x) for x in stratify(s.program)]
    if args.format == "json":
        _write(_dump({
            "strategy": s.name, "view": str(s.schema(s.view)),
            "sources": [str(s.schema(x)) for x in s.sources],
            "references": [str(s.schema(x)) for x in s.references],
            "edits": str(s.edits), "rules": [str(r) for r in s.program.rules],
            "strata": strata,
        }), None)
    else:
        print(f"{s.name}: ok")
        print(f"view: {s.schema(s.view)}")
        print("sources: " + ", ".join(str(s.schema(x)) for x in s.sources))
        if s.references:
            print("references: " + ", ".join(str(s.schema(x)) for x in s.references))
        print(f"edits: {s.edits}")
        print(f"rules: {len(s.program.rules)}")
        print("strata: " + " | ".join(", ".join(x) for x in strata))
    return EXIT_OK


def cmd_derive(args) -> int:
    strategy = load_strategy(args.strategy)
    try:
        bx = derive_get(strategy, bound=args.bound, seed=args.seed, cap=args.cap)
    except DerivationError as exc:
        if args.format == "json":
            out = {"strategy": strategy.name, "status": "fail", "error": str(exc)}
            chk = exc.counterexample
            if chk is not None and hasattr(chk, "to_dict"):
                out["counterexample"] = chk.to_dict()
            _write(_dump(out), None)
        else:
            print(f"derivation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    checks = [c.to_dict() for c in bx.checks]
    if args.format == "json":
        _write(_dump({"strategy": strategy.name, "status": "pass", "view": bx.view,
                      "get": [str(r) for r in bx.get.rules], "residuals": checks,
                      "seed": args.seed, "bound": args.bound}), None)
    else:
        print(f"% view definition of {bx.view} derived from {strategy.name}")
        for r in bx.get.rules:
            print(r)
        for c in bx.checks:
            how = "exhaustive" if c.exhaustive else "sampled"
            print(f"% residual {str(c.constraint).rstrip('.')}: {'pass' if c.ok else 'fail'} "
                  f"({c.instances} instances, {how}, bound {c.bound}, seed {c.seed})")
    return EXIT_OK


def cmd_eval(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    db = read_database(args.database)
    model = evaluate(program, db)
    names = args.relations.split(",") if args.relations else sorted(program.idb())
    out = Database._trusted({n: model.relation(n) for n in names})
    if args.format == "json":
        _write(_dump(jsonable(out)), None)
    else:
        for n in names:
            for row in out.sorted_rows(n):
                print(f"{n}(" + ", ".join(map(str, row)) + ")")
    return EXIT_OK


def cmd_lawtest(args) -> int:
    if args.mutation:
        m = mutation(args.mutation)
        bx = m.pair(bound=args.bound, seed=args.seed, cap=args.cap)
    else:
        if not args.strategy:
            raise BxError("lawtest needs a strategy file or --mutation")
        strategy = load_strategy(args.strategy)
        if args.get:
            get = parse_program(Path(args.get).read_text(encoding="utf-8"), strategy.schemas())
            bx = BxPair(strategy, get)
        else:
            try:
                bx = derive_get(strategy, bound=args.bound, seed=args.seed, cap=args.cap)
            except DerivationError as exc:
                _write(_dump({"strategy": strategy.name, "seed": args.seed,
                              "corpus_size": args.corpus_size,
                              "summary": {"derive": "fail"}, "error": str(exc)}), None)
                return EXIT_FAIL
    report = run_law_suite(bx, corpus_size=args.corpus_size, seed=args.seed,
                           domain_size=args.domain_size)
    if args.format == "json":
        _write(_dump(report.to_dict()), None)
    else:
        for o in report.outcomes:
            print(f"{o.law}: {o.status} ({o.checked}/{o.corpus_size} checked, seed {o.seed})")
            if o.counterexample is not None:
                print("  counterexample: " + json.dumps(o.counterexample.to_dict(), sort_keys=True))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    from .dejima.network import load_network
    from .dejima.scenario import SCRIPT, TOPOLOGY, load_script, run_script

    net = load_network(args.topology or TOPOLOGY)
    txns = load_script(args.script or SCRIPT)
    records = run_script(net, txns)
    log = net.log_text()
    state = net.dump_state()
    if args.out:
        out = Path(args.out)
        _write(log, out / "txn_log.jsonl")
        _write(state, out / "final_state.json")
        committed = sum(r.result.committed for r in records)
        print(f"{len(records)} transactions: {committed} committed, "
              f"{len(records) - committed} aborted")
    else:
        sys.stdout.write(log)
        sys.stdout.write(state)
    unexpected = [r for r in records if r.result.status != r.txn.expect or not r.consistent]
    for r in unexpected:
        print(f"{r.txn.txn_id}: expected {r.txn.expect}, got {r.result.status}"
              f"{'' if r.consistent else ' (links inconsistent)'}", file=sys.stderr)
    return EXIT_FAIL if unexpected else EXIT_OK


def cmd_emit(args) -> int:
    from .sqlgen.emit import emit_trigger

    bx = _derive(args)
    art = emit_trigger(bx)
    name = args.name or bx.view
    if args.out:
        for fname, text in art.files(name).items():
            _write(text, Path(args.out) / fname)
            print(Path(args.out) / fname)
    else:
        sys.stdout.write(art.view_sql + "\n" + art.trigger_sql + "\n" + art.procedure_sql)
    return EXIT_OK


def cmd_bench_incremental(args) -> int:
    from .incremental import check_contracts

    ok = True
    reports = []
    for path in args.strategies:
        bx = derive_get(load_strategy(path), bound=args.bound, seed=args.seed, cap=args.cap)
        rep = check_contracts(bx, cases=args.cases, seed=args.seed)
        ok &= rep.ok
        reports.append(rep)
    if args.format == "json":
        _write(_dump([r.to_dict() for r in reports]), None)
    else:
        for r in reports:
            print(f"{r.strategy}: get {r.get_checked - r.get_failures}/{r.get_checked} equal "
                  f"(incremental {r.inc_get_seconds:.3f}s, recompute {r.full_get_seconds:.3f}s); "
                  f"put {r.put_checked - r.put_failures}/{r.put_checked} equal "
                  f"(incremental {r.inc_put_seconds:.3f}s, recompute {r.full_put_seconds:.3f}s)")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default 42)")
    common.add_argument("--bound", type=int, default=DEFAULT_BOUND,
                        help="values per column for residual checks (default 3)")
    common.add_argument("--cap", type=int, default=10_000, help="max residual-check instances")
    common.add_argument("--format", choices=("json", "text"), default="text")

    p = argparse.ArgumentParser(prog="bxdatalog", description="Putback-based updatable views in Datalog.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse and validate a strategy")
    c.add_argument("strategy")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("derive", parents=[common], help="derive the view definition of a strategy")
    c.add_argument("strategy")
    c.set_defaults(func=cmd_derive)

    c = sub.add_parser("eval", parents=[common], help="evaluate a Datalog program over a database")
    c.add_argument("program")
    c.add_argument("database", help="CSV directory or .json file")
    c.add_argument("--relations", help="comma-separated relations to print (default: derived ones)")
    c.set_defaults(func=cmd_eval)

    c = sub.add_parser("lawtest", parents=[common], help="check GetPut and PutGet on a seeded corpus")
    c.add_argument("strategy", nargs="?")
    c.add_argument("--corpus-size", type=int, default=500)
    c.add_argument("--domain-size", type=int, default=4)
    c.add_argument("--get", help="use this view definition instead of deriving one")
    c.add_argument("--mutation", choices=[m.name for m in MUTATIONS],
                   help="test a bundled mutated strategy against the original view definition")
    c.set_defaults(func=cmd_lawtest)

    c = sub.add_parser("simulate", parents=[common], help="run a transaction script on a Dejima network")
    c.add_argument("topology", nargs="?", help="topology JSON (default: bundled ride-sharing)")
    c.add_argument("script", nargs="?", help="script JSON (default: bundled ride-sharing script)")
    c.add_argument("--out", help="directory for txn_log.jsonl and final_state.json")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("emit", parents=[common], help="emit SQL view, trigger and procedure")
    c.add_argument("strategy")
    c.add_argument("--out", help="directory for <name>.view.sql, .trigger.sql, .proc.sql")
    c.add_argument("--name", help="file name stem (default: the view name)")
    c.set_defaults(func=cmd_emit)

    c = sub.add_parser("bench-incremental", parents=[common],
                       help="compare incremental get/put with recomputation")
    c.add_argument("strategies", nargs="+")
    c.add_argument("--cases", type=int, default=500)
    c.set_defaults(func=cmd_bench_incremental)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (DerivationError, SqlGenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (BxError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
