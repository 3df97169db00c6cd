"""Command-line entry point: ``pathrewrite <command> ...``.

Exit status is 0 for a positive answer (EXISTS, EQUIVALENT, or plain
success), 1 for a negative one and 2 for bad input or usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import bench
from .chase import chase, format_fact
from .instances import InputError, load_instance, load_json
from .languages import automaton_words
from .planlang import build_plan_automaton
from .plans import PlanError, plan_from_json, plan_to_json
from .rewriter import DEFAULT_MAX_FILTERS, RewritingProblem
from .schema import SchemaError, format_word
from .verifier import verify_plan

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _problem(path) -> tuple:
    inst = load_instance(path)
    return inst, RewritingProblem(inst.functions, inst.uids, inst.query)


def cmd_rewrite(args, out) -> int:
    inst, problem = _problem(args.instance)
    if not problem.exists():
        print("NONE", file=out)
        return EXIT_NEGATIVE
    print("EXISTS", file=out)
    if args.enumerate:
        plans = problem.plans(args.max_word_length, args.max_plans, args.max_filters)
        for plan in plans:
            print(json.dumps(plan_to_json(plan)), file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    inst, _ = _problem(args.instance)
    plan = plan_from_json(load_json(args.plan), inst.functions_by_name, inst.query.input_constant)
    verdict = verify_plan(plan, inst.functions, inst.uids, inst.query)
    print(verdict.reason, file=out)
    detail = {
        "equivalent": verdict.equivalent,
        "reason": verdict.reason,
        "word": None if verdict.word is None else format_word(verdict.word),
        "extracted": verdict.extracted,
        "checked_plan": plan_to_json(verdict.checked_plan),
    }
    print(json.dumps(detail), file=out)
    return EXIT_OK if verdict.equivalent else EXIT_NEGATIVE


def cmd_grammar(args, out) -> int:
    _, problem = _problem(args.instance)
    print(problem.grammar.dump(), file=out)
    return EXIT_OK


def cmd_planlang(args, out) -> int:
    _, problem = _problem(args.instance)
    print("function\tposition\tword\tfinal", file=out)
    for seg in problem.segments:
        print(f"{seg.function.name}\t{seg.position}\t{format_word(seg.word)}\t{str(seg.final).lower()}", file=out)
    print("", file=out)
    for w in automaton_words(problem.automaton, args.max_length, args.max_words):
        print(format_word(w), file=out)
    return EXIT_OK


def cmd_chase(args, out) -> int:
    inst, _ = _problem(args.instance)
    a = inst.query.input_constant
    b = "b" if a != "b" else "b0"
    result = chase(inst.query.relation, inst.uids, args.depth, a, b)
    for fact in result.forward_facts():
        print(format_fact(fact), file=out)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    if args.instances < 1:
        raise UsageError("--instances must be at least 1")
    if args.relations < 1 or args.functions < 0 or args.max_body < 1:
        raise UsageError("--relations and --max-body must be positive, --functions non-negative")
    if not 0.0 <= args.p_exist <= 1.0:
        raise UsageError("--p-exist must lie in [0, 1]")
    default = bench.SWEEPS[args.sweep]
    values = default.values
    if args.values:
        cast = float if args.sweep == "p" else int
        try:
            values = tuple(cast(v) for v in args.values.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --values: {exc}") from exc
        if args.sweep == "p" and any(not 0.0 <= v <= 1.0 for v in values):
            raise UsageError("p values must lie in [0, 1]")
        if args.sweep != "p" and any(v < (1 if args.sweep == "relations" else 0) for v in values):
            raise UsageError("sweep values out of range")
    sweep = bench.Sweep(
        args.sweep,
        values,
        n_relations=args.relations,
        n_functions=args.functions,
        p_existential=args.p_exist,
        max_body=args.max_body,
        include_inverse=args.include_inverse,
    )
    rows = bench.run_experiment(sweep, args.instances, args.seed)
    bench.write_csv(rows, out)
    if args.metadata:
        with open(args.metadata, "w") as fh:
            bench.write_metadata(sweep, args.instances, args.seed, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathrewrite", description="Equivalent rewritings of atomic queries with path views.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rewrite", help="decide whether an equivalent rewriting exists")
    p.add_argument("instance")
    p.add_argument("--enumerate", action="store_true", help="also print plans as JSON lines")
    p.add_argument("--max-plans", type=int, default=10)
    p.add_argument("--max-word-length", type=int, default=None)
    p.add_argument("--max-filters", type=int, default=DEFAULT_MAX_FILTERS)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("verify", help="check one plan for equivalence")
    p.add_argument("instance")
    p.add_argument("plan")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("grammar", help="print the forward-backward grammar")
    p.add_argument("instance")
    p.set_defaults(func=cmd_grammar)

    p = sub.add_parser("planlang", help="print plan segments and skeleton words")
    p.add_argument("instance")
    p.add_argument("--max-length", type=int, default=8)
    p.add_argument("--max-words", type=int, default=50)
    p.set_defaults(func=cmd_planlang)

    p = sub.add_parser("chase", help="print the chase of the query fact")
    p.add_argument("instance")
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_chase)

    p = sub.add_parser("bench", help="answered-query sweep on random instances, as CSV")
    p.add_argument("--sweep", choices=sorted(bench.SWEEPS), default="functions")
    p.add_argument("--values", help="comma-separated sweep values (default: the standard sweep)")
    p.add_argument("--relations", type=int, default=7)
    p.add_argument("--functions", type=int, default=15)
    p.add_argument("--p-exist", type=float, default=0.2)
    p.add_argument("--max-body", type=int, default=4)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-inverse", action="store_true", help="also ask r-(c, x) queries")
    p.add_argument("--metadata", help="write generator parameters as JSON to this file")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if getattr(args, "depth", 0) < 0:
        print("error: --depth must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except (InputError, PlanError, SchemaError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
