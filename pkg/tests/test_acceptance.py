"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line straight to the terminal (even
under output capture) before asserting.
"""
import io
import json
import random
import time

import pytest

from pathrewrite.bench import FUNCTIONS_SWEEP, RELATIONS_SWEEP, SplitMix64, derive_seed, generate_instance, run_experiment
from pathrewrite.chase import brute_force_search, chase, loop_holds, oracle_equivalent
from pathrewrite.cli import main
from pathrewrite.grammar import build_forward_backward_grammar, loop_nonterminal, loop_word_derivable
from pathrewrite.languages import (
    ContextFreeGrammar,
    binarize,
    eliminate_epsilon,
    enumerate_words,
    intersect_cfg_nfa,
    remove_epsilon,
)
from pathrewrite.planlang import build_plan_automaton, build_reverse_transducer, compute_segments, reverse_transform
from pathrewrite.languages import automaton_words
from pathrewrite.plans import full_path_transform, minimal_filtering_plan, plan_to_json
from pathrewrite.rewriter import RewritingProblem, exists_rewriting
from pathrewrite.schema import AtomicQuery, alphabet_of, close_uids
from pathrewrite.verifier import EQUIVALENT

from support import (
    BLUE_PLAN,
    F1,
    F2,
    GREEN_PLAN,
    MUSIC_INSTANCE_JSON,
    R_QUERY,
    TWO_CALL_PLAN,
    TWO_CALL_WORD,
    all_words,
    automaton_language,
    bounded_language,
    desk_instance,
    random_functions,
    random_grammar,
    random_nfa,
)


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, detail

    return emit


def _cli(argv):
    out = io.StringIO()
    return main([str(a) for a in argv], out), out.getvalue()


def test_criterion_1_worked_example(report, tmp_path):
    start = time.perf_counter()
    inst = tmp_path / "music.json"
    inst.write_text(json.dumps(MUSIC_INSTANCE_JSON))
    blue = tmp_path / "blue.json"
    blue.write_text(json.dumps(plan_to_json(BLUE_PLAN)))
    green = tmp_path / "green.json"
    green.write_text(json.dumps(plan_to_json(GREEN_PLAN)))

    code, out = _cli(["rewrite", inst, "--enumerate"])
    lines = out.splitlines()
    rewrite_ok = code == 0 and lines[0] == "EXISTS" and json.dumps(plan_to_json(BLUE_PLAN)) in lines[1:]
    code_b, out_b = _cli(["verify", inst, blue])
    code_g, out_g = _cli(["verify", inst, green])
    verify_ok = code_b == 0 and out_b.startswith(EQUIVALENT + "\n") and code_g == 1
    elapsed = time.perf_counter() - start
    ok = rewrite_ok and verify_ok and elapsed < 1.0
    report(1, "worked example", ok,
           f"rewrite ok={rewrite_ok}, blue={out_b.splitlines()[0]}, green={out_g.splitlines()[0]}, {elapsed:.3f}s")


def test_criterion_2_transformation_golden(report):
    w = full_path_transform(TWO_CALL_PLAN, R_QUERY)
    segs = compute_segments([F1, F2], R_QUERY)
    plans = reverse_transform(w, segs, R_QUERY)
    ok = w == TWO_CALL_WORD and plans == [TWO_CALL_PLAN]
    report(2, "path transformation golden", ok, f"word={' '.join(map(str, w))}, plans={[str(p) for p in plans]}")


def test_criterion_3_oracle_soundness(report):
    start = time.perf_counter()
    checked = failed = 0
    for i in range(200):
        functions, uids, queries = desk_instance(i)
        for q in queries:
            for plan in RewritingProblem(tuple(functions), uids, q).plans(10, 5):
                depth = len(full_path_transform(minimal_filtering_plan(plan, q), q)) + 2
                checked += 1
                failed += not oracle_equivalent(plan, q, functions, uids, depth)
    elapsed = time.perf_counter() - start
    ok = failed == 0 and checked > 0 and elapsed < 300
    report(3, "emitted plans pass the chase oracle", ok, f"{checked - failed}/{checked} plans, {elapsed:.1f}s")


def test_criterion_4_bounded_completeness(report):
    start = time.perf_counter()
    negatives = disagreements = 0
    for i in range(200):
        functions, uids, queries = desk_instance(i)
        for q in queries:
            if not exists_rewriting(functions, uids, q):
                negatives += 1
                disagreements += brute_force_search(functions, uids, q, 3) is not None
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and negatives > 0 and elapsed < 600
    report(4, "no brute-force plan when none is decided", ok,
           f"{negatives - disagreements}/{negatives} negative queries agree, {elapsed:.1f}s")


def test_criterion_5_loop_property(report):
    total = bad = 0
    for k in range(50):
        rng = random.Random(derive_seed(5, k))
        alphabet = alphabet_of([f"p{j}" for j in range(rng.randint(1, 3))])
        pairs = {(rng.choice(alphabet), rng.choice(alphabet)) for _ in range(rng.randint(0, 6))}
        uids = close_uids(pairs, alphabet)
        query = AtomicQuery(rng.choice(alphabet), "a")
        g = build_forward_backward_grammar(alphabet, uids, query)
        chases = {d: chase(query.relation, uids, d) for d in range(1, 8)}
        loops = ContextFreeGrammar(g.nonterminals, g.terminals, g.productions, loop_nonterminal(query.relation))
        for w in enumerate_words(loops, 6):
            total += 1
            bad += not loop_holds(chases[len(w) + 1], "a", w)
        for w in all_words(alphabet, 4):
            if not loop_word_derivable(g, query, w):
                total += 1
                bad += loop_holds(chases[len(w) + 1], "a", w)
    report(5, "loop derivability matches the chase", bad == 0, f"{total - bad}/{total} words")


def test_criterion_6_faithfulness(report):
    words = bad = 0
    for k in range(50):
        rng = random.Random(derive_seed(6, k))
        functions, alphabet = random_functions(rng, rng.randint(1, 3), rng.randint(1, 4), 3, 0.2)
        query = AtomicQuery(rng.choice(alphabet), "a")
        segs = compute_segments(functions, query)
        transducer = build_reverse_transducer(segs, query)
        for w in automaton_words(build_plan_automaton(segs, alphabet), 8):
            words += 1
            plans = reverse_transform(w, segs, query, transducer)
            if not plans or any(full_path_transform(p, query) != w for p in plans):
                bad += 1
    report(6, "plan language round trip", bad == 0 and words > 0, f"{words - bad}/{words} words")


def test_criterion_7_language_toolkit(report):
    cases = bad = 0
    for k in range(100):
        rng = random.Random(derive_seed(7, k))
        g = random_grammar(rng, n_nonterminals=rng.randint(2, 5))
        nfa = random_nfa(rng)
        lang = bounded_language(g, 6)
        bg = binarize(g)
        checks = [
            bounded_language(bg, 6) == lang,
            bounded_language(eliminate_epsilon(bg), 6) == lang,
            set(enumerate_words(intersect_cfg_nfa(bg, remove_epsilon(nfa)), 6)) == lang & automaton_language(nfa, 6),
        ]
        cases += len(checks)
        bad += checks.count(False)
    report(7, "toolkit transformations preserve languages", bad == 0, f"{cases - bad}/{cases} checks")


def _violations(values, direction):
    pairs = list(zip(values, values[1:]))
    if direction == "down":
        return sum(b > a for a, b in pairs)
    return sum(b < a for a, b in pairs)


@pytest.mark.slow
def test_criterion_8_trends(report):
    start = time.perf_counter()
    rel = [row.answered_fraction for row in run_experiment(RELATIONS_SWEEP, 200, seed=0)]
    fun = [row.answered_fraction for row in run_experiment(FUNCTIONS_SWEEP, 200, seed=0)]
    elapsed = time.perf_counter() - start
    ok = _violations(rel, "down") <= 1 and _violations(fun, "up") <= 1
    fmt = lambda xs: ", ".join(f"{x:.3f}" for x in xs)
    report(8, "answered-fraction trends", ok, f"relations 5..13: [{fmt(rel)}]; functions 5..25: [{fmt(fun)}]; {elapsed:.0f}s")


def test_criterion_9_scale(report):
    functions, uids, alphabet = generate_instance(64, 24, 0.2, 4, seed=derive_seed(9))
    worst = 0.0
    answered = 0
    for s in alphabet:
        start = time.perf_counter()
        answered += exists_rewriting(functions, uids, AtomicQuery(s, "c"))
        worst = max(worst, time.perf_counter() - start)
    report(9, "64 relations, 24 functions", worst < 60.0,
           f"{len(alphabet)} queries, {answered} answered, slowest {worst:.3f}s")
