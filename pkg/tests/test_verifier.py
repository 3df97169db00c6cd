import itertools

import pytest

from pathrewrite.chase import oracle_equivalent
from pathrewrite.plans import (
    ExecutionPlan,
    FunctionCall,
    PathFunction,
    PlanError,
    is_well_filtering,
    plan_semantics,
)
from pathrewrite.schema import alphabet_of, close_uids, sym, word
from pathrewrite.verifier import (
    DROPPED_CALLS_LOSE_ANSWERS,
    EQUIVALENT,
    FILTER_NOT_DERIVABLE,
    NOT_WELL_FILTERING,
    WORD_NOT_IN_LQ,
    verify_plan,
)

from support import (
    BLUE_PLAN,
    GREEN_PLAN,
    MUSIC_FUNCTIONS,
    MUSIC_QUERY,
    R_QUERY,
    desk_instance,
    music_uids,
)

F_R = PathFunction("f", word("r"), (1,))
G_S = PathFunction("g", word("s"), (1,))
ALPHA = alphabet_of(["r", "s"])


def uids(*pairs):
    return close_uids(set(pairs), ALPHA)


def test_single_atom_plan_is_equivalent():
    v = verify_plan(ExecutionPlan("a", (FunctionCall(F_R),), (0, 1)), [F_R], uids(), R_QUERY)
    assert v.reason == EQUIVALENT and v.equivalent and bool(v)
    assert v.word == word("r r-")
    assert not v.extracted


def test_music_verdicts():
    u = music_uids()
    blue = verify_plan(BLUE_PLAN, MUSIC_FUNCTIONS, u, MUSIC_QUERY)
    assert blue.reason == EQUIVALENT
    assert blue.word == word("onAlbum onAlbum- sang- sang")
    assert verify_plan(GREEN_PLAN, MUSIC_FUNCTIONS, u, MUSIC_QUERY).reason == FILTER_NOT_DERIVABLE
    assert verify_plan(GREEN_PLAN.unfiltered(), MUSIC_FUNCTIONS, u, MUSIC_QUERY).reason == NOT_WELL_FILTERING


def test_green_plan_fails_with_any_filters():
    u = music_uids()
    base = GREEN_PLAN.unfiltered()
    for plan in _filtered_variants(base):
        assert not verify_plan(plan, MUSIC_FUNCTIONS, u, MUSIC_QUERY).equivalent


def test_foreign_filter_constant():
    plan = BLUE_PLAN.with_filters({(1, 1): "Elvis"})
    assert verify_plan(plan, MUSIC_FUNCTIONS, music_uids(), MUSIC_QUERY).reason == NOT_WELL_FILTERING


def test_unknown_function_is_an_input_error():
    with pytest.raises(PlanError):
        verify_plan(ExecutionPlan("a", (FunctionCall(F_R),), (0, 1)), [G_S], uids(), R_QUERY)


def test_word_outside_the_grammar():
    # s s- r: the loop s s- needs r ~> s
    g = PathFunction("g", word("s s- r"), (2, 3))
    plan = ExecutionPlan("a", (FunctionCall(g, filters={2: "a"}),), (0, 3))
    v = verify_plan(plan, [g], uids(), R_QUERY)
    assert v.reason in (WORD_NOT_IN_LQ, FILTER_NOT_DERIVABLE)
    assert not v.equivalent
    assert verify_plan(plan, [g], uids((sym("r"), sym("s"))), R_QUERY).equivalent


def test_redundant_plan_is_checked_after_extraction():
    plan = ExecutionPlan("a", (FunctionCall(F_R), FunctionCall(G_S)), (0, 1))
    v = verify_plan(plan, [F_R, G_S], uids((sym("r"), sym("s"))), R_QUERY)
    assert v.equivalent and v.extracted
    assert v.checked_plan == ExecutionPlan("a", (FunctionCall(F_R),), (0, 1))
    # without r ~> s the extra call s(a, y) can remove the answer
    v = verify_plan(plan, [F_R, G_S], uids(), R_QUERY)
    assert v.reason == DROPPED_CALLS_LOSE_ANSWERS


def test_verdict_ignores_variable_names():
    # listing the dangling call first renumbers every variable
    u = uids((sym("r"), sym("s")))
    first = ExecutionPlan("a", (FunctionCall(F_R), FunctionCall(G_S)), (0, 1))
    second = ExecutionPlan("a", (FunctionCall(G_S), FunctionCall(F_R)), (1, 1))
    assert str(plan_semantics(first)) != str(plan_semantics(second))
    for us in (u, uids()):
        assert verify_plan(first, [F_R, G_S], us, R_QUERY).reason == verify_plan(second, [F_R, G_S], us, R_QUERY).reason


def _chains(functions, max_calls):
    def grow(calls):
        last = calls[-1].function
        for p in last.output_positions:
            yield ExecutionPlan("a", tuple(calls), (len(calls) - 1, p))
        if len(calls) < max_calls:
            for p in last.output_positions:
                for f in functions:
                    yield from grow(calls + [FunctionCall(f, (len(calls) - 1, p))])

    for f in functions:
        yield from grow([FunctionCall(f)])


def _filtered_variants(plan, max_filters=2):
    consumed = plan.consumed_positions()
    free = [
        (i, p)
        for i, c in enumerate(plan.calls)
        for p in c.function.output_positions
        if (i, p) != plan.output and (i, p) not in consumed
    ]
    for k in range(max_filters + 1):
        for subset in itertools.combinations(free, k):
            yield plan.with_filters({pos: "a" for pos in subset})


@pytest.mark.parametrize("i", range(25))
def test_agreement_with_chase_oracle(i):
    functions, u, queries = desk_instance(i)
    functions = functions[:4]
    for q in queries[:4]:
        for base in _chains(functions, 3 if len(functions) <= 2 else 2):
            for plan in _filtered_variants(base):
                if not is_well_filtering(plan, q):
                    continue
                depth = len(plan_semantics(plan).atoms) + 2
                assert verify_plan(plan, functions, u, q).equivalent == oracle_equivalent(
                    plan, q, functions, u, depth
                ), plan
