"""Checking a single plan for equivalence with the query."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .chase import LazyChase, evaluate
from .grammar import START
from .languages import derives
from .plans import (
    ExecutionPlan,
    PathFunction,
    PlanError,
    Word,
    extract_nonredundant,
    full_path_transform,
    is_nonredundant,
    is_well_filtering,
    minimal_filtering_plan,
    plan_semantics,
)
from .rewriter import RewritingProblem, filters_preserve_equivalence
from .schema import AtomicQuery, UIDSet

EQUIVALENT = "EQUIVALENT"
NOT_WELL_FILTERING = "NOT_WELL_FILTERING"
FILTER_NOT_DERIVABLE = "FILTER_NOT_DERIVABLE"
WORD_NOT_IN_LQ = "WORD_NOT_IN_LQ"
DROPPED_CALLS_LOSE_ANSWERS = "DROPPED_CALLS_LOSE_ANSWERS"


@dataclass(frozen=True)
class Verdict:
    reason: str
    plan: ExecutionPlan
    checked_plan: ExecutionPlan
    word: Optional[Word] = None

    @property
    def equivalent(self) -> bool:
        return self.reason == EQUIVALENT

    @property
    def extracted(self) -> bool:
        """True when calls outside the output chain were dropped before checking."""
        return self.checked_plan.key() != self.plan.key()

    def __bool__(self) -> bool:
        return self.equivalent


def verify_plan(
    plan: ExecutionPlan,
    functions: Iterable[PathFunction],
    uids: UIDSet,
    query: AtomicQuery,
) -> Verdict:
    """Decide whether ``plan`` returns exactly the answers of ``query`` on every instance.

    Redundant plans are first cut down to the calls feeding the output.
    If that chain is equivalent, the dropped calls can still only remove
    answers, so the whole plan is then run on the chase of the query fact,
    deep enough to hold any match of its atoms.
    Raises :class:`PlanError` for plans over unknown functions, and
    :class:`RedundantPlanError` when only a call consuming the output
    carries the query atom.
    """
    functions = tuple(functions)
    known = {f.name: f for f in functions}
    for call in plan.calls:
        if known.get(call.function.name) != call.function:
            raise PlanError(f"plan uses unknown function {call.function.name}")

    if plan.constant != query.input_constant or not is_well_filtering(plan, query):
        return Verdict(NOT_WELL_FILTERING, plan, plan)
    checked = plan if is_nonredundant(plan) else extract_nonredundant(plan, query)

    g = RewritingProblem(functions, uids, query).grammar
    if not filters_preserve_equivalence(checked, query, g):
        return Verdict(FILTER_NOT_DERIVABLE, plan, checked)
    w = full_path_transform(minimal_filtering_plan(checked, query), query)
    if not derives(g, START, w):
        return Verdict(WORD_NOT_IN_LQ, plan, checked, w)
    if checked is not plan and not _keeps_seed_answer(plan, uids, query):
        return Verdict(DROPPED_CALLS_LOSE_ANSWERS, plan, checked, w)
    return Verdict(EQUIVALENT, plan, checked, w)


def _keeps_seed_answer(plan: ExecutionPlan, uids: UIDSet, query: AtomicQuery) -> bool:
    cq = plan_semantics(plan)
    a = query.input_constant
    b = "b" if a != "b" else "b0"
    return b in evaluate(cq, LazyChase(query.relation, uids, len(cq.atoms) + 1, a, b))
