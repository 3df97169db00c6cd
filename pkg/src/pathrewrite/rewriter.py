"""Deciding and enumerating equivalent rewritings of an atomic query.

A rewriting exists exactly when some skeleton of a possible plan is also a
forward-backward path guaranteed by the dependencies, so the decision is an
emptiness test on the intersection of the two languages.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from .grammar import build_forward_backward_grammar, loop_word_derivable
from .languages import (
    ContextFreeGrammar,
    FiniteAutomaton,
    binarize,
    enumerate_words,
    intersect_cfg_nfa,
    intersection_is_empty,
    is_empty,
)
from .planlang import (
    AnnotatedSegment,
    ReverseTransducer,
    build_plan_automaton,
    build_reverse_transducer,
    compute_segments,
    reverse_transform,
)
from .plans import CONST, ExecutionPlan, PathFunction, Word, is_well_filtering, root_path
from .schema import AtomicQuery, RelationSymbol, UIDSet

DEFAULT_MAX_FILTERS = 3


def default_max_word_length(functions: Sequence[PathFunction]) -> int:
    longest = max((len(f.body) for f in functions), default=1)
    return 2 * longest * 4


@dataclass
class RewritingProblem:
    """All the automata and grammars for one (functions, dependencies, query) triple."""

    functions: tuple[PathFunction, ...]
    uids: UIDSet
    query: AtomicQuery

    def __post_init__(self):
        self.functions = tuple(self.functions)
        names = [f.name for f in self.functions]
        if len(set(names)) != len(names):
            raise ValueError("function names must be unique")

    @property
    def alphabet(self) -> tuple[RelationSymbol, ...]:
        alpha = list(self.uids.alphabet)
        for f in self.functions:
            for s in f.body:
                for t in (s, s.inverse):
                    if t not in alpha:
                        alpha.append(t)
        for t in (self.query.relation, self.query.relation.inverse):
            if t not in alpha:
                alpha.append(t)
        return tuple(alpha)

    @cached_property
    def grammar(self) -> ContextFreeGrammar:
        return build_forward_backward_grammar(self.alphabet, self.uids, self.query)

    @cached_property
    def segments(self) -> list[AnnotatedSegment]:
        return compute_segments(self.functions, self.query)

    @cached_property
    def automaton(self) -> FiniteAutomaton:
        return build_plan_automaton(self.segments, self.alphabet)

    @cached_property
    def transducer(self) -> ReverseTransducer:
        return build_reverse_transducer(self.segments, self.query)

    @cached_property
    def binary_grammar(self) -> ContextFreeGrammar:
        return binarize(self.grammar)

    @cached_property
    def intersection(self) -> ContextFreeGrammar:
        return intersect_cfg_nfa(self.binary_grammar, self.automaton)

    def exists(self) -> bool:
        if not self.functions:
            return False
        if "intersection" in self.__dict__:
            return not is_empty(self.intersection)
        return forward_backward_path_exists(self.automaton, self.uids, self.query)

    def words(self, max_word_length: Optional[int] = None) -> Iterator[Word]:
        if not self.exists():
            return iter(())
        if max_word_length is None:
            max_word_length = default_max_word_length(self.functions)
        return enumerate_words(self.intersection, max_word_length)

    def plans(
        self,
        max_word_length: Optional[int] = None,
        max_plans: Optional[int] = None,
        max_filters: int = DEFAULT_MAX_FILTERS,
    ) -> Iterator[ExecutionPlan]:
        if max_plans is not None and max_plans <= 0:
            return
        seen = set()
        for w in self.words(max_word_length):
            for base in reverse_transform(w, self.segments, self.query, self.transducer):
                for plan in filter_variants(base, self.query, self.grammar, max_filters):
                    if plan.key() in seen:
                        continue
                    seen.add(plan.key())
                    yield plan
                    if max_plans is not None and len(seen) >= max_plans:
                        return


def forward_backward_path_exists(dfa: FiniteAutomaton, uids: UIDSet, query: AtomicQuery) -> bool:
    """Whether the automaton accepts a word of the forward-backward grammar.

    Equivalent to emptiness of the product with the grammar, specialized to
    its shape.  ``loops[(x, p)]`` collects the states reachable from ``p``
    by reading a loop that starts and ends at an element with an outgoing
    ``x`` fact; the loop descends along some ``y`` implied by ``x``, loops
    there under ``y-``, and comes back with ``y-``.
    """
    ids: dict = {}
    for x, y in uids.pairs:
        for t in (x, y, x.inverse, y.inverse):
            ids.setdefault(t, len(ids))
    for a in dfa.alphabet:
        ids.setdefault(a, len(ids))
        ids.setdefault(a.inverse, len(ids))
    r_sym = query.relation
    ids.setdefault(r_sym, len(ids))
    ids.setdefault(r_sym.inverse, len(ids))
    inv = [0] * len(ids)
    for t, i in ids.items():
        inv[i] = ids[t.inverse]
    implied: list = [[] for _ in ids]
    for x, y in uids.pairs:
        implied[ids[x]].append(ids[y])
    delta: dict = {}
    for p, a, q in dfa.transitions:
        delta.setdefault(p, {})[ids[a]] = q
    empty: dict = {}
    r, r_inv = ids[r_sym], inv[ids[r_sym]]
    start, accepting = dfa.initial, dfa.accepting

    loops: dict = {}
    waiters: dict = {}  # (z, s) -> {(x, p): z}: loop (x, p) resumes after loop (z, s), closing with z
    agenda: list = []

    def add(x, p, q):
        seen = loops.setdefault((x, p), set())
        if q not in seen:
            seen.add(q)
            agenda.append((x, p, q))

    def request(x, p):
        if (x, p) not in loops:
            add(x, p, p)

    request(r, start)
    while agenda:
        x, p, q = agenda.pop()
        moves = delta.get(q, empty)
        for y in implied[x]:
            q1 = moves.get(y)
            if q1 is None:
                continue
            back = inv[y]
            waiting = waiters.setdefault((back, q1), {})
            if (x, p) in waiting:
                continue  # already woken by every loop state of (back, q1)
            waiting[(x, p)] = back
            request(back, q1)
            for q2 in list(loops[(back, q1)]):
                q3 = delta.get(q2, empty).get(back)
                if q3 is not None:
                    add(x, p, q3)
        for (x2, p2), back in list(waiters.get((x, p), {}).items()):
            q3 = moves.get(back)
            if q3 is not None:
                add(x2, p2, q3)
        if x == r and p == start:
            q1 = moves.get(r)
            if q1 is not None:
                if q1 in accepting:
                    return True
                request(r_inv, q1)
    # the optional trailing loop at the answer, then r- back to the constant
    for q in loops.get((r, start), ()):
        q1 = delta.get(q, empty).get(r)
        if q1 is None:
            continue
        for q2 in loops.get((r_inv, q1), ()):
            if delta.get(q2, empty).get(r_inv) in accepting:
                return True
    return False


def exists_rewriting(functions: Iterable[PathFunction], uids: UIDSet, query: AtomicQuery) -> bool:
    return RewritingProblem(tuple(functions), uids, query).exists()


def enumerate_rewritings(
    functions: Iterable[PathFunction],
    uids: UIDSet,
    query: AtomicQuery,
    max_word_length: Optional[int] = None,
    max_plans: Optional[int] = None,
    max_filters: int = DEFAULT_MAX_FILTERS,
) -> Iterator[ExecutionPlan]:
    """Equivalent plans ordered by skeleton length, skeleton, tape and filter set."""
    problem = RewritingProblem(tuple(functions), uids, query)
    return problem.plans(max_word_length, max_plans, max_filters)


def filters_preserve_equivalence(plan: ExecutionPlan, query: AtomicQuery, g: ContextFreeGrammar) -> bool:
    """Whether every filter of ``plan`` sits on a variable that always equals the constant.

    Assumes the plan without its extra filters is already known to be an
    equivalent rewriting.
    """
    for pos, c in plan.filters:
        if c != query.input_constant:
            return False
        if not loop_word_derivable(g, query, root_path(plan, pos)):
            return False
    return True


def filter_variants(
    minimal: ExecutionPlan, query: AtomicQuery, g: ContextFreeGrammar, max_filters: int = DEFAULT_MAX_FILTERS
) -> Iterator[ExecutionPlan]:
    """The unfiltered plan and each filter set up to ``max_filters`` that keeps it equivalent."""
    base = minimal.unfiltered()
    free = [
        (i, p)
        for i, call in enumerate(base.calls)
        for p in call.function.output_positions
        if (i, p) != base.output and (i, p) not in base.consumed_positions()
    ]
    # positions that may carry a filter at all, so subsets stay small
    usable = [pos for pos in free if loop_word_derivable(g, query, root_path(base, pos))]
    for size in range(0, max_filters + 1):
        for subset in itertools.combinations(usable, size):
            plan = base.with_filters({pos: query.input_constant for pos in subset})
            if is_well_filtering(plan, query) and filters_preserve_equivalence(plan, query, g):
                yield plan
