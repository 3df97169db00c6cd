"""The regular language of plan skeletons, and the transducer undoing it.

Each call of a non-redundant plan leaves a characteristic word: the whole
body forward, then back down to the output passed on.  The last call ends
on the query relation, which is what the ``final`` flag of a segment
captures.  Reading a word back through the transducer yields the function
names and the output indices, which is all a plan needs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .languages import FiniteAutomaton, Regex, concat, determinize, minimize, star, union, word_regex
from .plans import (
    CONST,
    ExecutionPlan,
    FunctionCall,
    PathFunction,
    PlanError,
    Word,
    full_path_transform,
    is_well_filtering,
    minimal_filter_position,
)
from .schema import AtomicQuery, RelationSymbol

TapeItem = Union[str, int]  # function name or OUT_i marker


@dataclass(frozen=True)
class AnnotatedSegment:
    function: PathFunction
    position: int
    word: Word
    final: bool


def segment_word(f: PathFunction, i: int) -> Word:
    n = len(f.body)
    if i == n:
        return f.body
    return f.body + tuple(s.inverse for s in reversed(f.body[i:]))


def is_final(f: PathFunction, i: int, query: AtomicQuery, offset: int = 0) -> bool:
    """Whether ``w_{f,i}`` can close a skeleton for ``query``.

    ``offset`` shifts the body indices of the third condition; only the
    default 0 is correct, other values exist so the tests can show it.
    """
    r = query.relation
    body, outs = f.body, set(f.output_positions)
    n = len(body)
    if i >= n:
        return False
    last = body[i].inverse  # last letter of w_{f,i}
    if not (last == r.inverse or (last == r and i > 0)):
        return False
    if i + 1 not in outs:
        return False
    if i < n - 1 and i + 2 in outs:
        j = i + offset
        if 0 <= j and j + 1 < n and body[j] == r and body[j + 1] == r.inverse:
            return False
    return True


def compute_segments(functions: Iterable[PathFunction], query: AtomicQuery, offset: int = 0) -> list[AnnotatedSegment]:
    out = []
    for f in functions:
        for i in (0,) + tuple(f.output_positions):
            out.append(AnnotatedSegment(f, i, segment_word(f, i), is_final(f, i, query, offset)))
    return out


def _exit_marker(seg: AnnotatedSegment, query: AtomicQuery) -> int:
    if seg.position == 0:
        return 1
    if not seg.final:
        return seg.position
    return seg.position if seg.word[-1] == query.relation else seg.position + 1


def build_plan_regex(segments: Sequence[AnnotatedSegment]) -> Regex:
    w0, w, w_final = _segment_groups(segments)
    return union(
        union(*(word_regex(x) for x in w0)),
        concat(star(union(*(word_regex(x) for x in w))), union(*(word_regex(x) for x in w_final))),
    )


def build_plan_automaton(segments: Sequence[AnnotatedSegment], alphabet: Optional[Iterable[RelationSymbol]] = None) -> FiniteAutomaton:
    """Minimal deterministic automaton for the plan language.

    Same language as ``regex_to_nfa(build_plan_regex(segments))``, built
    from prefix tries of the segment words, which is much smaller.
    """
    w0, w, w_final = _segment_groups(segments)
    alpha = list(alphabet) if alphabet is not None else []
    for word in itertools.chain(w0, w, w_final):
        alpha.extend(a for a in word if a not in alpha)
    trans: set = set()
    counter = itertools.count()
    start, hub, accept = next(counter), next(counter), next(counter)

    def trie(root: int, words: Iterable[Word], end: int):
        children: dict = {}
        for word in words:
            node = root
            for a in word:
                if (node, a) not in children:
                    children[(node, a)] = next(counter)
                    trans.add((node, a, children[(node, a)]))
                node = children[(node, a)]
            trans.add((node, None, end))

    trie(start, w0, accept)
    if w_final:
        trans.add((start, None, hub))
        trie(hub, w, hub)
        trie(hub, w_final, accept)
    nfa = FiniteAutomaton(frozenset(range(next(counter))), tuple(alpha), frozenset(trans), start, frozenset({accept}))
    return minimize(determinize(nfa))


def _segment_groups(segments: Sequence[AnnotatedSegment]) -> tuple[list[Word], list[Word], list[Word]]:
    """Words of W0 (final, position 0), W (position > 0) and W' (final, inner position)."""
    w0 = [s.word for s in segments if s.position == 0 and s.final]
    w = [s.word for s in segments if s.position > 0]
    w_final = [s.word for s in segments if 0 < s.position < len(s.function.body) and s.final]
    return w0, w, w_final


# --------------------------------------------------------------------------
# reverse transducer


@dataclass(frozen=True, eq=False)
class ReverseTransducer:
    """Letters are consumed on labelled edges; tape items are emitted on epsilon edges.

    ``epsilon`` maps a state to ``(target, emitted)`` pairs where ``emitted``
    is a tuple of tape items; ``letters`` maps a state to ``(symbol, target)``.
    """

    n_states: int
    epsilon: dict
    letters: dict
    initial: int
    final: int
    _closures: dict = field(default_factory=dict, repr=False)

    @property
    def transitions(self) -> list[tuple[int, Optional[RelationSymbol], tuple, int]]:
        out = []
        for p, edges in self.epsilon.items():
            out.extend((p, None, emitted, q) for q, emitted in edges)
        for p, edges in self.letters.items():
            out.extend((p, a, (), q) for a, q in edges)
        return sorted(out, key=lambda t: (t[0], t[3]))

    def closure(self, state: int) -> list[tuple[int, tuple]]:
        """States reachable by epsilon edges along simple paths, with what they emit."""
        cache = self._closures
        if state in cache:
            return cache[state]
        found: list[tuple[int, tuple]] = []
        seen: set[tuple[int, tuple]] = set()

        def walk(p: int, emitted: tuple, path: frozenset):
            if (p, emitted) not in seen:
                seen.add((p, emitted))
                found.append((p, emitted))
            for q, out in self.epsilon.get(p, ()):
                if q not in path:
                    walk(q, emitted + out, path | {q})

        walk(state, (), frozenset({state}))
        cache[state] = found
        return found

    def run(self, w: Sequence[RelationSymbol]) -> list[tuple[TapeItem, ...]]:
        """All distinct output tapes of accepting runs on ``w``, in discovery order."""
        w = tuple(w)

        @lru_cache(maxsize=None)
        def tapes(state: int, pos: int) -> tuple:
            out: dict[tuple, None] = {}
            for q, emitted in self.closure(state):
                if q == self.final and pos == len(w):
                    out[emitted] = None
                if pos < len(w):
                    for a, t in self.letters.get(q, ()):
                        if a == w[pos]:
                            for rest in tapes(t, pos + 1):
                                out[emitted + rest] = None
            return tuple(out)

        return list(tapes(self.initial, 0))


def build_reverse_transducer(segments: Sequence[AnnotatedSegment], query: AtomicQuery) -> ReverseTransducer:
    epsilon: dict[int, list] = {}
    letters: dict[int, list] = {}
    S, F, S_W0, S_W, F_W, S_WF, F_W0, F_WF = range(8)
    count = [8]

    def eps(p, q, emitted=()):
        epsilon.setdefault(p, []).append((q, tuple(emitted)))

    eps(S, S_W0)
    eps(S, S_W)
    eps(S_W, F_W)
    eps(F_W, S_W)
    eps(F_W, S_WF)
    eps(F_W0, F)
    eps(F_WF, F)

    def chain(start: int, end: int, seg: AnnotatedSegment, marker: int):
        first = count[0]
        states = list(range(first, first + len(seg.word) + 1))
        count[0] += len(states)
        eps(start, states[0], (seg.function.name,))
        for a, p, q in zip(seg.word, states, states[1:]):
            letters.setdefault(p, []).append((a, q))
        eps(states[-1], end, (marker,))

    for seg in segments:
        n = len(seg.function.body)
        if seg.position == 0:
            if seg.final:
                chain(S_W0, F_W0, seg, 1)
            continue
        chain(S_W, F_W, seg, seg.position)
        if seg.position < n and seg.final:
            chain(S_WF, F_WF, seg, _exit_marker(seg, query))
    return ReverseTransducer(count[0], epsilon, letters, S, F)


def tape_to_plan(tape: Sequence[TapeItem], functions: dict[str, PathFunction], query: AtomicQuery) -> ExecutionPlan:
    """Wire a tape ``f1, OUT_k1, f2, OUT_k2, ...`` into an unfiltered plan."""
    if len(tape) < 2 or len(tape) % 2:
        raise PlanError(f"malformed tape {tape!r}")
    calls = []
    prev_out: Optional[int] = None
    for j in range(0, len(tape), 2):
        name, marker = tape[j], tape[j + 1]
        inp = CONST if prev_out is None else (len(calls) - 1, prev_out)
        calls.append(FunctionCall(functions[name], inp))
        prev_out = marker
    return ExecutionPlan(query.input_constant, tuple(calls), (len(calls) - 1, prev_out))


def reverse_transform(
    w: Sequence[RelationSymbol],
    segments: Sequence[AnnotatedSegment],
    query: AtomicQuery,
    transducer: Optional[ReverseTransducer] = None,
) -> list[ExecutionPlan]:
    """Non-redundant minimal filtering plans whose skeleton is ``w``."""
    w = tuple(w)
    if transducer is None:
        transducer = build_reverse_transducer(segments, query)
    functions = {s.function.name: s.function for s in segments}
    plans: dict = {}
    for tape in transducer.run(w):
        try:
            plan = tape_to_plan(tape, functions, query)
        except PlanError:
            continue
        pos = minimal_filter_position(plan, query)
        if pos is not None:
            filtered = plan.with_filters({pos: query.input_constant})
        elif is_well_filtering(plan, query):
            filtered = plan
        else:
            filtered = None
        if filtered is None or filtered.key() in plans:
            continue
        if full_path_transform(filtered, query) != w:
            continue
        plans[filtered.key()] = filtered
    return list(plans.values())

