"""Context-free grammars, regular expressions and finite automata.

Terminals are :class:`~pathrewrite.schema.RelationSymbol` values (any
hashable works, as long as terminals and nonterminals never compare equal).
Nonterminals are arbitrary hashables; the product construction uses triples
``(p, A, q)``.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Optional, Sequence

Symbol = Hashable
Production = tuple[Hashable, tuple]


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Fresh:
    """Generated nonterminal; never clashes with user-supplied names."""

    tag: str
    n: int

    def __str__(self) -> str:
        return f"_{self.tag}{self.n}"


# --------------------------------------------------------------------------
# regular expressions


class Regex:
    """Abstract syntax tree node."""


@dataclass(frozen=True)
class Empty(Regex):
    def __str__(self) -> str:
        return "∅"


@dataclass(frozen=True)
class Epsilon(Regex):
    def __str__(self) -> str:
        return "ε"


@dataclass(frozen=True)
class Sym(Regex):
    symbol: Symbol

    def __str__(self) -> str:
        return str(self.symbol)


@dataclass(frozen=True)
class Concat(Regex):
    parts: tuple[Regex, ...]

    def __str__(self) -> str:
        return "·".join(_paren(p, Union) for p in self.parts)


@dataclass(frozen=True)
class Union(Regex):
    parts: tuple[Regex, ...]

    def __str__(self) -> str:
        return " | ".join(str(p) for p in self.parts)


@dataclass(frozen=True)
class Star(Regex):
    inner: Regex

    def __str__(self) -> str:
        return _paren(self.inner, (Union, Concat)) + "*"


def _paren(rx: Regex, kinds) -> str:
    return f"({rx})" if isinstance(rx, kinds) else str(rx)


def concat(*parts: Regex) -> Regex:
    if any(isinstance(p, Empty) for p in parts):
        return Empty()
    parts = tuple(p for p in parts if not isinstance(p, Epsilon))
    if not parts:
        return Epsilon()
    return parts[0] if len(parts) == 1 else Concat(parts)


def union(*parts: Regex) -> Regex:
    parts = tuple(dict.fromkeys(p for p in parts if not isinstance(p, Empty)))
    if not parts:
        return Empty()
    return parts[0] if len(parts) == 1 else Union(parts)


def star(inner: Regex) -> Regex:
    if isinstance(inner, (Empty, Epsilon)):
        return Epsilon()
    return Star(inner)


def word_regex(w: Sequence[Symbol]) -> Regex:
    return concat(*(Sym(s) for s in w))


# --------------------------------------------------------------------------
# finite automata


@dataclass(frozen=True)
class FiniteAutomaton:
    """NFA with optional epsilon moves (label ``None``)."""

    states: frozenset[int]
    alphabet: tuple[Symbol, ...]
    transitions: frozenset[tuple[int, Optional[Symbol], int]]
    initial: int
    accepting: frozenset[int]

    def __post_init__(self):
        alpha = set(self.alphabet)
        for p, a, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise GrammarError(f"transition {p}->{q} uses an undeclared state")
            if a is not None and a not in alpha:
                raise GrammarError(f"transition label {a} is not in the alphabet")
        if self.initial not in self.states or not self.accepting <= self.states:
            raise GrammarError("initial/accepting states must be declared")

    @cached_property
    def _moves(self) -> dict[int, list[tuple[Optional[Symbol], int]]]:
        out: dict[int, list] = defaultdict(list)
        for p, a, q in sorted(self.transitions, key=lambda t: (t[0], t[2])):
            out[p].append((a, q))
        return out

    def epsilon_closure(self, states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            p = stack.pop()
            for a, q in self._moves.get(p, ()):
                if a is None and q not in seen:
                    seen.add(q)
                    stack.append(q)
        return frozenset(seen)

    def accepts(self, word: Sequence[Symbol]) -> bool:
        current = self.epsilon_closure([self.initial])
        for s in word:
            step = {q for p in current for a, q in self._moves.get(p, ()) if a == s}
            current = self.epsilon_closure(step)
            if not current:
                return False
        return bool(current & self.accepting)

    @property
    def has_epsilon(self) -> bool:
        return any(a is None for _, a, _ in self.transitions)


def regex_to_nfa(rx: Regex, alphabet: Optional[Iterable[Symbol]] = None) -> FiniteAutomaton:
    """Thompson construction."""
    counter = itertools.count()
    trans: set[tuple[int, Optional[Symbol], int]] = set()
    seen_syms: list[Symbol] = []

    def build(node: Regex) -> tuple[int, int]:
        s, f = next(counter), next(counter)
        if isinstance(node, Empty):
            pass
        elif isinstance(node, Epsilon):
            trans.add((s, None, f))
        elif isinstance(node, Sym):
            trans.add((s, node.symbol, f))
            if node.symbol not in seen_syms:
                seen_syms.append(node.symbol)
        elif isinstance(node, Concat):
            prev = s
            for part in node.parts:
                ps, pf = build(part)
                trans.add((prev, None, ps))
                prev = pf
            trans.add((prev, None, f))
        elif isinstance(node, Union):
            for part in node.parts:
                ps, pf = build(part)
                trans.add((s, None, ps))
                trans.add((pf, None, f))
        elif isinstance(node, Star):
            ps, pf = build(node.inner)
            trans.update({(s, None, ps), (pf, None, f), (s, None, f), (pf, None, ps)})
        else:
            raise GrammarError(f"unknown regex node {node!r}")
        return s, f

    start, final = build(rx)
    n = next(counter)
    alpha = tuple(alphabet) if alphabet is not None else tuple(seen_syms)
    missing = [a for a in seen_syms if a not in alpha]
    return FiniteAutomaton(frozenset(range(n)), alpha + tuple(missing), frozenset(trans), start, frozenset({final}))


def remove_epsilon(nfa: FiniteAutomaton) -> FiniteAutomaton:
    """Equivalent automaton without epsilon moves, trimmed to useful states."""
    closures = {p: nfa.epsilon_closure([p]) for p in nfa.states}
    trans = set()
    for p in nfa.states:
        for u in closures[p]:
            for a, q in nfa._moves.get(u, ()):
                if a is not None:
                    trans.add((p, a, q))
    accepting = frozenset(p for p in nfa.states if closures[p] & nfa.accepting)
    return trim_nfa(FiniteAutomaton(nfa.states, nfa.alphabet, frozenset(trans), nfa.initial, accepting))


def trim_nfa(nfa: FiniteAutomaton) -> FiniteAutomaton:
    """Keep states both reachable and co-reachable; renumber them 0..n-1 in BFS order."""
    fwd = defaultdict(set)
    bwd = defaultdict(set)
    for p, _, q in nfa.transitions:
        fwd[p].add(q)
        bwd[q].add(p)

    order = [nfa.initial]
    reach = {nfa.initial}
    queue = deque(order)
    while queue:
        p = queue.popleft()
        for q in sorted(fwd[p]):
            if q not in reach:
                reach.add(q)
                order.append(q)
                queue.append(q)
    coreach = set(nfa.accepting)
    stack = list(coreach)
    while stack:
        q = stack.pop()
        for p in bwd[q]:
            if p not in coreach:
                coreach.add(p)
                stack.append(p)
    keep = [p for p in order if p in coreach]
    if nfa.initial not in coreach:
        keep = [nfa.initial]
    rename = {p: i for i, p in enumerate(keep)}
    trans = frozenset(
        (rename[p], a, rename[q]) for p, a, q in nfa.transitions if p in rename and q in rename
    )
    accepting = frozenset(rename[p] for p in nfa.accepting if p in rename)
    return FiniteAutomaton(frozenset(rename.values()), nfa.alphabet, trans, 0, accepting)


def determinize(nfa: FiniteAutomaton) -> FiniteAutomaton:
    """Subset construction; the result has no dead state, so it may be partial."""
    rank = {a: i for i, a in enumerate(nfa.alphabet)}
    start = nfa.epsilon_closure([nfa.initial])
    index = {start: 0}
    order = [start]
    trans = set()
    k = 0
    while k < len(order):
        step: dict = defaultdict(set)
        for p in order[k]:
            for a, q in nfa._moves.get(p, ()):
                if a is not None:
                    step[a].add(q)
        for a in sorted(step, key=rank.__getitem__):
            target = nfa.epsilon_closure(step[a])
            if target not in index:
                index[target] = len(order)
                order.append(target)
            trans.add((k, a, index[target]))
        k += 1
    accepting = frozenset(i for i, st in enumerate(order) if st & nfa.accepting)
    return trim_nfa(FiniteAutomaton(frozenset(range(len(order))), nfa.alphabet, frozenset(trans), 0, accepting))


def minimize(dfa: FiniteAutomaton) -> FiniteAutomaton:
    """Moore partition refinement on a deterministic automaton."""
    if dfa.has_epsilon:
        raise GrammarError("minimize needs a deterministic automaton")
    delta: dict[int, dict] = defaultdict(dict)
    for p, a, q in dfa.transitions:
        if a in delta[p]:
            raise GrammarError("minimize needs a deterministic automaton")
        delta[p][a] = q
    states = sorted(dfa.states)
    rank = {a: i for i, a in enumerate(dfa.alphabet)}
    block = {p: int(p in dfa.accepting) for p in states}
    while True:
        signature = {
            p: (block[p], tuple(sorted((rank[a], block[q]) for a, q in delta[p].items())))
            for p in states
        }
        ids: dict = {}
        new_block = {p: ids.setdefault(signature[p], len(ids)) for p in states}
        if len(ids) == len(set(block.values())):
            break
        block = new_block
    trans = frozenset((block[p], a, block[q]) for p, a, q in dfa.transitions)
    accepting = frozenset(block[p] for p in dfa.accepting)
    return trim_nfa(FiniteAutomaton(frozenset(block.values()), dfa.alphabet, trans, block[dfa.initial], accepting))


def automaton_words(nfa: FiniteAutomaton, max_length: int, max_words: Optional[int] = None) -> Iterator[tuple]:
    """Accepted words by length, then lexicographically in alphabet order."""
    rank = {a: i for i, a in enumerate(nfa.alphabet)}
    frontier = {(): nfa.epsilon_closure([nfa.initial])}
    emitted = 0
    for length in range(max_length + 1):
        for w in sorted(frontier, key=lambda w: [rank[a] for a in w]):
            if frontier[w] & nfa.accepting:
                yield w
                emitted += 1
                if max_words is not None and emitted >= max_words:
                    return
        if length == max_length:
            return
        nxt: dict = {}
        for w, states in frontier.items():
            step: dict = defaultdict(set)
            for p in states:
                for a, q in nfa._moves.get(p, ()):
                    if a is not None:
                        step[a].add(q)
            for a, qs in step.items():
                nxt[w + (a,)] = nfa.epsilon_closure(qs)
        frontier = nxt
        if not frontier:
            return


# --------------------------------------------------------------------------
# context-free grammars


@dataclass(frozen=True)
class ContextFreeGrammar:
    nonterminals: frozenset
    terminals: tuple[Symbol, ...]
    productions: tuple[Production, ...]
    start: Hashable

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", tuple(dict.fromkeys(self.terminals)))
        object.__setattr__(self, "productions", tuple((h, tuple(b)) for h, b in dict.fromkeys(
            (h, tuple(b)) for h, b in self.productions)))
        terms = set(self.terminals)
        if terms & self.nonterminals:
            raise GrammarError("terminals and nonterminals overlap")
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start} is not a nonterminal")
        for head, body in self.productions:
            if head not in self.nonterminals:
                raise GrammarError(f"production head {head} is not a nonterminal")
            for s in body:
                if s not in self.nonterminals and s not in terms:
                    raise GrammarError(f"symbol {s} in a production of {head} is undeclared")

    def is_terminal(self, s: Symbol) -> bool:
        return s in self._terminal_set

    @cached_property
    def _terminal_set(self) -> frozenset:
        return frozenset(self.terminals)

    @cached_property
    def by_head(self) -> dict[Hashable, list[tuple]]:
        out: dict[Hashable, list[tuple]] = defaultdict(list)
        for h, b in self.productions:
            out[h].append(b)
        return out

    @cached_property
    def nullable(self) -> frozenset:
        null: set = set()
        changed = True
        while changed:
            changed = False
            for h, b in self.productions:
                if h not in null and all(s in null for s in b):
                    null.add(h)
                    changed = True
        return frozenset(null)

    @cached_property
    def generating(self) -> frozenset:
        """Nonterminals deriving at least one terminal word."""
        waiting: dict[Hashable, list[int]] = defaultdict(list)
        missing = []
        gen: set = set()
        queue = deque()
        for k, (h, b) in enumerate(self.productions):
            nts = [s for s in b if not self.is_terminal(s)]
            missing.append(len(nts))
            for s in nts:
                waiting[s].append(k)
            if not nts and h not in gen:
                gen.add(h)
                queue.append(h)
        while queue:
            s = queue.popleft()
            for k in waiting[s]:
                missing[k] -= 1
                h = self.productions[k][0]
                if missing[k] == 0 and h not in gen:
                    gen.add(h)
                    queue.append(h)
        return frozenset(gen)

    @cached_property
    def normal_form(self) -> _NormalForm:
        return _NormalForm.of(self)

    def dump(self) -> str:
        """One production per line, ``A -> X Y``; ``ε`` marks the empty body."""
        lines = []
        for h, b in self.productions:
            rhs = " ".join(str(s) for s in b) if b else "ε"
            lines.append(f"{h} -> {rhs}")
        return "\n".join(lines)


def binarize(g: ContextFreeGrammar) -> ContextFreeGrammar:
    """Split bodies longer than two symbols into chains of fresh nonterminals."""
    counter = itertools.count()
    prods: list[Production] = []
    nts = set(g.nonterminals)
    for h, b in g.productions:
        if len(b) <= 2:
            prods.append((h, b))
            continue
        head = h
        for s in b[:-2]:
            nxt = Fresh("bin", next(counter))
            nts.add(nxt)
            prods.append((head, (s, nxt)))
            head = nxt
        prods.append((head, tuple(b[-2:])))
    return ContextFreeGrammar(frozenset(nts), g.terminals, tuple(prods), g.start)


def _drop_epsilon(g: ContextFreeGrammar) -> list[Production]:
    """Productions where each nonterminal derives exactly its non-empty words."""
    null = g.nullable
    out: list[Production] = []
    for h, b in g.productions:
        options = [((s,), ()) if s in null else ((s,),) for s in b]
        for choice in itertools.product(*options):
            body = tuple(itertools.chain.from_iterable(choice))
            if body and (h, body) not in out:
                out.append((h, body))
    return out


def eliminate_epsilon(g: ContextFreeGrammar) -> ContextFreeGrammar:
    """Equivalent grammar whose only ε-production (if any) is on a fresh start symbol."""
    prods = _drop_epsilon(g)
    start = Fresh("start", 0)
    prods.insert(0, (start, (g.start,)))
    if g.start in g.nullable:
        prods.insert(1, (start, ()))
    return ContextFreeGrammar(g.nonterminals | {start}, g.terminals, tuple(prods), start)


def eliminate_units(g: ContextFreeGrammar) -> ContextFreeGrammar:
    """Remove productions ``A -> B``; per-nonterminal languages are preserved."""
    units = defaultdict(set)
    for h, b in g.productions:
        if len(b) == 1 and not g.is_terminal(b[0]):
            units[h].add(b[0])
    closure = {}
    for a in g.nonterminals:
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for y in units[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        closure[a] = seen
    prods = []
    for a in sorted(g.nonterminals, key=str):
        for b_nt in sorted(closure[a], key=str):
            for body in g.by_head.get(b_nt, ()):
                if len(body) == 1 and not g.is_terminal(body[0]):
                    continue
                prods.append((a, body))
    return ContextFreeGrammar(g.nonterminals, g.terminals, tuple(prods), g.start)


def trim(g: ContextFreeGrammar) -> ContextFreeGrammar:
    """Drop non-generating and unreachable nonterminals (the start is always kept)."""
    gen = g.generating
    prods = [(h, b) for h, b in g.productions
             if h in gen and all(g.is_terminal(s) or s in gen for s in b)]
    by_head = defaultdict(list)
    for h, b in prods:
        by_head[h].append(b)
    reach = {g.start}
    stack = [g.start]
    while stack:
        x = stack.pop()
        for b in by_head[x]:
            for s in b:
                if not g.is_terminal(s) and s not in reach:
                    reach.add(s)
                    stack.append(s)
    prods = [(h, b) for h, b in prods if h in reach]
    return ContextFreeGrammar(frozenset(reach), g.terminals, tuple(prods), g.start)


@dataclass
class _NormalForm:
    """ε-free, unit-free, binary view of a grammar for CYK and enumeration."""

    grammar: ContextFreeGrammar
    nullable: frozenset
    unary: dict  # terminal -> heads
    binary: dict  # (X, Y) -> heads
    binary_by_head: dict  # head -> [(X, Y)]
    unary_by_head: dict  # head -> [terminal]

    @classmethod
    def of(cls, g: ContextFreeGrammar) -> _NormalForm:
        b = binarize(g)
        nf = eliminate_units(ContextFreeGrammar(b.nonterminals, b.terminals, tuple(_drop_epsilon(b)), b.start))
        unary = defaultdict(set)
        binary = defaultdict(set)
        binary_by_head = defaultdict(list)
        unary_by_head = defaultdict(list)
        for h, body in nf.productions:
            if len(body) == 1:
                unary[body[0]].add(h)
                unary_by_head[h].append(body[0])
            else:
                binary[body].add(h)
                binary_by_head[h].append(body)
        return cls(nf, g.nullable, dict(unary), dict(binary), dict(binary_by_head), dict(unary_by_head))

    def chart(self, w: Sequence[Symbol]) -> list[list[set]]:
        n = len(w)
        table = [[set() for _ in range(n + 1)] for _ in range(n + 1)]
        for i, s in enumerate(w):
            table[i][i + 1] = {s} | self.unary.get(s, set())
        for length in range(2, n + 1):
            for i in range(n - length + 1):
                j = i + length
                cell = table[i][j]
                for k in range(i + 1, j):
                    left, right = table[i][k], table[k][j]
                    if not left or not right:
                        continue
                    for x in left:
                        for y in right:
                            heads = self.binary.get((x, y))
                            if heads:
                                cell |= heads
        return table


def derives(g: ContextFreeGrammar, root: Hashable, w: Sequence[Symbol]) -> bool:
    """Whether ``root`` derives ``w`` (CYK on the normal form)."""
    if root not in g.nonterminals:
        raise GrammarError(f"unknown nonterminal {root}")
    w = tuple(w)
    nf = g.normal_form
    if not w:
        return root in nf.nullable
    return root in nf.chart(w)[0][len(w)]


def is_empty(g: ContextFreeGrammar) -> bool:
    return g.start not in g.generating


def shortest_word_length(g: ContextFreeGrammar) -> Optional[int]:
    """Length of a shortest word of L(g), or None if the language is empty."""
    best: dict = {}
    changed = True
    while changed:
        changed = False
        for h, b in g.productions:
            total = 0
            for s in b:
                if g.is_terminal(s):
                    total += 1
                elif s in best:
                    total += best[s]
                else:
                    break
            else:
                if total < best.get(h, total + 1):
                    best[h] = total
                    changed = True
    return best.get(g.start)


def enumerate_words(g: ContextFreeGrammar, max_length: int, max_words: Optional[int] = None) -> Iterator[tuple]:
    """Distinct words of L(g) by length, then lexicographically in terminal order.

    Words are built bottom-up one length tier at a time, so each tier is
    finite and computed once.
    """
    if max_words is not None and max_words <= 0:
        return
    emitted = 0
    if g.start in g.nullable:
        yield ()
        emitted += 1
        if max_words is not None and emitted >= max_words:
            return
    t = trim(g)
    if is_empty(t) or max_length < 1:
        return
    nf = t.normal_form
    rank = {s: i for i, s in enumerate(t.terminals)}
    # only nonterminals reachable from the start in the normal form matter
    reach = {t.start}
    stack = [t.start]
    while stack:
        x = stack.pop()
        for body in nf.binary_by_head.get(x, ()):
            for s in body:
                if not t.is_terminal(s) and s not in reach:
                    reach.add(s)
                    stack.append(s)
    words: dict[Hashable, list[set]] = {a: [set(), set()] for a in reach}
    for a in reach:
        for s in nf.unary_by_head.get(a, ()):
            words[a][1].add((s,))

    def of(x, k: int) -> set:
        if t.is_terminal(x):
            return {(x,)} if k == 1 else set()
        return words[x][k]

    for length in range(1, max_length + 1):
        if length > 1:
            for a in reach:
                tier = set()
                for x, y in nf.binary_by_head.get(a, ()):
                    for k in range(1, length):
                        left = of(x, k)
                        if not left:
                            continue
                        right = of(y, length - k)
                        for u in left:
                            for v in right:
                                tier.add(u + v)
                words[a].append(tier)
        for w in sorted(words[t.start][length], key=lambda w: [rank[s] for s in w]):
            yield w
            emitted += 1
            if max_words is not None and emitted >= max_words:
                return


# --------------------------------------------------------------------------
# intersection


def intersect_cfg_nfa(g: ContextFreeGrammar, nfa: FiniteAutomaton) -> ContextFreeGrammar:
    """Grammar for L(g) ∩ L(nfa) over triples ``(p, A, q)``.

    ``g`` must be binarized and ``nfa`` epsilon-free.  Triples are built
    top-down from the initial state, Earley style: ``(p, A, q)`` exists only
    if ``A`` is predicted at ``p`` and derives a word leading from ``p`` to
    ``q``.  The result is trimmed.
    """
    prods: dict = {}
    _earley_product(g, nfa, prods)
    start = Fresh("product", 0)
    roots = [((nfa.initial, g.start, f),) for f in sorted(nfa.accepting)]
    heads = {h for h, _ in prods}
    top = {(start, body): None for body in roots if body[0] in heads}
    top.update(prods)
    nts = {start} | heads
    return trim(ContextFreeGrammar(frozenset(nts), g.terminals, tuple(top), start))


def intersection_is_empty(g: ContextFreeGrammar, nfa: FiniteAutomaton) -> bool:
    """Emptiness of L(g) ∩ L(nfa) without building the product grammar.

    Same preconditions as :func:`intersect_cfg_nfa`; stops at the first
    accepting completion.
    """
    return not _earley_product(g, nfa, None)


def _earley_product(g: ContextFreeGrammar, nfa: FiniteAutomaton, prods: Optional[dict]) -> bool:
    """Chart of the predictive product; fills ``prods`` when given, else stops early.

    Returns whether the start symbol spans the initial state to an
    accepting one.
    """
    if any(len(b) > 2 for _, b in g.productions):
        raise GrammarError("intersect_cfg_nfa needs a binarized grammar")
    if nfa.has_epsilon:
        raise GrammarError("intersect_cfg_nfa needs an epsilon-free automaton")

    is_t = g.is_terminal
    by_head = g.by_head
    delta: dict[tuple, list] = defaultdict(list)
    for p, a, q in sorted(nfa.transitions, key=lambda t: (t[0], t[2])):
        delta[(p, a)].append(q)
    record = prods is not None
    goal = (nfa.initial, g.start)
    accepting = nfa.accepting

    predicted: set = set()
    ends: dict[tuple, list] = defaultdict(list)     # (p, A) -> completed end states
    ends_set: dict[tuple, set] = defaultdict(set)
    waiting: dict[tuple, list] = defaultdict(list)  # (q, X) -> [(head, body, origin, first)]
    agenda: list = []

    class Found(Exception):
        pass

    def sym(p, x, q):
        return x if is_t(x) else (p, x, q)

    def complete(p, head, q, body):
        if record:
            prods[((p, head, q), body)] = None
        if q not in ends_set[(p, head)]:
            ends_set[(p, head)].add(q)
            ends[(p, head)].append(q)
            agenda.append((False, p, head, q))
            if not record and (p, head) == goal and q in accepting:
                raise Found

    def after_first(head, body, origin, mid):
        """``body[0]`` spans origin..mid; continue with the rest of the body."""
        first = sym(origin, body[0], mid)
        if len(body) == 1:
            complete(origin, head, mid, (first,))
            return
        second = body[1]
        if is_t(second):
            for q in delta.get((mid, second), ()):
                complete(origin, head, q, (first, second))
        else:
            waiting[(mid, second)].append((head, body, origin, first))
            predict(mid, second)
            for q in list(ends.get((mid, second), ())):
                complete(origin, head, q, (first, (mid, second, q)))

    def predict(p, a):
        if (p, a) not in predicted:
            predicted.add((p, a))
            agenda.append((True, p, a, None))

    try:
        predict(nfa.initial, g.start)
        while agenda:
            is_prediction, p, a, q = agenda.pop()
            if is_prediction:
                for body in by_head.get(a, ()):
                    if not body:
                        complete(p, a, p, ())
                        continue
                    x = body[0]
                    if is_t(x):
                        for mid in delta.get((p, x), ()):
                            after_first(a, body, p, mid)
                    else:
                        waiting[(p, x)].append((a, body, p, None))
                        predict(p, x)
                        for mid in list(ends.get((p, x), ())):
                            after_first(a, body, p, mid)
            else:
                # (p, a, q) just completed: wake everything waiting for a at p
                for head, body, origin, first in list(waiting.get((p, a), ())):
                    if first is None:
                        after_first(head, body, origin, q)
                    else:
                        complete(origin, head, q, (first, (p, a, q)))
    except Found:
        return True
    return bool(ends_set[goal] & accepting)
