"""The grammar of forward-backward paths for an atomic query.

``B_s`` generates the loops that can be walked from any element having an
outgoing ``s`` fact, and ``L_s`` a single excursion ``s ... s-``.  A word
derived from ``S`` reads ``r`` from the constant, possibly followed by a
loop at the answer and ``r-`` back to the constant.
"""
from __future__ import annotations

from typing import Iterable

from .languages import ContextFreeGrammar, derives
from .schema import AtomicQuery, RelationSymbol, SchemaError, UIDSet

START = "S"


def loop_nonterminal(s: RelationSymbol) -> str:
    return f"B_{s}"


def excursion_nonterminal(s: RelationSymbol) -> str:
    return f"L_{s}"


def build_forward_backward_grammar(
    alphabet: Iterable[RelationSymbol], uids: UIDSet, query: AtomicQuery
) -> ContextFreeGrammar:
    alpha = tuple(dict.fromkeys(alphabet))
    query.check(alpha)
    known = set(alpha)
    for s, t in uids:
        if s not in known or t not in known:
            raise SchemaError(f"dependency {s} ~> {t} uses a symbol outside the alphabet")
    for s in alpha:
        if s.inverse not in known:
            raise SchemaError(f"alphabet lacks {s.inverse}, the inverse of {s}")

    B, L = loop_nonterminal, excursion_nonterminal
    r = query.relation
    prods = [
        (START, (B(r), r)),
        (START, (B(r), r, B(r.inverse), r.inverse)),
    ]
    rank = {s: i for i, s in enumerate(alpha)}
    for s, t in sorted(uids.pairs, key=lambda p: (rank[p[0]], rank[p[1]])):
        prods.append((B(s), (B(s), L(t))))
    prods.extend((B(s), ()) for s in alpha)
    prods.extend((L(s), (s, B(s.inverse), s.inverse)) for s in alpha)

    nonterminals = {START} | {B(s) for s in alpha} | {L(s) for s in alpha}
    return ContextFreeGrammar(frozenset(nonterminals), alpha, tuple(prods), START)


def loop_word_derivable(g: ContextFreeGrammar, query: AtomicQuery, w) -> bool:
    """Whether the loop ``w`` from the constant back to itself is implied by the query fact."""
    return derives(g, loop_nonterminal(query.relation), tuple(w))
