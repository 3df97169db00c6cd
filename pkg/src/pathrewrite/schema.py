"""Relation symbols, unary inclusion dependencies and atomic queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


class SchemaError(ValueError):
    """Raised for references to relations outside the declared alphabet."""


@dataclass(frozen=True, order=True)
class RelationSymbol:
    """A binary relation name, possibly inverted (``r`` or ``r-``)."""

    base_name: str
    inverted: bool = False

    @property
    def inverse(self) -> RelationSymbol:
        return RelationSymbol(self.base_name, not self.inverted)

    @classmethod
    def parse(cls, text: str) -> RelationSymbol:
        """Parse the textual form; a trailing ``-`` marks the inverse."""
        text = text.strip()
        if text.endswith("-"):
            base, inverted = text[:-1], True
        else:
            base, inverted = text, False
        if not base or base.endswith("-"):
            raise SchemaError(f"malformed relation symbol {text!r}")
        return cls(base, inverted)

    def __str__(self) -> str:
        return self.base_name + ("-" if self.inverted else "")

    def __repr__(self) -> str:
        return f"RelationSymbol({str(self)!r})"


def inverse(s: RelationSymbol) -> RelationSymbol:
    return s.inverse


def sym(text: str) -> RelationSymbol:
    """Shorthand for :meth:`RelationSymbol.parse`."""
    return RelationSymbol.parse(text)


def word(text: str) -> tuple[RelationSymbol, ...]:
    """Parse a space- or dot-separated word such as ``"s t t- s-"``."""
    parts = text.replace(".", " ").split()
    return tuple(RelationSymbol.parse(p) for p in parts)


def format_word(w: Iterable[RelationSymbol]) -> str:
    return " ".join(str(s) for s in w)


def alphabet_of(relations: Iterable[str | RelationSymbol]) -> tuple[RelationSymbol, ...]:
    """Forward and inverse symbols for the given relation names, in declaration order."""
    out: list[RelationSymbol] = []
    for r in relations:
        s = r if isinstance(r, RelationSymbol) else RelationSymbol.parse(r)
        fwd = RelationSymbol(s.base_name, False)
        for t in (fwd, fwd.inverse):
            if t not in out:
                out.append(t)
    return tuple(out)


Pair = tuple[RelationSymbol, RelationSymbol]


@dataclass(frozen=True)
class UIDSet:
    """A set of unary inclusion dependencies ``r ~> s``, closed under implication.

    Instances are built by :func:`close_uids`; ``alphabet`` keeps declaration
    order so downstream grammars are deterministic.
    """

    pairs: frozenset[Pair]
    alphabet: tuple[RelationSymbol, ...] = field(default=())

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def implied_by(self, r: RelationSymbol) -> list[RelationSymbol]:
        """All ``s`` with ``r ~> s``, in alphabet order."""
        return [s for s in self.alphabet if (r, s) in self.pairs]

    def declared(self) -> list[Pair]:
        """Non-reflexive pairs, sorted; handy for serialization."""
        return sorted(p for p in self.pairs if p[0] != p[1])


def close_uids(declared: Iterable[Pair], alphabet: Iterable[RelationSymbol]) -> UIDSet:
    """Least reflexive-transitive superset of ``declared`` over ``alphabet``."""
    alpha = tuple(dict.fromkeys(alphabet))
    known = set(alpha)
    pairs: set[Pair] = set()
    for r, s in declared:
        for t in (r, s):
            if t not in known:
                raise SchemaError(f"unknown relation symbol {t} in dependency {r} ~> {s}")
        pairs.add((r, s))
    pairs.update((r, r) for r in alpha)

    succ: dict[RelationSymbol, set[RelationSymbol]] = {r: set() for r in alpha}
    for r, s in pairs:
        succ[r].add(s)
    # Warshall over the (small) alphabet.
    for k in alpha:
        for i in alpha:
            if k in succ[i]:
                succ[i] |= succ[k]
    closed = frozenset((r, s) for r in alpha for s in succ[r])
    return UIDSet(closed, alpha)


def derive_uids_from_functions(functions) -> set[Pair]:
    """UIDs ``r ~> s`` witnessed by successive body atoms ``r-`` then ``s``.

    The middle variable of ``r1(x0, x1), r2(x1, x2)`` has an outgoing
    ``r1-`` fact and an outgoing ``r2`` fact.
    """
    out: set[Pair] = set()
    for f in functions:
        for left, right in zip(f.body, f.body[1:]):
            out.add((left.inverse, right))
    return out


@dataclass(frozen=True)
class AtomicQuery:
    """The query ``q(x) <- r(a, x)``."""

    relation: RelationSymbol
    input_constant: str
    output_name: str = "x"

    def __str__(self) -> str:
        return f"q({self.output_name}) <- {self.relation}({self.input_constant}, {self.output_name})"

    def check(self, alphabet: Iterable[RelationSymbol]) -> None:
        if self.relation not in set(alphabet):
            raise SchemaError(f"query relation {self.relation} is not in the schema")
