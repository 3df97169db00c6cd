"""Ground truth by brute force: the chase of one fact, query evaluation and plan search.

Under unary inclusion dependencies the chase of ``r(a, b)`` is a tree in
which every element has at most one outgoing fact per symbol.  The lazy
variant materializes elements only when a query walks to them, which keeps
deep chases affordable.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Optional, Sequence

from .plans import (
    CONST,
    ConjunctiveQuery,
    ExecutionPlan,
    FunctionCall,
    PathFunction,
    PlanError,
    Var,
    is_well_filtering,
    plan_semantics,
)
from .schema import AtomicQuery, RelationSymbol, UIDSet

Fact = tuple[RelationSymbol, str, str]


class Instance:
    """A finite set of binary facts, closed under inverses."""

    def __init__(self, facts: Iterable[Fact]):
        closed: set[Fact] = set()
        for s, x, y in facts:
            closed.add((s, x, y))
            closed.add((s.inverse, y, x))
        self.facts = frozenset(closed)
        self._index: dict[tuple, list] = defaultdict(list)
        self._by_symbol: dict[RelationSymbol, list] = defaultdict(list)
        for s, x, y in sorted(self.facts, key=lambda f: (str(f[0]), f[1], f[2])):
            self._index[(s, x)].append(y)
            self._by_symbol[s].append((x, y))

    def successors(self, node: Hashable, s: RelationSymbol) -> Sequence:
        return self._index.get((s, node), ())

    def pairs(self, s: RelationSymbol) -> Sequence[tuple]:
        return self._by_symbol.get(s, ())

    @property
    def elements(self) -> set:
        return {x for _, x, _ in self.facts}

    def forward_facts(self) -> list[Fact]:
        """One fact per inverse pair, written with the forward symbol."""
        return sorted((f for f in self.facts if not f[0].inverted), key=lambda f: (str(f[0]), f[1], f[2]))

    def __len__(self) -> int:
        return len(self.facts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and self.facts == other.facts

    def __hash__(self) -> int:
        return hash(self.facts)


class ChaseInstance(Instance):
    def __init__(self, facts: Iterable[Fact], root: tuple[str, str], depth: int):
        super().__init__(facts)
        self.root = root
        self.depth = depth


def format_fact(f: Fact) -> str:
    s, x, y = f
    if s.inverted:
        s, x, y = s.inverse, y, x
    return f"{s}({x},{y})"


class LazyChase:
    """The chase of ``r(a, b)`` explored on demand.

    Elements other than ``a`` and ``b`` are ``(parent, symbol)`` pairs: the
    child created when ``parent`` needed an outgoing ``symbol`` fact.
    """

    def __init__(self, seed: RelationSymbol, uids: UIDSet, depth: Optional[int], a: str = "a", b: str = "b"):
        if a == b:
            raise ValueError("the two seed constants must differ")
        self.seed = seed
        self.uids = uids
        self.depth = depth
        self.a = a
        self.b = b
        self._implied: dict[RelationSymbol, frozenset] = {}

    def _up(self, s: RelationSymbol) -> frozenset:
        if s not in self._implied:
            self._implied[s] = frozenset(t for (u, t) in self.uids.pairs if u == s)
        return self._implied[s]

    def incoming(self, node) -> RelationSymbol:
        """The symbol of the fact linking ``node`` back towards the seed."""
        if node == self.a:
            return self.seed
        if node == self.b:
            return self.seed.inverse
        return node[1].inverse

    def node_depth(self, node) -> int:
        d = 0
        while isinstance(node, tuple):
            node = node[0]
            d += 1
        return d

    def successor(self, node, s: RelationSymbol):
        if node == self.a:
            if s == self.seed:
                return self.b
        elif node == self.b:
            if s == self.seed.inverse:
                return self.a
        elif not isinstance(node, tuple):
            return None
        elif s == node[1].inverse:
            return node[0]
        if s not in self._up(self.incoming(node)):
            return None
        if self.depth is not None and self.node_depth(node) >= self.depth:
            return None
        return (node, s)

    def successors(self, node, s: RelationSymbol) -> Sequence:
        nxt = self.successor(node, s)
        return () if nxt is None else (nxt,)

    def pairs(self, s: RelationSymbol):
        raise TypeError("a lazy chase cannot enumerate all facts of a relation")


def chase(seed_relation: RelationSymbol, uids: UIDSet, depth: int, a: str = "a", b: str = "b") -> ChaseInstance:
    """The chase of ``seed(a, b)``, breadth-first for ``depth`` rounds, with fresh constants ``n1, n2, ...``."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    lazy = LazyChase(seed_relation, uids, depth, a, b)
    names = (f"n{k}" for k in itertools.count(1))
    facts: list[Fact] = [(seed_relation, a, b)]
    name_of: dict = {a: a, b: b}
    order = list(uids.alphabet) or sorted({t for _, t in uids.pairs})
    frontier = [a, b]
    for _ in range(depth):
        nxt_frontier = []
        for node in frontier:
            incoming = lazy.incoming(node)
            for s in order:
                if s == incoming or (node == a and s == seed_relation):
                    continue
                child = lazy.successor(node, s)
                if child is None:
                    continue
                name = next(names)
                while name in (a, b):
                    name = next(names)
                name_of[child] = name
                facts.append((s, name_of[node], name))
                nxt_frontier.append(child)
        frontier = nxt_frontier
    return ChaseInstance(facts, (a, b), depth)


# --------------------------------------------------------------------------
# evaluation


def _order_atoms(cq: ConjunctiveQuery) -> list:
    """Atoms sorted so that each one touches an already bound term when possible."""
    remaining = list(cq.atoms)
    bound = {t for at in cq.atoms for t in (at.left, at.right) if not isinstance(t, Var)}
    ordered = []
    while remaining:
        pick = next((at for at in remaining if at.left in bound or at.right in bound), remaining[0])
        remaining.remove(pick)
        ordered.append(pick)
        bound.update((pick.left, pick.right))
    return ordered


def evaluate(cq: ConjunctiveQuery, inst) -> set:
    """Elements bound to the output variable in some match of ``cq`` on ``inst``."""
    atoms = _order_atoms(cq)
    results: set = set()

    def value(t, env):
        if isinstance(t, Var):
            return env.get(t)
        return t

    def search(k: int, env: dict):
        if k == len(atoms):
            results.add(env[cq.output_variable])
            return
        at = atoms[k]
        left, right = value(at.left, env), value(at.right, env)
        if left is not None:
            for y in inst.successors(left, at.relation):
                if right is not None and y != right:
                    continue
                if right is None:
                    env[at.right] = y
                    search(k + 1, env)
                    del env[at.right]
                else:
                    search(k + 1, env)
        elif right is not None:
            for x in inst.successors(right, at.relation.inverse):
                env[at.left] = x
                search(k + 1, env)
                del env[at.left]
        else:
            for x, y in inst.pairs(at.relation):
                if at.left == at.right and x != y:
                    continue
                env[at.left] = x
                env[at.right] = y
                search(k + 1, env)
                del env[at.left]
                env.pop(at.right, None)

    search(0, {})
    return results


def path_endpoints(inst, start, w: Sequence[RelationSymbol]) -> set:
    """Elements reachable from ``start`` along a path labelled ``w``."""
    current = {start}
    for s in w:
        current = {y for x in current for y in inst.successors(x, s)}
        if not current:
            break
    return current


def loop_holds(inst, a, w: Sequence[RelationSymbol]) -> bool:
    """Whether the loop query ``w(a, a)`` is satisfied."""
    return a in path_endpoints(inst, a, w)


def _fresh_b(a: str) -> str:
    return "b" if a != "b" else "b0"


def oracle_equivalent(
    plan: ExecutionPlan,
    query: AtomicQuery,
    functions: Iterable[PathFunction],
    uids: UIDSet,
    depth: int,
) -> bool:
    """Whether a well-filtering plan returns the seed answer ``b`` on the chase of ``r(a, b)``.

    Well-filtering already makes the plan contained in the query, so
    retrieving ``b`` is exactly the missing direction.
    """
    a = query.input_constant
    if plan.constant != a or not is_well_filtering(plan, query):
        raise PlanError("the oracle needs a well-filtering plan on the query constant")
    names = {f.name for f in functions}
    for call in plan.calls:
        if call.function.name not in names:
            raise PlanError(f"plan uses unknown function {call.function.name}")
    b = _fresh_b(a)
    inst = LazyChase(query.relation, uids, depth, a, b)
    return b in evaluate(plan_semantics(plan), inst)


def _walk(inst: LazyChase, start, body: Sequence[RelationSymbol]) -> Optional[list]:
    nodes = [start]
    for s in body:
        nxt = inst.successor(nodes[-1], s)
        if nxt is None:
            return None
        nodes.append(nxt)
    return nodes


def brute_force_search(
    functions: Sequence[PathFunction],
    uids: UIDSet,
    query: AtomicQuery,
    max_calls: int,
) -> Optional[ExecutionPlan]:
    """First equivalent chain-shaped plan with at most ``max_calls`` calls, fewest calls first.

    For each chain the filters are all free output positions that land on
    ``a`` in the chase: any other filter would lose the answer, and dropping
    one of these can only lose the query atom.
    """
    functions = list(functions)
    if not functions or max_calls < 1:
        return None
    a = query.input_constant
    b = _fresh_b(a)
    depth = max_calls * max(len(f.body) for f in functions) + 2
    inst = LazyChase(query.relation, uids, depth, a, b)

    def candidates(calls: list, walks: list) -> Iterator[ExecutionPlan]:
        k = len(calls) - 1
        f = calls[-1].function
        consumed = {c.input for c in calls if c.input != CONST}
        for p in f.output_positions:
            if walks[k][p] != b:
                continue
            filters = {}
            for i, c in enumerate(calls):
                for q in c.function.output_positions:
                    if (i, q) != (k, p) and (i, q) not in consumed and walks[i][q] == a:
                        filters[(i, q)] = a
            plan = ExecutionPlan(a, tuple(calls), (k, p)).with_filters(filters)
            if is_well_filtering(plan, query):
                yield plan

    def chains(n: int, calls: list, walks: list) -> Iterator[ExecutionPlan]:
        start = a if not calls else None
        for f in functions:
            if calls:
                prev = calls[-1].function
                inputs = [((len(calls) - 1, p), walks[-1][p]) for p in prev.output_positions]
            else:
                inputs = [(CONST, start)]
            for inp, node in inputs:
                nodes = _walk(inst, node, f.body)
                if nodes is None:
                    continue
                calls.append(FunctionCall(f, inp))
                walks.append(nodes)
                if len(calls) == n:
                    yield from candidates(calls, walks)
                else:
                    yield from chains(n, calls, walks)
                calls.pop()
                walks.pop()

    for n in range(1, max_calls + 1):
        for plan in chains(n, [], []):
            if oracle_equivalent(plan, query, functions, uids, depth):
                return plan
    return None
