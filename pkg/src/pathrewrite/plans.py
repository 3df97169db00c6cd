"""Path functions, execution plans and the plan-level transformations.

Calls are indexed from 0 in plan order.  A variable of a call is addressed by
its body position: 0 is the input, ``i`` is the target of the ``i``-th atom.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

from .schema import AtomicQuery, RelationSymbol

Word = tuple[RelationSymbol, ...]
Position = tuple[int, int]  # (call index, body position)

CONST = "CONST"


class PlanError(ValueError):
    """Structurally invalid plan."""


class RedundantPlanError(PlanError):
    pass


class NotWellFilteringError(PlanError):
    pass


class NotMinimalFilteringError(PlanError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Var, str]


class Atom(NamedTuple):
    relation: RelationSymbol
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.relation}({self.left}, {self.right})"


@dataclass(frozen=True)
class ConjunctiveQuery:
    atoms: tuple[Atom, ...]
    output_variable: Var

    def __post_init__(self):
        if not any(self.output_variable in (at.left, at.right) for at in self.atoms):
            raise PlanError(f"output variable {self.output_variable} occurs in no atom")

    @property
    def skeleton(self) -> Word:
        return tuple(at.relation for at in self.atoms)

    def is_connected(self) -> bool:
        if not self.atoms:
            return True
        seen = {0}
        frontier = [0]
        while frontier:
            i = frontier.pop()
            terms = {self.atoms[i].left, self.atoms[i].right}
            for j, at in enumerate(self.atoms):
                if j not in seen and terms & {at.left, at.right}:
                    seen.add(j)
                    frontier.append(j)
        return len(seen) == len(self.atoms)

    def __str__(self) -> str:
        return f"q({self.output_variable}) <- " + ", ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class PathFunction:
    """``f(x0, outputs...) <- r1(x0, x1), ..., rn(x(n-1), xn)``."""

    name: str
    body: tuple[RelationSymbol, ...]
    output_positions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "output_positions", tuple(self.output_positions))
        n = len(self.body)
        if n < 1:
            raise PlanError(f"function {self.name} has an empty body")
        outs = self.output_positions
        if not outs:
            raise PlanError(f"function {self.name} has no output variable")
        if any(b <= a for a, b in zip(outs, outs[1:])):
            raise PlanError(f"output positions of {self.name} must be strictly increasing")
        if outs[0] < 1 or outs[-1] > n:
            raise PlanError(f"output positions of {self.name} must lie in 1..{n}")

    def __len__(self) -> int:
        return len(self.body)

    def __str__(self) -> str:
        names = ["x0"] + [f"x{i}" for i in self.output_positions]
        atoms = ", ".join(f"{r}(x{i}, x{i + 1})" for i, r in enumerate(self.body))
        return f"{self.name}({', '.join(names)}) <- {atoms}"


@dataclass(frozen=True)
class FunctionCall:
    function: PathFunction
    input: Union[str, Position] = CONST
    filters: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        filters = self.filters
        if isinstance(filters, Mapping):
            filters = filters.items()
        object.__setattr__(self, "filters", tuple(sorted((int(p), c) for p, c in filters)))
        if self.input != CONST:
            object.__setattr__(self, "input", tuple(self.input))
        for p, _ in self.filters:
            if p not in self.function.output_positions:
                raise PlanError(f"filter on position {p} of {self.function.name}, which is not an output")

    @property
    def filter_map(self) -> dict[int, str]:
        return dict(self.filters)

    def with_filters(self, filters: Mapping[int, str] | Iterable[tuple[int, str]]) -> FunctionCall:
        return replace(self, filters=tuple(dict(filters).items()))


@dataclass(frozen=True)
class ExecutionPlan:
    """``pi_a(x) = c_0, ..., c_k``; ``output`` addresses the plan's output variable."""

    constant: str
    calls: tuple[FunctionCall, ...]
    output: Position

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))
        object.__setattr__(self, "output", tuple(self.output))
        if not self.calls:
            raise PlanError("a plan needs at least one call")
        for i, call in enumerate(self.calls):
            if call.input == CONST:
                continue
            j, p = call.input
            if not 0 <= j < i:
                raise PlanError(f"call {i} reads from call {j}, which is not an earlier call")
            src = self.calls[j]
            if p not in src.function.output_positions:
                raise PlanError(f"call {i} reads position {p} of {src.function.name}, which is not an output")
            if p in src.filter_map:
                raise PlanError(f"call {i} reads a filtered position of call {j}")
        ci, p = self.output
        if not 0 <= ci < len(self.calls):
            raise PlanError(f"plan output refers to missing call {ci}")
        call = self.calls[ci]
        if p not in call.function.output_positions:
            raise PlanError(f"plan output {p} is not an output of {call.function.name}")
        if p in call.filter_map:
            raise PlanError("plan output position is filtered")

    @property
    def filters(self) -> list[tuple[Position, str]]:
        return [((i, p), c) for i, call in enumerate(self.calls) for p, c in call.filters]

    def unfiltered(self) -> ExecutionPlan:
        return replace(self, calls=tuple(replace(c, filters=()) for c in self.calls))

    def with_filters(self, filters: Mapping[Position, str]) -> ExecutionPlan:
        """Replace every filter of the plan by ``filters``."""
        per_call: dict[int, dict[int, str]] = {}
        for (i, p), c in filters.items():
            per_call.setdefault(i, {})[p] = c
        calls = tuple(call.with_filters(per_call.get(i, {})) for i, call in enumerate(self.calls))
        return replace(self, calls=calls)

    def consumed_positions(self) -> set[Position]:
        return {c.input for c in self.calls if c.input != CONST}

    def key(self):
        """Hashable structural identity, used for deduplication."""
        return (
            self.constant,
            tuple((c.function.name, c.input, c.filters) for c in self.calls),
            self.output,
        )

    def __str__(self) -> str:
        names: dict[Position, str] = {}
        counter = itertools.count(1)
        out = []
        for i, call in enumerate(self.calls):
            if call.input == CONST:
                args = [self.constant]
            else:
                args = [names[call.input]]
            fm = call.filter_map
            for p in call.function.output_positions:
                if p in fm:
                    args.append(fm[p])
                elif (i, p) == self.output:
                    args.append("x")
                else:
                    names[(i, p)] = f"y{next(counter)}"
                    args.append(names[(i, p)])
            out.append(f"{call.function.name}({', '.join(args)})")
        return ", ".join(out)


# --------------------------------------------------------------------------
# semantics


def _call_terms(plan: ExecutionPlan) -> list[list[Term]]:
    """Terms bound to positions 0..n of every call, with a monotone counter for fresh variables."""
    counter = itertools.count(1)
    terms: list[list[Term]] = []
    for i, call in enumerate(plan.calls):
        if call.input == CONST:
            first: Term = plan.constant
        else:
            j, p = call.input
            if j >= i:
                raise PlanError(f"dangling input of call {i}")
            first = terms[j][p]
        fm = call.filter_map
        row: list[Term] = [first]
        for p in range(1, len(call.function) + 1):
            row.append(fm[p] if p in fm else Var(f"y{next(counter)}"))
        terms.append(row)
    return terms


def plan_semantics(plan: ExecutionPlan) -> ConjunctiveQuery:
    terms = _call_terms(plan)
    atoms = []
    for call, row in zip(plan.calls, terms):
        for k, r in enumerate(call.function.body):
            atoms.append(Atom(r, row[k], row[k + 1]))
    ci, p = plan.output
    out = terms[ci][p]
    assert isinstance(out, Var)
    return ConjunctiveQuery(tuple(atoms), out)


def _chain(plan: ExecutionPlan, last: Optional[int] = None) -> list[int]:
    """Indices of the calls feeding ``last`` (default: the output call), in order."""
    i = plan.output[0] if last is None else last
    chain = [i]
    while plan.calls[i].input != CONST:
        i = plan.calls[i].input[0]
        chain.append(i)
    return chain[::-1]


def redundancy_reason(plan: ExecutionPlan) -> Optional[str]:
    """Why ``plan`` is redundant, or None when it is not."""
    if not any(c.input == CONST for c in plan.calls):
        return "no call uses the plan constant as input"
    chain = _chain(plan)
    extra = sorted(set(range(len(plan.calls))) - set(chain))
    if extra:
        names = ", ".join(f"{i}:{plan.calls[i].function.name}" for i in extra)
        return f"calls contributing nothing to the output: {names}"
    return None


def is_nonredundant(plan: ExecutionPlan) -> bool:
    return redundancy_reason(plan) is None


def sequence_calls(plan: ExecutionPlan) -> list[FunctionCall]:
    """Order the calls of a non-redundant plan as a chain from the constant to the output."""
    reason = redundancy_reason(plan)
    if reason is not None:
        raise RedundantPlanError(f"redundant plan: {reason}")
    return [plan.calls[i] for i in _chain(plan)]


def used_positions(plan: ExecutionPlan) -> list[int]:
    """For a non-redundant plan, the position of each call that feeds the next call or the output."""
    calls = sequence_calls(plan)
    used = [c.input[1] for c in calls[1:]]
    used.append(plan.output[1])
    return used


def _restrict(plan: ExecutionPlan, keep: Sequence[int]) -> ExecutionPlan:
    """Sub-plan made of the calls ``keep`` (increasing indices), re-indexed."""
    new_index = {old: new for new, old in enumerate(keep)}
    calls = []
    for old in keep:
        call = plan.calls[old]
        if call.input != CONST:
            j, p = call.input
            call = replace(call, input=(new_index[j], p))
        calls.append(call)
    ci, p = plan.output
    return ExecutionPlan(plan.constant, tuple(calls), (new_index[ci], p))


# --------------------------------------------------------------------------
# filtering


def _qualifying_atom(cq: ConjunctiveQuery, query: AtomicQuery) -> Optional[int]:
    """Index of the last atom r(a, x) or r-(x, a) with x the output variable."""
    r, a, x = query.relation, query.input_constant, cq.output_variable
    found = None
    for k, at in enumerate(cq.atoms):
        if (at.relation == r and at.left == a and at.right == x) or (
            at.relation == r.inverse and at.left == x and at.right == a
        ):
            found = k
    return found


def is_well_filtering(plan: ExecutionPlan, query: AtomicQuery) -> bool:
    a = query.input_constant
    if any(c != a for _, c in plan.filters):
        return False
    return _qualifying_atom(plan_semantics(plan), query) is not None


_PROBE = "\x00filter"


def minimal_filter_position(plan: ExecutionPlan, query: AtomicQuery) -> Optional[Position]:
    """Greatest (call, position) whose filter to ``a`` yields the query atom.

    Positions are scanned call by call from the last one, and within a call
    from the last output.  A filter qualifies only if it is one end of the
    atom ``r(a, x)`` or ``r-(x, a)``; a filter elsewhere would merely shrink
    the plan's answers.
    """
    base = plan.unfiltered()
    consumed = base.consumed_positions()
    probe = AtomicQuery(query.relation, _PROBE, query.output_name)
    for i in reversed(range(len(base.calls))):
        for p in reversed(base.calls[i].function.output_positions):
            pos = (i, p)
            if pos == base.output or pos in consumed:
                continue
            if _qualifying_atom(plan_semantics(base.with_filters({pos: _PROBE})), probe) is not None:
                return pos
    return None


def minimal_filtering_plan(plan: ExecutionPlan, query: AtomicQuery) -> ExecutionPlan:
    if not is_well_filtering(plan, query):
        raise NotWellFilteringError("plan is not well-filtering for the query")
    pos = minimal_filter_position(plan, query)
    base = plan.unfiltered()
    if pos is None:
        # the query atom comes from the plan constant itself
        return base
    return base.with_filters({pos: query.input_constant})


def extract_nonredundant(plan: ExecutionPlan, query: AtomicQuery) -> ExecutionPlan:
    """Keep only the calls feeding the output, as long as they still carry the query atom."""
    if not is_well_filtering(plan, query):
        raise NotWellFilteringError("plan is not well-filtering for the query")
    sub = _restrict(plan, _chain(plan))
    if not is_well_filtering(sub, query):
        raise RedundantPlanError(
            "the query atom is only produced by a call consuming the plan output; "
            "no non-redundant sub-plan carries it"
        )
    return sub


def root_path(plan: ExecutionPlan, position: Position) -> Word:
    """Relations on the unique path from the plan constant to the variable at ``position``."""
    ci, p = position
    if not 0 <= ci < len(plan.calls):
        raise PlanError(f"no call {ci} in plan")
    call = plan.calls[ci]
    if not 1 <= p <= len(call.function):
        raise PlanError(f"position {p} is not an output variable of {call.function.name}")
    chain = _chain(plan, ci)
    out: list[RelationSymbol] = []
    for j, nxt in zip(chain, chain[1:]):
        out.extend(plan.calls[j].function.body[: plan.calls[nxt].input[1]])
    out.extend(call.function.body[:p])
    return tuple(out)


# --------------------------------------------------------------------------
# path transformation


def _check_minimal(plan: ExecutionPlan, query: AtomicQuery) -> None:
    sequence_calls(plan)
    if minimal_filtering_plan(plan, query).key() != plan.key():
        raise NotMinimalFilteringError("plan is not minimal filtering")


def path_transform(plan: ExecutionPlan, query: AtomicQuery) -> ConjunctiveQuery:
    """Rewrite a non-redundant minimal filtering plan into an equivalent path query."""
    _check_minimal(plan, query)
    a, r = query.input_constant, query.relation
    counter = itertools.count(1)

    def fresh() -> Var:
        return Var(f"z{next(counter)}")

    chain = _chain(plan)
    used = used_positions(plan)
    atoms: list[Atom] = []
    current: Term = a
    for ci, p in zip(chain, used):
        body = plan.calls[ci].function.body
        m = len(body)
        nodes: list[Term] = [current] + [fresh() for _ in range(m)]
        atoms.extend(Atom(body[k], nodes[k], nodes[k + 1]) for k in range(m))
        here = nodes[m]
        for k in range(m, p, -1):
            back = fresh()
            atoms.append(Atom(body[k - 1].inverse, here, back))
            here = back
        current = here
    x = current
    assert isinstance(x, Var)

    last = plan.calls[chain[-1]]
    p = used[-1]
    body = last.function.body
    a_after = last.filter_map.get(p + 1) == a and p < len(body) and body[p] == r.inverse
    if a_after:
        # last atom is r(x1, x); bind x1 to the constant
        x1 = atoms[-1].left
        atoms = [Atom(at.relation, a if at.left == x1 else at.left, a if at.right == x1 else at.right)
                 for at in atoms]
    else:
        atoms.append(Atom(r.inverse, x, a))
    return ConjunctiveQuery(tuple(atoms), x)


def full_path_transform(plan: ExecutionPlan, query: AtomicQuery) -> Word:
    return path_transform(plan, query).skeleton


# --------------------------------------------------------------------------
# JSON


def plan_to_json(plan: ExecutionPlan) -> dict:
    calls = []
    for call in plan.calls:
        doc: dict = {
            "function": call.function.name,
            "input": CONST if call.input == CONST else list(call.input),
        }
        if call.filters:
            doc["filters"] = {str(p): c for p, c in call.filters}
        calls.append(doc)
    return {"constant": plan.constant, "calls": calls, "output": list(plan.output)}


def plan_from_json(doc: Mapping, functions: Mapping[str, PathFunction], constant: Optional[str] = None) -> ExecutionPlan:
    """Inverse of :func:`plan_to_json`; ``constant`` is used when the document carries none."""
    try:
        calls = []
        for c in doc["calls"]:
            name = c["function"]
            if name not in functions:
                raise PlanError(f"unknown function {name!r}")
            inp = c.get("input", CONST)
            if inp != CONST:
                if not (isinstance(inp, (list, tuple)) and len(inp) == 2):
                    raise PlanError(f"malformed input {inp!r}")
                inp = (int(inp[0]), int(inp[1]))
            filters = {int(p): str(v) for p, v in (c.get("filters") or {}).items()}
            calls.append(FunctionCall(functions[name], inp, filters))
        out = doc["output"]
        const = doc.get("constant", constant)
        if const is None:
            raise PlanError("plan has no constant")
        return ExecutionPlan(const, tuple(calls), (int(out[0]), int(out[1])))
    except (KeyError, TypeError) as exc:
        raise PlanError(f"malformed plan document: {exc}") from exc


def iter_positions(plan: ExecutionPlan) -> Iterator[Position]:
    for i, call in enumerate(plan.calls):
        for p in call.function.output_positions:
            yield (i, p)
