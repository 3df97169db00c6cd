"""Random instances and the answered-query sweeps.

Randomness comes from a small SplitMix64 generator so that a seed names
the same instances on every platform and Python version.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .plans import PathFunction
from .rewriter import exists_rewriting
from .schema import AtomicQuery, RelationSymbol, UIDSet, alphabet_of, close_uids, derive_uids_from_functions

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Sebastiano Vigna's SplitMix64; one 64-bit state word."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection so there is no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.randbelow(hi - lo + 1)

    def choice(self, seq: Sequence):
        return seq[self.randbelow(len(seq))]


def derive_seed(*parts: int) -> int:
    """Mix integers into one seed, so instance ``i`` of sweep point ``k`` gets its own stream."""
    state = 0
    for part in parts:
        state = SplitMix64(state ^ (part & MASK64)).next_u64()
    return state


def generate_functions(
    n_relations: int,
    n_functions: int,
    p_existential: float,
    max_body: int,
    rng: SplitMix64,
) -> tuple[list[PathFunction], tuple[RelationSymbol, ...]]:
    alphabet = alphabet_of([f"r{k}" for k in range(1, n_relations + 1)])
    functions = []
    for k in range(n_functions):
        n = rng.randint(1, max_body)
        body = tuple(rng.choice(alphabet) for _ in range(n))
        outputs = [i for i in range(1, n) if rng.random() >= p_existential]
        outputs.append(n)  # the last variable is always returned
        functions.append(PathFunction(f"f{k}", body, tuple(outputs)))
    return functions, alphabet


def generate_instance(
    n_relations: int,
    n_functions: int,
    p_existential: float = 0.2,
    max_body: int = 4,
    seed: int = 0,
) -> tuple[list[PathFunction], UIDSet, tuple[RelationSymbol, ...]]:
    """Random path functions and the dependencies their bodies witness."""
    if n_relations < 1 or n_functions < 0 or max_body < 1:
        raise ValueError("need at least one relation, a non-negative function count and max_body >= 1")
    if not 0.0 <= p_existential <= 1.0:
        raise ValueError("p_existential must lie in [0, 1]")
    rng = SplitMix64(seed)
    functions, alphabet = generate_functions(n_relations, n_functions, p_existential, max_body, rng)
    uids = close_uids(derive_uids_from_functions(functions), alphabet)
    return functions, uids, alphabet


def benchmark_queries(alphabet: Iterable[RelationSymbol], include_inverse: bool = False, constant: str = "c") -> list[AtomicQuery]:
    return [AtomicQuery(s, constant) for s in alphabet if include_inverse or not s.inverted]


def answered_fraction(
    functions: Sequence[PathFunction],
    uids: UIDSet,
    alphabet: Iterable[RelationSymbol],
    include_inverse: bool = False,
) -> float:
    """Share of the queries ``r(c, x)`` that have an equivalent rewriting."""
    queries = benchmark_queries(alphabet, include_inverse)
    if not queries:
        return 0.0
    answered = sum(exists_rewriting(functions, uids, q) for q in queries)
    return answered / len(queries)


@dataclass(frozen=True)
class Sweep:
    """One parameter varied over ``values`` while the others stay fixed."""

    param: str  # "relations", "functions" or "p"
    values: tuple
    n_relations: int = 7
    n_functions: int = 15
    p_existential: float = 0.2
    max_body: int = 4
    include_inverse: bool = False

    def __post_init__(self):
        if self.param not in ("relations", "functions", "p"):
            raise ValueError(f"unknown sweep parameter {self.param!r}")
        object.__setattr__(self, "values", tuple(self.values))

    def point(self, value) -> dict:
        params = {"n_relations": self.n_relations, "n_functions": self.n_functions, "p_existential": self.p_existential}
        key = {"relations": "n_relations", "functions": "n_functions", "p": "p_existential"}[self.param]
        params[key] = value
        return params


RELATIONS_SWEEP = Sweep("relations", (5, 7, 9, 11, 13), n_functions=15)
FUNCTIONS_SWEEP = Sweep("functions", (5, 10, 15, 20, 25), n_relations=7)
P_SWEEP = Sweep("p", (0.0, 0.2, 0.4, 0.6, 0.8), n_relations=7, n_functions=15)
SWEEPS = {"relations": RELATIONS_SWEEP, "functions": FUNCTIONS_SWEEP, "p": P_SWEEP}


@dataclass(frozen=True)
class ResultRow:
    param: str
    value: object
    instances: int
    answered_fraction: float


def run_experiment(sweep: Sweep, n_instances: int, seed: int = 0, progress=None) -> list[ResultRow]:
    """Average answered fraction at each sweep point, instances seeded by (seed, point, index)."""
    if n_instances < 1:
        raise ValueError("n_instances must be at least 1")
    rows = []
    for k, value in enumerate(sweep.values):
        params = sweep.point(value)
        total = 0.0
        for i in range(n_instances):
            functions, uids, alphabet = generate_instance(
                params["n_relations"], params["n_functions"], params["p_existential"],
                sweep.max_body, derive_seed(seed, k, i),
            )
            total += answered_fraction(functions, uids, alphabet, sweep.include_inverse)
        rows.append(ResultRow(sweep.param, value, n_instances, total / n_instances))
        if progress is not None:
            progress(rows[-1])
    return rows


def write_csv(rows: Iterable[ResultRow], out: Optional[TextIO] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param", "value", "instances", "answered_fraction"])
    for row in rows:
        writer.writerow([row.param, row.value, row.instances, f"{row.answered_fraction:.6f}"])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def experiment_metadata(sweep: Sweep, n_instances: int, seed: int) -> dict:
    meta = asdict(sweep)
    meta["values"] = list(sweep.values)
    meta.update(
        n_instances=n_instances,
        seed=seed,
        rng="splitmix64",
        body_length="uniform on 1..max_body",
        body_symbols="uniform over relations and their inverses",
        outputs="last variable always an output; every other variable existential with probability p_existential",
        uids="closure of the dependencies witnessed by consecutive body atoms",
        queries="r(c, x) for every relation r" + (" and its inverse" if sweep.include_inverse else ""),
    )
    return meta


def write_metadata(sweep: Sweep, n_instances: int, seed: int, out: TextIO) -> None:
    json.dump(experiment_metadata(sweep, n_instances, seed), out, indent=2, sort_keys=True)
    out.write("\n")
