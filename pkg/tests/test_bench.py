import io
import json

import pytest

from pathrewrite.bench import (
    FUNCTIONS_SWEEP,
    SplitMix64,
    Sweep,
    answered_fraction,
    benchmark_queries,
    derive_seed,
    experiment_metadata,
    generate_instance,
    run_experiment,
    write_csv,
    write_metadata,
)
from pathrewrite.plans import PathFunction
from pathrewrite.rewriter import RewritingProblem
from pathrewrite.schema import alphabet_of, close_uids, word


def test_splitmix_reference_values():
    # first outputs for seed 1234567 from the reference C implementation
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(3)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
    ]


def test_splitmix_helpers_stay_in_range():
    rng = SplitMix64(5)
    xs = [rng.random() for _ in range(1000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    ks = [rng.randbelow(7) for _ in range(2000)]
    assert set(ks) == set(range(7))
    assert all(3 <= rng.randint(3, 5) <= 5 for _ in range(100))
    with pytest.raises(ValueError):
        rng.randbelow(0)


def test_derive_seed_separates_streams():
    seeds = {derive_seed(0, k, i) for k in range(5) for i in range(200)}
    assert len(seeds) == 1000
    assert derive_seed(1, 2) == derive_seed(1, 2)


def test_smallest_instance():
    functions, uids, alphabet = generate_instance(1, 1, 0.0, 1, seed=3)
    assert len(functions) == 1
    assert len(functions[0].body) == 1
    assert functions[0].output_positions == (1,)
    assert alphabet == alphabet_of(["r1"])


@pytest.mark.parametrize("seed", range(20))
def test_generated_instances_are_valid(seed):
    functions, uids, alphabet = generate_instance(7, 15, 0.2, 4, seed=seed)
    assert len(functions) == 15
    for f in functions:
        assert 1 <= len(f.body) <= 4
        assert f.output_positions[-1] == len(f.body)
        assert all(s in alphabet for s in f.body)
    assert close_uids(uids.pairs, alphabet).pairs == uids.pairs
    again = generate_instance(7, 15, 0.2, 4, seed=seed)
    assert again[0] == functions and again[1].pairs == uids.pairs


def test_generator_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate_instance(0, 3)
    with pytest.raises(ValueError):
        generate_instance(3, 3, p_existential=1.5)


def test_answered_fraction_examples():
    alpha = alphabet_of(["r"])
    uids = close_uids(set(), alpha)
    assert answered_fraction([], uids, alpha) == 0.0
    assert answered_fraction([PathFunction("f", word("r"), (1,))], uids, alpha) == 1.0
    assert [str(q.relation) for q in benchmark_queries(alpha)] == ["r"]
    assert [str(q.relation) for q in benchmark_queries(alpha, include_inverse=True)] == ["r", "r-"]


def test_empty_sweep_gives_empty_table():
    assert run_experiment(Sweep("functions", ()), 3, seed=1) == []
    assert write_csv([]) == "param,value,instances,answered_fraction\n"


def test_single_instance_run_is_reproducible():
    sweep = Sweep("functions", (5, 10), n_relations=4)
    a = write_csv(run_experiment(sweep, 1, seed=7))
    b = write_csv(run_experiment(sweep, 1, seed=7))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "param,value,instances,answered_fraction"
    assert len(lines) == 3
    param, value, n, frac = lines[1].split(",")
    assert (param, value, n) == ("functions", "5", "1")
    assert len(frac.split(".")[1]) == 6


def test_run_rejects_zero_instances():
    with pytest.raises(ValueError):
        run_experiment(FUNCTIONS_SWEEP, 0)


def test_unknown_sweep_parameter():
    with pytest.raises(ValueError):
        Sweep("depth", (1, 2))


def test_metadata_describes_the_generator():
    meta = experiment_metadata(FUNCTIONS_SWEEP, 200, 0)
    assert meta["values"] == [5, 10, 15, 20, 25]
    assert meta["rng"] == "splitmix64"
    assert meta["max_body"] == 4 and meta["seed"] == 0
    buf = io.StringIO()
    write_metadata(FUNCTIONS_SWEEP, 200, 0, buf)
    assert json.loads(buf.getvalue()) == meta


@pytest.mark.parametrize("seed", range(6))
def test_decision_agrees_with_enumeration(seed):
    functions, uids, alphabet = generate_instance(4, 6, 0.2, 3, seed=seed)
    for q in benchmark_queries(alphabet, include_inverse=True):
        problem = RewritingProblem(tuple(functions), uids, q)
        found = next(iter(problem.plans(max_plans=1)), None)
        assert problem.exists() == (found is not None)


def test_sweep_fraction_lies_strictly_between_bounds():
    rows = run_experiment(Sweep("relations", (7,), n_functions=15), 20, seed=0)
    assert 0.0 < rows[0].answered_fraction < 1.0
