"""How often random path views can answer an atomic query.

A small version of the sweeps the ``pathrewrite bench`` command runs; pass
``--instances 200`` on the command line for the full-size experiment.

Run with ``python demos/answered_queries_sweep.py``.
"""
import sys

from pathrewrite.bench import FUNCTIONS_SWEEP, RELATIONS_SWEEP, run_experiment, write_csv

N = 20

# %% More relations spread the same number of functions thinner.
rows = run_experiment(RELATIONS_SWEEP, N, seed=0)
write_csv(rows, sys.stdout)

# %% More functions give more ways to walk away from the constant and back.
rows = run_experiment(FUNCTIONS_SWEEP, N, seed=0)
write_csv(rows, sys.stdout)

for row in rows:
    print(f"{row.value:>3} functions  {'#' * round(40 * row.answered_fraction)}")
