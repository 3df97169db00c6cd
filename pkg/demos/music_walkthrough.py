"""Who sang "Jailhouse"?  Rewriting the query with three music web services.

Run with ``python demos/music_walkthrough.py``.
"""
from pathlib import Path

from pathrewrite import RewritingProblem, load_instance, plan_from_json, verify_plan
from pathrewrite.chase import chase, format_fact
from pathrewrite.instances import load_json
from pathrewrite.schema import format_word

DATA = Path(__file__).parent / "data"

inst = load_instance(DATA / "music.json")
problem = RewritingProblem(inst.functions, inst.uids, inst.query)
print("query:", inst.query)
print("dependencies:", ", ".join(f"{s}~>{t}" for s, t in sorted(inst.uids.declared(), key=str)))

# %% A rewriting exists when some plan skeleton is a forward-backward path.
print("\nrewriting exists:", problem.exists())
for w in problem.words(6):
    print("  skeleton:", format_word(w))

# %% Plans reconstructed from the skeletons, with any extra safe filters.
print("\nplans:")
for plan in problem.plans(max_plans=5):
    print(" ", plan)

# %% Checking the two plans one might write by hand.
for name in ("blue_plan", "green_plan"):
    plan = plan_from_json(load_json(DATA / f"{name}.json"), inst.functions_by_name)
    verdict = verify_plan(plan, inst.functions, inst.uids, inst.query)
    print(f"\n{name}: {plan}\n  -> {verdict.reason}")

# %% Why the blue plan works: in every database with the fact sang(m, Jailhouse),
# Jailhouse is on some album, and the album lists its songs with their singers.
print("\nchase of the query fact, two rounds:")
for fact in chase(inst.query.relation, inst.uids, 2, "Jailhouse", "m").forward_facts():
    print(" ", format_fact(fact))
