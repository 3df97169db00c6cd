"""From a plan to its skeleton word and back.

Run with ``python demos/transformation_round_trip.py``.
"""
from pathrewrite import (
    CONST,
    AtomicQuery,
    ExecutionPlan,
    FunctionCall,
    PathFunction,
    compute_segments,
    full_path_transform,
    plan_semantics,
    reverse_transform,
    sym,
    word,
)
from pathrewrite.planlang import build_reverse_transducer
from pathrewrite.schema import format_word

f1 = PathFunction("f1", word("s t"), (1,))
f2 = PathFunction("f2", word("s- r u"), (1, 2))
query = AtomicQuery(sym("r"), "a")

# %% f1 walks s then t from a; f2 comes back along s- to a, then reads r.
plan = ExecutionPlan("a", (FunctionCall(f1, CONST), FunctionCall(f2, (0, 1), {1: "a"})), (1, 2))
print("plan:     ", plan)
print("semantics:", plan_semantics(plan))

# %% Each call contributes its body and the way back to the output it hands
# on; the query atom r(a, x) is closed off with r-.
w = full_path_transform(plan, query)
print("skeleton: ", format_word(w))

# %% The transducer reads the word and writes the function names and the
# output positions used.
segments = compute_segments([f1, f2], query)
for seg in segments:
    print(f"  segment {seg.function.name}/{seg.position}: {format_word(seg.word):<18} final={seg.final}")
print("tapes:    ", build_reverse_transducer(segments, query).run(w))
print("recovered:", [str(p) for p in reverse_transform(w, segments, query)])
