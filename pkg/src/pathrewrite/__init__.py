"""Equivalent rewritings of atomic queries over path views with binding patterns.

A view (path function) walks a chain of binary relations from an input
value; plans chain view calls.  Given unary inclusion dependencies, the
package decides whether some plan returns exactly the answers of a query
``r(a, x)``, enumerates such plans, and checks individual plans.
"""
from .chase import (
    ChaseInstance,
    Instance,
    LazyChase,
    brute_force_search,
    chase,
    evaluate,
    loop_holds,
    oracle_equivalent,
    path_endpoints,
)
from .grammar import build_forward_backward_grammar, loop_word_derivable
from .instances import InputError, ProblemInstance, instance_from_json, instance_to_json, load_instance
from .languages import (
    ContextFreeGrammar,
    FiniteAutomaton,
    binarize,
    derives,
    eliminate_epsilon,
    enumerate_words,
    intersect_cfg_nfa,
    is_empty,
    regex_to_nfa,
)
from .planlang import (
    AnnotatedSegment,
    ReverseTransducer,
    build_plan_regex,
    build_reverse_transducer,
    compute_segments,
    reverse_transform,
)
from .plans import (
    CONST,
    Atom,
    ConjunctiveQuery,
    ExecutionPlan,
    FunctionCall,
    PathFunction,
    PlanError,
    RedundantPlanError,
    Var,
    extract_nonredundant,
    full_path_transform,
    is_well_filtering,
    minimal_filtering_plan,
    path_transform,
    plan_from_json,
    plan_semantics,
    plan_to_json,
    root_path,
    sequence_calls,
)
from .rewriter import RewritingProblem, enumerate_rewritings, exists_rewriting, filters_preserve_equivalence
from .schema import (
    AtomicQuery,
    RelationSymbol,
    SchemaError,
    UIDSet,
    alphabet_of,
    close_uids,
    derive_uids_from_functions,
    inverse,
    sym,
    word,
)
from .verifier import Verdict, verify_plan

__version__ = "0.1.0"
