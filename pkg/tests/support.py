"""Fixtures and independent reference implementations shared by the tests."""
from __future__ import annotations

import itertools
import random
from collections import deque

from pathrewrite.languages import ContextFreeGrammar, FiniteAutomaton
from pathrewrite.plans import ExecutionPlan, FunctionCall, PathFunction
from pathrewrite.schema import AtomicQuery, RelationSymbol, alphabet_of, close_uids, derive_uids_from_functions, sym, word

# --------------------------------------------------------------------------
# the music example

GET_ALBUM = PathFunction("getAlbum", word("onAlbum"), (1,))
GET_ALBUM_DETAILS = PathFunction("getAlbumDetails", word("onAlbum- sang-"), (1, 2))
GET_REL_ALBUM = PathFunction("getRelAlbum", word("relAlbum"), (1,))
MUSIC_FUNCTIONS = (GET_ALBUM, GET_ALBUM_DETAILS, GET_REL_ALBUM)
MUSIC_ALPHABET = alphabet_of(["onAlbum", "sang", "relAlbum"])
MUSIC_QUERY = AtomicQuery(sym("sang-"), "Jailhouse")


def music_uids():
    declared = derive_uids_from_functions(MUSIC_FUNCTIONS) | {(sym("sang-"), sym("onAlbum"))}
    return close_uids(declared, MUSIC_ALPHABET)


BLUE_PLAN = ExecutionPlan(
    "Jailhouse",
    (FunctionCall(GET_ALBUM), FunctionCall(GET_ALBUM_DETAILS, (0, 1), {1: "Jailhouse"})),
    (1, 2),
)
GREEN_PLAN = ExecutionPlan(
    "Jailhouse",
    (FunctionCall(GET_REL_ALBUM), FunctionCall(GET_ALBUM_DETAILS, (0, 1), {1: "Jailhouse"})),
    (1, 2),
)

MUSIC_INSTANCE_JSON = {
    "relations": ["onAlbum", "sang", "relAlbum"],
    "functions": [
        {"name": "getAlbum", "path": ["onAlbum"], "outputs": [1]},
        {"name": "getAlbumDetails", "path": ["onAlbum-", "sang-"], "outputs": [1, 2]},
        {"name": "getRelAlbum", "path": ["relAlbum"], "outputs": [1]},
    ],
    "uids": [["sang-", "onAlbum"]],
    "derive_uids": True,
    "query": {"relation": "sang-", "constant": "Jailhouse"},
}

# --------------------------------------------------------------------------
# the two-call transformation example

F1 = PathFunction("f1", word("s t"), (1,))
F2 = PathFunction("f2", word("s- r u"), (1, 2))
R_QUERY = AtomicQuery(sym("r"), "a")
TWO_CALL_PLAN = ExecutionPlan("a", (FunctionCall(F1), FunctionCall(F2, (0, 1), {1: "a"})), (1, 2))
TWO_CALL_WORD = word("s t t- s- r u u- r-")

# --------------------------------------------------------------------------
# reference language computations


def bounded_language(g: ContextFreeGrammar, max_length: int, root=None) -> set:
    """Words of length <= max_length derivable from ``root``, by naive Kleene iteration."""
    lang = {a: set() for a in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for head, body in g.productions:
            parts = [{(s,)} if g.is_terminal(s) else lang[s] for s in body]
            words = {()}
            for part in parts:
                words = {u + v for u in words for v in part if len(u) + len(v) <= max_length}
                if not words:
                    break
            new = words - lang[head]
            if new:
                lang[head] |= new
                changed = True
    return lang[g.start if root is None else root]


def bfs_derives(g: ContextFreeGrammar, root, w, max_steps: int = 5000) -> bool:
    """Leftmost derivation search; sentential forms never carry more terminals than ``w``.

    Only sound (a True answer is a real derivation); forms longer than
    ``len(w) + 4`` symbols are dropped to keep the search finite.
    """
    w = tuple(w)
    start = (root,)
    seen = {start}
    queue = deque([start])
    steps = 0
    while queue and steps < max_steps:
        form = queue.popleft()
        steps += 1
        k = next((i for i, s in enumerate(form) if not g.is_terminal(s)), None)
        if k is None:
            if form == w:
                return True
            continue
        if form[:k] != w[:k]:
            continue
        for body in g.by_head.get(form[k], ()):
            new = form[:k] + body + form[k + 1:]
            if sum(g.is_terminal(s) for s in new) > len(w) or len(new) > len(w) + 4:
                continue
            if new not in seen:
                seen.add(new)
                queue.append(new)
    return False


def automaton_language(nfa: FiniteAutomaton, max_length: int) -> set:
    """Accepted words by exhaustive simulation."""
    out = set()
    for n in range(max_length + 1):
        for w in itertools.product(nfa.alphabet, repeat=n):
            if nfa.accepts(w):
                out.add(w)
    return out


# --------------------------------------------------------------------------
# random generators

SMALL_ALPHABET = (RelationSymbol("a"), RelationSymbol("b"))


def random_grammar(rng: random.Random, n_nonterminals: int = 4, n_productions: int = 7, max_body: int = 3):
    nts = [f"A{i}" for i in range(n_nonterminals)]
    symbols = nts + list(SMALL_ALPHABET)
    prods = []
    for _ in range(n_productions):
        head = rng.choice(nts)
        body = tuple(rng.choice(symbols) for _ in range(rng.randint(0, max_body)))
        prods.append((head, body))
    # make terminal productions likely so languages are rarely empty
    prods.append((rng.choice(nts), (rng.choice(SMALL_ALPHABET),)))
    return ContextFreeGrammar(frozenset(nts), SMALL_ALPHABET, tuple(prods), "A0")


def random_nfa(rng: random.Random, n_states: int = 4, n_transitions: int = 8, epsilon: bool = True):
    labels = list(SMALL_ALPHABET) + ([None] if epsilon else [])
    trans = {(rng.randrange(n_states), rng.choice(labels), rng.randrange(n_states)) for _ in range(n_transitions)}
    accepting = frozenset(q for q in range(n_states) if rng.random() < 0.4) or frozenset({n_states - 1})
    return FiniteAutomaton(frozenset(range(n_states)), SMALL_ALPHABET, frozenset(trans), 0, accepting)


def random_functions(rng: random.Random, n_relations: int, n_functions: int, max_body: int, p_existential: float = 0.2):
    alphabet = alphabet_of([f"r{i}" for i in range(1, n_relations + 1)])
    functions = []
    for k in range(n_functions):
        n = rng.randint(1, max_body)
        body = tuple(rng.choice(alphabet) for _ in range(n))
        outs = [i for i in range(1, n) if rng.random() >= p_existential] + [n]
        functions.append(PathFunction(f"f{k}", body, tuple(outs)))
    return functions, alphabet


def random_uids(rng: random.Random, alphabet, n_pairs: int):
    pairs = {(rng.choice(alphabet), rng.choice(alphabet)) for _ in range(n_pairs)}
    return close_uids(pairs, alphabet)


def all_words(alphabet, max_length: int):
    for n in range(max_length + 1):
        yield from itertools.product(alphabet, repeat=n)


# --------------------------------------------------------------------------
# seeded desk-scale instances shared by the oracle cross-checks

DESK_STREAM = 7001


def desk_instance(i: int):
    """Instance ``i``: at most 5 relations, 6 functions of length at most 3, p = 0.2.

    Dependencies are those witnessed by the bodies plus up to three random
    ones, so that loops through relations no function mentions also occur.
    """
    from pathrewrite.bench import SplitMix64, derive_seed, generate_functions

    rng = SplitMix64(derive_seed(DESK_STREAM, i))
    n_relations = rng.randint(1, 5)
    n_functions = rng.randint(1, 6)
    functions, alphabet = generate_functions(n_relations, n_functions, 0.2, 3, rng)
    pairs = derive_uids_from_functions(functions)
    for _ in range(rng.randint(0, 3)):
        pairs.add((rng.choice(alphabet), rng.choice(alphabet)))
    uids = close_uids(pairs, alphabet)
    queries = [AtomicQuery(s, "a") for s in alphabet]
    return functions, uids, queries
