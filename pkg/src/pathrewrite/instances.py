"""Reading and writing problem instances as JSON.

An instance file looks like::

    {"relations": ["onAlbum", "sang", "relAlbum"],
     "functions": [{"name": "getAlbumDetails", "path": ["onAlbum-", "sang-"], "outputs": [1, 2]}],
     "uids": [["sang-", "onAlbum"]],
     "derive_uids": true,
     "query": {"relation": "sang-", "constant": "Jailhouse"}}
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

from .plans import PathFunction, PlanError
from .schema import (
    AtomicQuery,
    RelationSymbol,
    SchemaError,
    UIDSet,
    alphabet_of,
    close_uids,
    derive_uids_from_functions,
)


class InputError(ValueError):
    """A malformed or inconsistent instance document."""


@dataclass(frozen=True)
class ProblemInstance:
    relations: tuple[str, ...]
    functions: tuple[PathFunction, ...]
    declared_uids: tuple[tuple[RelationSymbol, RelationSymbol], ...]
    derive_uids: bool
    query: AtomicQuery

    @property
    def alphabet(self) -> tuple[RelationSymbol, ...]:
        return alphabet_of(self.relations)

    @property
    def uids(self) -> UIDSet:
        pairs = set(self.declared_uids)
        if self.derive_uids:
            pairs |= derive_uids_from_functions(self.functions)
        return close_uids(pairs, self.alphabet)

    @property
    def functions_by_name(self) -> dict[str, PathFunction]:
        return {f.name: f for f in self.functions}


def _symbol(text, known: set, where: str) -> RelationSymbol:
    if not isinstance(text, str):
        raise InputError(f"{where}: expected a relation name, got {text!r}")
    try:
        s = RelationSymbol.parse(text)
    except SchemaError as exc:
        raise InputError(f"{where}: {exc}") from exc
    if s not in known:
        raise InputError(f"{where}: unknown relation {text!r}")
    return s


def instance_from_json(doc: Mapping) -> ProblemInstance:
    if not isinstance(doc, Mapping):
        raise InputError("instance document must be a JSON object")
    try:
        relations = tuple(RelationSymbol.parse(r).base_name for r in doc["relations"])
        known = set(alphabet_of(relations))
        functions = []
        for k, fdoc in enumerate(doc.get("functions", [])):
            name = fdoc["name"]
            body = tuple(_symbol(t, known, f"function {name}") for t in fdoc["path"])
            outputs = tuple(int(i) for i in fdoc.get("outputs", [len(body)]))
            functions.append(PathFunction(name, body, outputs))
        names = [f.name for f in functions]
        if len(set(names)) != len(names):
            raise InputError("function names must be unique")
        uids = []
        for pair in doc.get("uids", []):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise InputError(f"dependency must be a pair, got {pair!r}")
            uids.append((_symbol(pair[0], known, "uids"), _symbol(pair[1], known, "uids")))
        qdoc = doc["query"]
        query = AtomicQuery(_symbol(qdoc["relation"], known, "query"), str(qdoc.get("constant", "a")))
        derive = doc.get("derive_uids", False)
        if not isinstance(derive, bool):
            raise InputError("derive_uids must be true or false")
    except (KeyError, TypeError, SchemaError, PlanError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed instance: {exc}") from exc
    return ProblemInstance(relations, tuple(functions), tuple(uids), derive, query)


def instance_to_json(inst: ProblemInstance) -> dict:
    return {
        "relations": list(inst.relations),
        "functions": [
            {"name": f.name, "path": [str(s) for s in f.body], "outputs": list(f.output_positions)}
            for f in inst.functions
        ],
        "uids": [[str(s), str(t)] for s, t in inst.declared_uids],
        "derive_uids": inst.derive_uids,
        "query": {"relation": str(inst.query.relation), "constant": inst.query.input_constant},
    }


def load_json(source: Union[str, Path]) -> dict:
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source} is not valid JSON: {exc}") from exc


def load_instance(source: Union[str, Path]) -> ProblemInstance:
    return instance_from_json(load_json(source))
