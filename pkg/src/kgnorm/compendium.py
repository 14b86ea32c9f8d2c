"""Byte-deterministic readers and writers for every build artifact.

All JSON is written compactly with a fixed key order, one record per line,
UTF-8 with LF endings. Paths ending in ``.gz`` are gzip-compressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from ._io import atomic_write, open_text
from .errors import MalformedCurie, SchemaViolation
from .model import (
    Clique,
    ConflationPolicy,
    ConflationSet,
    Curie,
    Identifier,
    TypeTaxonomy,
    curie_sort_key,
    parse_curie,
)

SAME_AS = "same_as"


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def _lines(path: str | Path) -> Iterator[tuple[int, Any]]:
    with open_text(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                yield lineno, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON: {exc.msg}", lineno, str(path)) from None


def _curie(text: Any, lineno: int, path: str | Path) -> Curie:
    if not isinstance(text, str):
        raise SchemaViolation(f"expected a CURIE string, got {text!r}", lineno, str(path))
    try:
        return parse_curie(text)
    except MalformedCurie:
        raise SchemaViolation(f"malformed CURIE {text!r}", lineno, str(path)) from None


# -- compendia ---------------------------------------------------------------

def clique_to_json(clique: Clique) -> dict:
    idents = []
    for ident in clique.identifiers:
        entry: dict[str, Any] = {"i": str(ident.curie)}
        if ident.label is not None:
            entry["l"] = ident.label
        if ident.descriptions:
            entry["d"] = list(ident.descriptions)
        if ident.taxa:
            entry["t"] = [str(t) for t in ident.taxa]
        idents.append(entry)
    return {
        "type": clique.type,
        "ic": clique.information_content,
        "identifiers": idents,
        "preferred_name": clique.preferred_label,
    }


def clique_from_json(obj: Any, lineno: int = 0, path: str | Path = "<input>") -> Clique:
    def bad(msg: str) -> SchemaViolation:
        return SchemaViolation(msg, lineno, str(path))

    if not isinstance(obj, dict) or list(obj) != ["type", "ic", "identifiers", "preferred_name"]:
        raise bad("compendium line must have keys type, ic, identifiers, preferred_name in that order")
    if not isinstance(obj["type"], str) or not obj["type"]:
        raise bad("type must be a non-empty string")
    ic = obj["ic"]
    if ic is not None and (isinstance(ic, bool) or not isinstance(ic, (int, float)) or not 0 <= ic <= 100):
        raise bad(f"ic must be null or a number in [0, 100], got {ic!r}")
    if not isinstance(obj["preferred_name"], str):
        raise bad("preferred_name must be a string")
    raw = obj["identifiers"]
    if not isinstance(raw, list) or not raw:
        raise bad("identifiers must be a non-empty list")
    idents = []
    for entry in raw:
        if not isinstance(entry, dict) or "i" not in entry or set(entry) - {"i", "l", "d", "t"}:
            raise bad(f"bad identifier entry {entry!r}")
        label = entry.get("l")
        if label is not None and not isinstance(label, str):
            raise bad("identifier label must be a string")
        descs = entry.get("d", [])
        if not isinstance(descs, list) or not all(isinstance(d, str) for d in descs):
            raise bad("identifier descriptions must be a list of strings")
        taxa = entry.get("t", [])
        if not isinstance(taxa, list):
            raise bad("identifier taxa must be a list")
        idents.append(
            Identifier(
                _curie(entry["i"], lineno, path),
                label,
                tuple(descs),
                tuple(_curie(t, lineno, path) for t in taxa),
            )
        )
    try:
        return Clique(tuple(idents), obj["preferred_name"], obj["type"], ic)
    except ValueError as exc:
        raise bad(str(exc)) from None


def write_compendium(cliques: Iterable[Clique], path: str | Path, presorted: bool = False) -> int:
    """Write one clique per line in leader order and return the line count.

    Sorting needs the whole input; pass ``presorted=True`` for a stream that is
    already leader-ordered and it is written through without buffering.
    """
    if not presorted:
        cliques = sorted(cliques, key=lambda c: curie_sort_key(c.leader))
    n = 0
    with atomic_write(path) as fh:
        for clique in cliques:
            fh.write(dumps(clique_to_json(clique)))
            fh.write("\n")
            n += 1
    return n


def read_compendium(path: str | Path) -> Iterator[Clique]:
    for lineno, obj in _lines(path):
        yield clique_from_json(obj, lineno, path)


# -- synonyms ----------------------------------------------------------------

@dataclass(frozen=True)
class SynonymEntry:
    """One line of a synonym file: everything the name index needs about a clique."""

    curie: Curie
    preferred_name: str
    names: tuple[str, ...]
    types: tuple[str, ...]
    taxa: tuple[Curie, ...] = ()
    clique_size: int = 1


def synonym_entry(clique: Clique, names: Iterable[str] = (), taxonomy: TypeTaxonomy | None = None) -> SynonymEntry:
    """Collect a clique's searchable names.

    ``names`` is every label or synonym text carried by any member; member
    labels stored on the clique are added automatically.
    """
    found = {i.label for i in clique.identifiers if i.label}
    found.update(n for n in names if n)
    types = taxonomy.lineage(clique.type) if taxonomy and clique.type in taxonomy else [clique.type]
    return SynonymEntry(
        clique.leader,
        clique.preferred_label,
        tuple(sorted(found)),
        tuple(types),
        tuple(clique.taxa or ()),
        len(clique),
    )


def synonym_to_json(entry: SynonymEntry) -> dict:
    return {
        "curie": str(entry.curie),
        "preferred_name": entry.preferred_name,
        "names": list(entry.names),
        "types": list(entry.types),
        "taxa": [str(t) for t in entry.taxa],
        "clique_identifier_count": entry.clique_size,
    }


def write_synonyms(entries: Iterable[SynonymEntry], path: str | Path, presorted: bool = False) -> int:
    if not presorted:
        entries = sorted(entries, key=lambda e: curie_sort_key(e.curie))
    n = 0
    with atomic_write(path) as fh:
        for e in entries:
            fh.write(dumps(synonym_to_json(e)))
            fh.write("\n")
            n += 1
    return n


def read_synonyms(path: str | Path) -> Iterator[SynonymEntry]:
    keys = ["curie", "preferred_name", "names", "types", "taxa", "clique_identifier_count"]
    for lineno, obj in _lines(path):
        if not isinstance(obj, dict) or list(obj) != keys:
            raise SchemaViolation(f"synonym line must have keys {', '.join(keys)}", lineno, str(path))
        names, types, taxa = obj["names"], obj["types"], obj["taxa"]
        if not isinstance(obj["preferred_name"], str):
            raise SchemaViolation("preferred_name must be a string", lineno, str(path))
        if not (isinstance(names, list) and all(isinstance(n, str) for n in names)):
            raise SchemaViolation("names must be a list of strings", lineno, str(path))
        if not (isinstance(types, list) and types and all(isinstance(t, str) for t in types)):
            raise SchemaViolation("types must be a non-empty list of strings", lineno, str(path))
        if not isinstance(taxa, list):
            raise SchemaViolation("taxa must be a list", lineno, str(path))
        size = obj["clique_identifier_count"]
        if not isinstance(size, int) or isinstance(size, bool) or size < 1:
            raise SchemaViolation("clique_identifier_count must be a positive integer", lineno, str(path))
        yield SynonymEntry(
            _curie(obj["curie"], lineno, path),
            obj["preferred_name"],
            tuple(names),
            tuple(types),
            tuple(_curie(t, lineno, path) for t in taxa),
            size,
        )


# -- conflations -------------------------------------------------------------

def write_conflation(sets: Iterable[ConflationSet], path: str | Path) -> int:
    n = 0
    with atomic_write(path) as fh:
        for s in sets:
            fh.write(dumps([str(c) for c in s.leaders]))
            fh.write("\n")
            n += 1
    return n


def read_conflation(path: str | Path, policy: ConflationPolicy | str) -> Iterator[ConflationSet]:
    policy = ConflationPolicy.parse(policy) if isinstance(policy, str) else policy
    for lineno, obj in _lines(path):
        if not isinstance(obj, list) or len(obj) < 2:
            raise SchemaViolation("conflation line must be a list of at least two CURIEs", lineno, str(path))
        leaders = tuple(_curie(c, lineno, path) for c in obj)
        try:
            yield ConflationSet(policy, leaders)
        except ValueError as exc:
            raise SchemaViolation(str(exc), lineno, str(path)) from None


# -- KGX JSON Lines ----------------------------------------------------------

def write_jsonl(records: Iterable[dict], path: str | Path) -> int:
    n = 0
    with atomic_write(path) as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> Iterator[dict]:
    for lineno, obj in _lines(path):
        if not isinstance(obj, dict):
            raise SchemaViolation("expected a JSON object per line", lineno, str(path))
        yield obj


def read_kgx_nodes(path: str | Path) -> Iterator[dict]:
    for lineno, obj in _lines(path):
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
            raise SchemaViolation("node line needs a string id", lineno, str(path))
        _curie(obj["id"], lineno, path)
        cats = obj.get("category")
        if cats is not None and not (isinstance(cats, list) and all(isinstance(c, str) for c in cats)):
            raise SchemaViolation("category must be a list of strings", lineno, str(path))
        yield obj


def read_kgx_edges(path: str | Path) -> Iterator[dict]:
    for lineno, obj in _lines(path):
        if not isinstance(obj, dict):
            raise SchemaViolation("expected a JSON object per line", lineno, str(path))
        for key in ("subject", "predicate", "object"):
            if not isinstance(obj.get(key), str) or not obj[key]:
                raise SchemaViolation(f"edge line needs a non-empty {key}", lineno, str(path))
        _curie(obj["subject"], lineno, path)
        _curie(obj["object"], lineno, path)
        yield obj


def kgx_equivalence_records(cliques: Iterable[Clique]) -> Iterator[tuple[list[dict], list[dict]]]:
    for clique in cliques:
        leader = str(clique.leader)
        nodes = [
            {"id": str(i.curie), "name": i.label or clique.preferred_label, "category": [clique.type]}
            for i in clique.identifiers
        ]
        edges = [
            {"subject": str(i.curie), "predicate": SAME_AS, "object": leader}
            for i in clique.identifiers[1:]
        ]
        yield nodes, edges


def export_kgx_equivalence(cliques: Iterable[Clique], node_path: str | Path, edge_path: str | Path) -> tuple[int, int]:
    """Star-shaped node/edge export: every non-leader member points at its leader."""
    n_nodes = n_edges = 0
    with atomic_write(node_path) as nf, atomic_write(edge_path) as ef:
        for nodes, edges in kgx_equivalence_records(cliques):
            for node in nodes:
                nf.write(dumps(node) + "\n")
            for edge in edges:
                ef.write(dumps(edge) + "\n")
            n_nodes += len(nodes)
            n_edges += len(edges)
    return n_nodes, n_edges


# -- reports -----------------------------------------------------------------

REPORT_HEADER = "kind\tkey\tleaders"


def write_reports(report, path: str | Path) -> int:
    """Write a duplicate report as ``kind<TAB>key<TAB>leaders_csv`` rows."""
    rows = [("multi_clique_curie", str(c), leaders) for c, leaders in report.multi_clique_curies]
    rows += [("duplicate_label", label, leaders) for label, leaders in report.duplicate_labels]
    with atomic_write(path) as fh:
        fh.write(REPORT_HEADER + "\n")
        for kind, key, leaders in rows:
            key = key.replace("\t", " ").replace("\n", " ")
            fh.write(f"{kind}\t{key}\t{','.join(map(str, leaders))}\n")
    return len(rows)


def read_reports(path: str | Path):
    from .cliques import DuplicateReport

    report = DuplicateReport()
    with open_text(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != REPORT_HEADER:
            raise SchemaViolation(f"unexpected report header {header!r}", 1, str(path))
        for lineno, raw in enumerate(fh, 2):
            cols = raw.rstrip("\n").split("\t")
            if len(cols) != 3:
                raise SchemaViolation("report rows need three columns", lineno, str(path))
            leaders = [_curie(c, lineno, path) for c in cols[2].split(",")]
            if cols[0] == "multi_clique_curie":
                report.multi_clique_curies.append((_curie(cols[1], lineno, path), leaders))
            elif cols[0] == "duplicate_label":
                report.duplicate_labels.append((cols[1], leaders))
            else:
                raise SchemaViolation(f"unknown report kind {cols[0]!r}", lineno, str(path))
    return report


__all__ = [
    "SynonymEntry",
    "clique_from_json",
    "clique_to_json",
    "export_kgx_equivalence",
    "read_compendium",
    "read_conflation",
    "read_jsonl",
    "read_kgx_edges",
    "read_kgx_nodes",
    "read_reports",
    "read_synonyms",
    "synonym_entry",
    "write_compendium",
    "write_conflation",
    "write_jsonl",
    "write_reports",
    "write_synonyms",
]
