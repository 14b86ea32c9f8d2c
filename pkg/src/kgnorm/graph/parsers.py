"""Source parsers: raw release files in, intermediate KGX JSON Lines out.

A parser is a callable ``(source_id, raw_path, nodes_out, edges_out) -> ParseStats``.
Register new ones with :func:`register_parser`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

from .._io import atomic_write, open_text
from ..errors import MalformedCurie, MalformedInput, UnknownParser
from ..model import parse_curie
from .records import EdgeRecord, NodeRecord


@dataclass
class ParseStats:
    nodes: int = 0
    edges: int = 0

    def to_json(self) -> dict:
        return asdict(self)


Parser = Callable[[str, Path, Path, Path], ParseStats]

PARSERS: dict[str, Parser] = {}


def register_parser(name: str):
    def wrap(fn: Parser) -> Parser:
        PARSERS[name] = fn
        return fn

    return wrap


def get_parser(name: str) -> Parser:
    try:
        return PARSERS[name]
    except KeyError:
        raise UnknownParser(name) from None


def parse_source(parser: str, source_id: str, raw: str | Path, nodes_out: str | Path, edges_out: str | Path) -> ParseStats:
    return get_parser(parser)(source_id, Path(raw), Path(nodes_out), Path(edges_out))


def default_knowledge_source(source_id: str) -> str:
    return source_id if source_id.startswith("infores:") else f"infores:{source_id}"


def _check_curie(text: str, lineno: int, path: Path) -> str:
    try:
        parse_curie(text)
    except MalformedCurie:
        raise MalformedInput(f"malformed CURIE {text!r}", lineno, str(path)) from None
    return text


def _pick(raw: Path, *names: str) -> Path | None:
    if raw.is_file():
        return raw if raw.name in names else None
    for name in names:
        if (raw / name).exists():
            return raw / name
    return None


def _split_multi(value: str) -> list[str]:
    return [v.strip() for v in value.split("|") if v.strip()]


@register_parser("association_csv")
def parse_association_csv(source_id: str, raw: Path, nodes_out: Path, edges_out: Path) -> ParseStats:
    """Pairwise associations with header ``subject,relation,object,source``.

    Extra columns become edge properties; ``publications`` is split on ``|``.
    The parsing source is recorded as an aggregator when it differs from the
    row's own source.
    """
    path = raw if raw.is_file() else next(iter(sorted(raw.glob("*.csv"))), None)
    if path is None:
        raise MalformedInput(f"no CSV file under {raw}")
    agg = default_knowledge_source(source_id)
    stats = ParseStats()
    seen_nodes: dict[str, None] = {}
    with open_text(path) as fh, atomic_write(edges_out) as ef:
        reader = csv.DictReader(fh)
        missing = {"subject", "relation", "object", "source"} - set(reader.fieldnames or ())
        if missing:
            raise MalformedInput(f"missing columns {sorted(missing)}", 1, str(path))
        for row in reader:
            lineno = reader.line_num
            subj = _check_curie(row["subject"].strip(), lineno, path)
            obj = _check_curie(row["object"].strip(), lineno, path)
            pred = row["relation"].strip()
            if not pred:
                raise MalformedInput("empty relation", lineno, str(path))
            pks = default_knowledge_source(row["source"].strip()) if row["source"].strip() else agg
            props = {}
            pubs: list[str] = []
            for k, v in row.items():
                if k in ("subject", "relation", "object", "source") or k is None or v in (None, ""):
                    continue
                if k == "publications":
                    pubs = _split_multi(v)
                else:
                    props[k] = v
            edge = EdgeRecord(subj, pred, obj, pks, {}, [agg] if agg != pks else [], pubs, props)
            ef.write(edge.line() + "\n")
            stats.edges += 1
            seen_nodes.setdefault(subj)
            seen_nodes.setdefault(obj)
    with atomic_write(nodes_out) as nf:
        for nid in seen_nodes:
            nf.write(NodeRecord(nid).line() + "\n")
            stats.nodes += 1
    return stats


_NODE_TSV = {"id", "name", "category"}
_EDGE_TSV = {"subject", "predicate", "object", "primary_knowledge_source", "publications"}


@register_parser("kgx_tsv")
def parse_kgx_tsv(source_id: str, raw: Path, nodes_out: Path, edges_out: Path) -> ParseStats:
    """Generic ``nodes.tsv``/``edges.tsv`` pair with header rows.

    Node columns: ``id``, ``name``, ``category`` (``|``-separated) plus any
    properties. Edge columns: ``subject``, ``predicate``, ``object``, optional
    ``primary_knowledge_source`` and ``publications``; columns named
    ``qualifier:<key>`` become qualifiers, everything else a property.
    """
    nodes_path = _pick(raw, "nodes.tsv")
    edges_path = _pick(raw, "edges.tsv")
    if nodes_path is None or edges_path is None:
        raise MalformedInput(f"{raw} must contain nodes.tsv and edges.tsv")
    stats = ParseStats()
    default_pks = default_knowledge_source(source_id)
    with open_text(nodes_path) as fh, atomic_write(nodes_out) as nf:
        reader = csv.DictReader(fh, delimiter="\t")
        if "id" not in (reader.fieldnames or ()):
            raise MalformedInput("nodes.tsv needs an id column", 1, str(nodes_path))
        for row in reader:
            nid = _check_curie(row["id"].strip(), reader.line_num, nodes_path)
            props = {k: v for k, v in row.items() if k not in _NODE_TSV and k is not None and v}
            node = NodeRecord(nid, row.get("name") or None, _split_multi(row.get("category") or ""), props)
            nf.write(node.line() + "\n")
            stats.nodes += 1
    with open_text(edges_path) as fh, atomic_write(edges_out) as ef:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = {"subject", "predicate", "object"} - set(reader.fieldnames or ())
        if missing:
            raise MalformedInput(f"edges.tsv missing columns {sorted(missing)}", 1, str(edges_path))
        for row in reader:
            lineno = reader.line_num
            quals = {}
            props = {}
            for k, v in row.items():
                if k is None or not v or k in _EDGE_TSV:
                    continue
                if k.startswith("qualifier:"):
                    quals[k.split(":", 1)[1]] = v
                else:
                    props[k] = v
            edge = EdgeRecord(
                _check_curie(row["subject"].strip(), lineno, edges_path),
                row["predicate"].strip(),
                _check_curie(row["object"].strip(), lineno, edges_path),
                (row.get("primary_knowledge_source") or "").strip() or default_pks,
                quals,
                [],
                _split_multi(row.get("publications") or ""),
                props,
            )
            if not edge.predicate:
                raise MalformedInput("empty predicate", lineno, str(edges_path))
            ef.write(edge.line() + "\n")
            stats.edges += 1
    return stats


def _passthrough(src: Path, dst: Path, check, stats_field: str, stats: ParseStats) -> None:
    with open(src, "rb") as fh, open(dst, "wb") as out:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip(b"\r\n")
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"invalid JSON: {exc.msg}", lineno, str(src)) from None
            if not isinstance(obj, dict):
                raise MalformedInput("expected a JSON object", lineno, str(src))
            check(obj, lineno, src)
            out.write(line + b"\n")
            setattr(stats, stats_field, getattr(stats, stats_field) + 1)


def _check_node(obj: dict, lineno: int, path: Path) -> None:
    if not isinstance(obj.get("id"), str):
        raise MalformedInput("node without id", lineno, str(path))
    _check_curie(obj["id"], lineno, path)


def _check_edge(obj: dict, lineno: int, path: Path) -> None:
    for key in ("subject", "predicate", "object", "primary_knowledge_source"):
        if not isinstance(obj.get(key), str) or not obj[key]:
            raise MalformedInput(f"edge without {key}", lineno, str(path))
    _check_curie(obj["subject"], lineno, path)
    _check_curie(obj["object"], lineno, path)


@register_parser("jsonl")
def parse_jsonl_passthrough(source_id: str, raw: Path, nodes_out: Path, edges_out: Path) -> ParseStats:
    """Copy already-KGX ``nodes.jsonl``/``edges.jsonl`` byte for byte after validating each line."""
    nodes_path = _pick(raw, "nodes.jsonl")
    edges_path = _pick(raw, "edges.jsonl")
    if nodes_path is None or edges_path is None:
        raise MalformedInput(f"{raw} must contain nodes.jsonl and edges.jsonl")
    stats = ParseStats()
    nodes_out.parent.mkdir(parents=True, exist_ok=True)
    _passthrough(nodes_path, nodes_out, _check_node, "nodes", stats)
    _passthrough(edges_path, edges_out, _check_edge, "edges", stats)
    return stats
