"""Identifier normalization and predicate harmonization of intermediate graphs."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .._io import atomic_write, data_lines
from ..compendium import read_jsonl
from ..errors import MalformedTable
from ..normalizer import NormalizerIndex, normalize_one
from .records import EdgeRecord, NodeRecord, merge_values

UNRESOLVED_FLAG = "normalization_failed"
FALLBACK_CATEGORY = "NamedThing"


class OnUnresolvable(str, enum.Enum):
    DROP = "drop"
    KEEP_ORIGINAL = "keep_original"


@dataclass(frozen=True)
class NormalizationOptions:
    conflate_gene_protein: bool = False
    conflate_drug_chemical: bool = False
    on_unresolvable: OnUnresolvable = OnUnresolvable.DROP

    def to_json(self) -> dict[str, Any]:
        return {
            "conflate_gene_protein": self.conflate_gene_protein,
            "conflate_drug_chemical": self.conflate_drug_chemical,
            "on_unresolvable": self.on_unresolvable.value,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any] | None) -> "NormalizationOptions":
        obj = obj or {}
        return cls(
            bool(obj.get("conflate_gene_protein", False)),
            bool(obj.get("conflate_drug_chemical", False)),
            OnUnresolvable(obj.get("on_unresolvable", "drop")),
        )


@dataclass
class NormalizationStats:
    nodes_in: int = 0
    nodes_out: int = 0
    edges_in: int = 0
    edges_out: int = 0
    resolved: int = 0
    unresolved: int = 0
    dropped_unresolvable_edges: int = 0
    property_conflicts: int = 0
    unresolved_ids: list[str] = field(default_factory=list)

    @property
    def success_fraction(self) -> float:
        total = self.resolved + self.unresolved
        return self.resolved / total if total else 1.0

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["success_fraction"] = self.success_fraction
        return out


def _merge_node(into: NodeRecord, other: NodeRecord) -> int:
    conflicts = 0
    for c in other.categories:
        if c not in into.categories:
            into.categories.append(c)
    for k, v in other.properties.items():
        if k in into.properties:
            into.properties[k], clash = merge_values(into.properties[k], v)
            conflicts += clash
        else:
            into.properties[k] = v
    return conflicts


def normalize_graph(
    nodes_in: str | Path,
    edges_in: str | Path,
    index: NormalizerIndex,
    opts: NormalizationOptions,
    nodes_out: str | Path,
    edges_out: str | Path,
) -> NormalizationStats:
    """Rewrite every identifier to its clique leader.

    Node names and categories come from the clique. Source ids that collapse to
    one leader become one node. Unresolvable ids are either dropped together
    with their edges or kept as-is with a ``normalization_failed`` flag.
    Edge endpoints missing from the node file get nodes of their own.
    """
    stats = NormalizationStats()
    cache: dict[str, Any] = {}

    def resolve(curie: str):
        if curie not in cache:
            res = normalize_one(index, curie, opts.conflate_gene_protein, opts.conflate_drug_chemical)
            cache[curie] = res
            if res is None:
                stats.unresolved += 1
                stats.unresolved_ids.append(curie)
            else:
                stats.resolved += 1
        return cache[curie]

    keep = opts.on_unresolvable is OnUnresolvable.KEEP_ORIGINAL
    nodes: dict[str, NodeRecord] = {}

    def absorb(src: NodeRecord) -> None:
        res = resolve(src.id)
        if res is None:
            if not keep:
                return
            node = NodeRecord(src.id, src.name, list(src.categories) or [FALLBACK_CATEGORY], dict(src.properties))
            node.properties[UNRESOLVED_FLAG] = True
        else:
            node = NodeRecord(res.leader, res.label, list(res.type_lineage), dict(src.properties))
        if node.id in nodes:
            stats.property_conflicts += _merge_node(nodes[node.id], node)
        else:
            nodes[node.id] = node

    for obj in read_jsonl(nodes_in):
        stats.nodes_in += 1
        absorb(NodeRecord.from_json(obj))

    with atomic_write(edges_out) as ef:
        for obj in read_jsonl(edges_in):
            stats.edges_in += 1
            edge = EdgeRecord.from_json(obj)
            ends = []
            for curie in (edge.subject, edge.object):
                res = resolve(curie)
                if res is not None:
                    ends.append(res.leader)
                elif keep:
                    ends.append(curie)
                else:
                    ends.append(None)
            if None in ends:
                stats.dropped_unresolvable_edges += 1
                continue
            edge.subject, edge.object = ends
            for curie in ends:
                if curie not in nodes:
                    absorb(NodeRecord(curie))
            ef.write(edge.line() + "\n")
            stats.edges_out += 1

    with atomic_write(nodes_out) as nf:
        for nid in sorted(nodes):
            nf.write(nodes[nid].line() + "\n")
            stats.nodes_out += 1
    return stats


@dataclass
class PredicateTable:
    """Source predicate to canonical predicate plus qualifiers.

    Every canonical predicate named in the table is itself canonical, as is
    anything listed in ``extra_canonical``.
    """

    mapping: dict[str, tuple[str, dict[str, str]]] = field(default_factory=dict)
    extra_canonical: set[str] = field(default_factory=set)

    @property
    def canonical(self) -> set[str]:
        return {c for c, _ in self.mapping.values()} | self.extra_canonical

    @classmethod
    def from_file(cls, path: str | Path, extra_canonical: set[str] | None = None) -> "PredicateTable":
        mapping = {}
        for lineno, line in data_lines(path):
            cols = line.split("\t")
            if len(cols) not in (2, 3) or not cols[0] or not cols[1]:
                raise MalformedTable(f"expected source<TAB>canonical[<TAB>k=v;...], got {line!r}", lineno, str(path))
            quals: dict[str, str] = {}
            if len(cols) == 3 and cols[2].strip():
                for kv in cols[2].split(";"):
                    k, sep, v = kv.partition("=")
                    if not sep or not k.strip() or not v.strip():
                        raise MalformedTable(f"bad qualifier {kv!r}", lineno, str(path))
                    quals[k.strip()] = v.strip()
            if cols[0] in mapping:
                raise MalformedTable(f"predicate {cols[0]!r} mapped twice", lineno, str(path))
            mapping[cols[0]] = (cols[1], quals)
        return cls(mapping, set(extra_canonical or ()))

    def resolve(self, predicate: str) -> tuple[str, dict[str, str]] | None:
        if predicate in self.mapping:
            return self.mapping[predicate]
        if predicate in self.canonical:
            return predicate, {}
        return None


@dataclass
class HarmonizationStats:
    edges_in: int = 0
    edges_out: int = 0
    dropped_unmapped_predicate: int = 0
    unmapped_predicates: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def harmonize_predicates(edges_in: str | Path, table: PredicateTable, edges_out: str | Path) -> HarmonizationStats:
    """Canonicalize predicates; mapped qualifiers are added under any the edge already had."""
    stats = HarmonizationStats()
    with atomic_write(edges_out) as ef:
        for obj in read_jsonl(edges_in):
            stats.edges_in += 1
            edge = EdgeRecord.from_json(obj)
            hit = table.resolve(edge.predicate)
            if hit is None:
                stats.dropped_unmapped_predicate += 1
                stats.unmapped_predicates[edge.predicate] = stats.unmapped_predicates.get(edge.predicate, 0) + 1
                continue
            edge.predicate, quals = hit
            edge.qualifiers = {**quals, **edge.qualifiers}
            ef.write(edge.line() + "\n")
            stats.edges_out += 1
    return stats
