"""KGX-style node and edge records and the edge merge key."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..compendium import dumps
from ..errors import MalformedInput

NODE_FIELDS = ("id", "name", "category")
EDGE_FIELDS = (
    "subject",
    "predicate",
    "object",
    "qualifiers",
    "primary_knowledge_source",
    "aggregator_knowledge_sources",
    "publications",
)


def canonical_qualifiers(qualifiers: dict[str, Any]) -> str:
    """``k=v`` pairs sorted by key and joined with ``;``; empty values are left out."""
    parts = []
    for k in sorted(qualifiers):
        v = qualifiers[k]
        if v is None or v == "":
            continue
        parts.append(f"{k}={v}")
    return ";".join(parts)


@dataclass
class NodeRecord:
    id: str
    name: str | None = None
    categories: list[str] = field(default_factory=list)
    properties: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id}
        if self.name is not None:
            out["name"] = self.name
        out["category"] = list(self.categories)
        for k in sorted(self.properties):
            out[k] = self.properties[k]
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "NodeRecord":
        props = {k: v for k, v in obj.items() if k not in NODE_FIELDS}
        cats = obj.get("category") or []
        if isinstance(cats, str):
            cats = [cats]
        return cls(obj["id"], obj.get("name"), list(cats), props)

    def line(self) -> str:
        return dumps(self.to_json())


@dataclass
class EdgeRecord:
    subject: str
    predicate: str
    object: str
    primary_knowledge_source: str
    qualifiers: dict[str, str] = field(default_factory=dict)
    aggregator_knowledge_sources: list[str] = field(default_factory=list)
    publications: list[str] = field(default_factory=list)
    properties: dict[str, Any] = field(default_factory=dict)

    def merge_key(self) -> "EdgeMergeKey":
        return EdgeMergeKey(
            self.subject, self.object, self.predicate, canonical_qualifiers(self.qualifiers), self.primary_knowledge_source
        )

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "subject": self.subject,
            "predicate": self.predicate,
            "object": self.object,
            "qualifiers": {k: self.qualifiers[k] for k in sorted(self.qualifiers)},
            "primary_knowledge_source": self.primary_knowledge_source,
            "aggregator_knowledge_sources": list(self.aggregator_knowledge_sources),
            "publications": list(self.publications),
        }
        for k in sorted(self.properties):
            out[k] = self.properties[k]
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EdgeRecord":
        pks = obj.get("primary_knowledge_source")
        if not pks:
            raise MalformedInput(f"edge {obj.get('subject')} -> {obj.get('object')} lacks primary_knowledge_source")
        props = {k: v for k, v in obj.items() if k not in EDGE_FIELDS}
        return cls(
            obj["subject"],
            obj["predicate"],
            obj["object"],
            pks,
            dict(obj.get("qualifiers") or {}),
            list(obj.get("aggregator_knowledge_sources") or []),
            list(obj.get("publications") or []),
            props,
        )

    def line(self) -> str:
        return dumps(self.to_json())


@dataclass(frozen=True, order=True)
class EdgeMergeKey:
    subject: str
    object: str
    predicate: str
    qualifiers: str
    primary_knowledge_source: str

    def serialize(self) -> str:
        # JSON escapes tabs and newlines, so the result is safe as a TSV column
        return json.dumps(
            [self.subject, self.object, self.predicate, self.qualifiers, self.primary_knowledge_source],
            ensure_ascii=False,
            separators=(",", ":"),
        )


def merge_values(first: Any, other: Any) -> tuple[Any, bool]:
    """Combine two property values; returns ``(merged, conflicted)``.

    Lists union (sorted by their JSON form so merge order does not leak into
    the output); scalars keep the first value and report a conflict if the
    second differs.
    """
    if isinstance(first, list) or isinstance(other, list):
        a = first if isinstance(first, list) else [first]
        b = other if isinstance(other, list) else [other]
        seen = {}
        for v in a + b:
            seen.setdefault(dumps(v), v)
        return [seen[k] for k in sorted(seen)], False
    return first, first != other


def sorted_union(a: list[str], b: list[str]) -> list[str]:
    return sorted(set(a) | set(b))
