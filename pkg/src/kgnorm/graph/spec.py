"""Graphspec: the declarative YAML description of a graph build."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import GraphSpecError
from .merge import DEFAULT_BATCH_SIZE, PropagationRule
from .normalize import NormalizationOptions, OnUnresolvable
from .parsers import PARSERS

LATEST = "latest"


class MergeStrategy(str, enum.Enum):
    UNION = "union"
    RESTRICT_TO_EXISTING_NODES = "restrict_to_existing_nodes"
    PROPERTIES_ONLY = "properties_only"


@dataclass(frozen=True)
class SourceSpec:
    id: str
    parser: str
    version: str = LATEST
    merge_strategy: MergeStrategy = MergeStrategy.UNION
    normalization: NormalizationOptions = NormalizationOptions()
    path: Path | None = None
    license: str | None = None
    provenance: str | None = None


@dataclass(frozen=True)
class NormalizerSpec:
    compendia: tuple[Path, ...] = ()
    gene_protein: tuple[Path, ...] = ()
    drug_chemical: tuple[Path, ...] = ()
    types: Path | None = None


@dataclass
class GraphSpec:
    graph_id: str
    sources: list[SourceSpec]
    data_dir: Path
    predicate_table: Path | None = None
    extra_canonical_predicates: tuple[str, ...] = ()
    normalizer: NormalizerSpec = field(default_factory=NormalizerSpec)
    property_propagation: list[PropagationRule] = field(default_factory=list)
    batch_size: int = DEFAULT_BATCH_SIZE
    graph_version: str | None = None
    base_dir: Path = Path(".")

    def source(self, source_id: str) -> SourceSpec:
        for s in self.sources:
            if s.id == source_id:
                return s
        raise KeyError(source_id)

    def raw_root(self, source: SourceSpec) -> Path:
        return source.path if source.path is not None else self.data_dir / source.id

    def resolve_version(self, source: SourceSpec) -> str:
        """Concrete version for ``source``; ``latest`` picks the highest version directory."""
        root = self.raw_root(source)
        if source.version != LATEST:
            if not (root / source.version).exists():
                raise GraphSpecError(f"source {source.id}: version {source.version} not found under {root}")
            return source.version
        versions = [p.name for p in root.iterdir() if not p.name.startswith(".")] if root.is_dir() else []
        if not versions:
            raise GraphSpecError(f"source {source.id}: no versions available under {root}")
        return max(versions, key=natural_key)

    def raw_path(self, source: SourceSpec, version: str) -> Path:
        return self.raw_root(source) / version


def natural_key(text: str) -> list:
    return [(0, int(part), "") if part.isdigit() else (1, 0, part) for part in re.split(r"(\d+)", text) if part]


def _paths(base: Path, value: Any) -> tuple[Path, ...]:
    if value is None:
        return ()
    if isinstance(value, (str, Path)):
        value = [value]
    return tuple(base / str(v) for v in value)


def parse_graphspec(obj: dict[str, Any], base_dir: str | Path = ".") -> GraphSpec:
    base = Path(base_dir)
    if not isinstance(obj, dict):
        raise GraphSpecError("graphspec must be a mapping")
    graph_id = obj.get("graph_id")
    if not graph_id:
        raise GraphSpecError("graphspec needs a graph_id")
    sources = []
    seen = set()
    for raw in obj.get("sources") or []:
        sid = raw.get("id") or raw.get("source_id")
        if not sid:
            raise GraphSpecError("every source needs an id")
        if sid in seen:
            raise GraphSpecError(f"duplicate source id {sid!r}")
        seen.add(sid)
        parser = raw.get("parser")
        if parser not in PARSERS:
            raise GraphSpecError(f"source {sid}: parser {parser!r} is not registered")
        try:
            strategy = MergeStrategy(raw.get("merge_strategy", "union"))
            norm = NormalizationOptions.from_json(raw.get("normalization"))
        except ValueError as exc:
            raise GraphSpecError(f"source {sid}: {exc}") from None
        sources.append(
            SourceSpec(
                id=sid,
                parser=parser,
                version=str(raw.get("version", LATEST)),
                merge_strategy=strategy,
                normalization=norm,
                path=base / raw["path"] if raw.get("path") else None,
                license=raw.get("license"),
                provenance=raw.get("provenance"),
            )
        )
    if not sources:
        raise GraphSpecError("graphspec lists no sources")
    norm = obj.get("normalizer") or {}
    rules = []
    for r in obj.get("property_propagation") or []:
        if r.get("source") not in seen or not r.get("property"):
            raise GraphSpecError(f"propagation rule {r!r} must name a listed source and a property")
        rules.append(PropagationRule(r["source"], r["property"], r.get("target_property")))
    batch_size = int(obj.get("batch_size", DEFAULT_BATCH_SIZE))
    if batch_size < 1:
        raise GraphSpecError("batch_size must be at least 1")
    return GraphSpec(
        graph_id=str(graph_id),
        sources=sources,
        data_dir=base / obj.get("data_dir", "data"),
        predicate_table=base / obj["predicate_table"] if obj.get("predicate_table") else None,
        extra_canonical_predicates=tuple(obj.get("extra_canonical_predicates") or ()),
        normalizer=NormalizerSpec(
            compendia=_paths(base, norm.get("compendia")),
            gene_protein=_paths(base, norm.get("gene_protein")),
            drug_chemical=_paths(base, norm.get("drug_chemical")),
            types=base / norm["types"] if norm.get("types") else None,
        ),
        property_propagation=rules,
        batch_size=batch_size,
        graph_version=str(obj["graph_version"]) if obj.get("graph_version") is not None else None,
        base_dir=base,
    )


def load_graphspec(path: str | Path) -> GraphSpec:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise GraphSpecError(f"{path}: {exc}") from None
    return parse_graphspec(obj, path.parent)


__all__ = ["GraphSpec", "MergeStrategy", "NormalizerSpec", "OnUnresolvable", "SourceSpec", "load_graphspec", "parse_graphspec"]
