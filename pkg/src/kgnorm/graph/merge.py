"""Graph union with bounded-memory edge deduplication, restriction and property propagation."""

from __future__ import annotations

import heapq
import json
import logging
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence

from .._io import atomic_write
from ..compendium import read_jsonl
from ..errors import SpillDirUnwritable
from .records import EdgeRecord, NodeRecord, merge_values, sorted_union

log = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 1_000_000


@dataclass
class MergeStats:
    nodes_in: int = 0
    nodes_out: int = 0
    node_conflicts: int = 0
    edges_in: int = 0
    edges_out: int = 0
    edges_merged: int = 0
    edge_conflicts: int = 0
    spill_files: int = 0
    peak_buffered_edges: int = 0

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def merge_edge(into: EdgeRecord, other: EdgeRecord) -> int:
    """Fold a duplicate (same merge key) into ``into``; returns the scalar conflict count."""
    into.aggregator_knowledge_sources = sorted_union(into.aggregator_knowledge_sources, other.aggregator_knowledge_sources)
    into.publications = sorted_union(into.publications, other.publications)
    conflicts = 0
    for k, v in other.properties.items():
        if k in into.properties:
            into.properties[k], clash = merge_values(into.properties[k], v)
            conflicts += clash
        else:
            into.properties[k] = v
    return conflicts


def _canonical(edge: EdgeRecord) -> EdgeRecord:
    edge.aggregator_knowledge_sources = sorted(set(edge.aggregator_knowledge_sources))
    edge.publications = sorted(set(edge.publications))
    return edge


class _SpillFile:
    def __init__(self, directory: Path, n: int):
        self.path = directory / f"batch-{n:06d}.tsv"

    def write(self, batch: list[tuple[str, int, str]]) -> None:
        with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
            for key, seq, line in batch:
                fh.write(f"{key}\t{seq}\t{line}\n")

    def __iter__(self) -> Iterator[tuple[str, int, str]]:
        with open(self.path, encoding="utf-8", newline="\n") as fh:
            for raw in fh:
                key, seq, line = raw.rstrip("\n").split("\t", 2)
                yield key, int(seq), line


def _make_spill_dir(parent: str | Path | None) -> Path:
    try:
        if parent is not None:
            Path(parent).mkdir(parents=True, exist_ok=True)
        return Path(tempfile.mkdtemp(prefix="edge-merge-", dir=parent))
    except OSError as exc:
        raise SpillDirUnwritable(f"cannot create spill directory under {parent}: {exc}") from exc


def merge_edge_stream(
    edges: Iterable[EdgeRecord],
    out_path: str | Path,
    batch_size: int = DEFAULT_BATCH_SIZE,
    spill_dir: str | Path | None = None,
    stats: MergeStats | None = None,
) -> MergeStats:
    """External sort-merge dedup of edges by merge key.

    Edges are buffered as serialized ``(key, arrival, json)`` triples. Each full
    buffer is sorted and written to its own spill file; the spill files are
    then k-way merged, and runs sharing a key are folded one edge at a time.
    The first-arriving copy of a duplicate supplies scalar values. Output is
    ordered by serialized merge key.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    stats = stats if stats is not None else MergeStats()
    buffer: list[tuple[str, int, str]] = []
    spills: list[_SpillFile] = []
    workdir: Path | None = None
    seq = 0
    try:
        for edge in edges:
            buffer.append((edge.merge_key().serialize(), seq, edge.line()))
            seq += 1
            stats.peak_buffered_edges = max(stats.peak_buffered_edges, len(buffer))
            if len(buffer) >= batch_size:
                if workdir is None:
                    workdir = _make_spill_dir(spill_dir)
                buffer.sort()
                spill = _SpillFile(workdir, len(spills))
                spill.write(buffer)
                spills.append(spill)
                buffer = []
        stats.edges_in += seq

        if spills:
            if buffer:
                buffer.sort()
                spill = _SpillFile(workdir, len(spills))
                spill.write(buffer)
                spills.append(spill)
                buffer = []
            stats.spill_files = len(spills)
            # heads held by heapq.merge plus the edge being folded
            stats.peak_buffered_edges = max(stats.peak_buffered_edges, len(spills) + 1)
            stream: Iterable[tuple[str, int, str]] = heapq.merge(*spills)
        else:
            buffer.sort()
            stream = buffer

        with atomic_write(out_path) as out:
            cur_key: str | None = None
            acc: EdgeRecord | None = None
            for key, _, line in stream:
                edge = EdgeRecord.from_json(json.loads(line))
                if key == cur_key and acc is not None:
                    stats.edge_conflicts += merge_edge(acc, edge)
                    stats.edges_merged += 1
                    continue
                if acc is not None:
                    out.write(acc.line() + "\n")
                    stats.edges_out += 1
                cur_key, acc = key, _canonical(edge)
            if acc is not None:
                out.write(acc.line() + "\n")
                stats.edges_out += 1
    finally:
        if workdir is not None:
            shutil.rmtree(workdir, ignore_errors=True)
    return stats


def iter_edges(paths: Sequence[str | Path]) -> Iterator[EdgeRecord]:
    for path in paths:
        for obj in read_jsonl(path):
            yield EdgeRecord.from_json(obj)


def merge_nodes(paths: Sequence[str | Path], out_path: str | Path, stats: MergeStats | None = None,
                only: set[str] | None = None) -> MergeStats:
    """Union nodes by id: categories and list properties union, first-seen scalars win."""
    stats = stats if stats is not None else MergeStats()
    nodes: dict[str, NodeRecord] = {}
    for path in paths:
        for obj in read_jsonl(path):
            stats.nodes_in += 1
            node = NodeRecord.from_json(obj)
            if only is not None and node.id not in only:
                continue
            have = nodes.get(node.id)
            if have is None:
                nodes[node.id] = node
                continue
            if have.name is None:
                have.name = node.name
            elif node.name is not None and node.name != have.name:
                stats.node_conflicts += 1
            for c in node.categories:
                if c not in have.categories:
                    have.categories.append(c)
            for k, v in node.properties.items():
                if k in have.properties:
                    have.properties[k], clash = merge_values(have.properties[k], v)
                    stats.node_conflicts += clash
                else:
                    have.properties[k] = v
    with atomic_write(out_path) as out:
        for nid in sorted(nodes):
            out.write(nodes[nid].line() + "\n")
            stats.nodes_out += 1
    return stats


def merge_graphs(
    graphs: Sequence[tuple[str | Path, str | Path]],
    nodes_out: str | Path,
    edges_out: str | Path,
    batch_size: int = DEFAULT_BATCH_SIZE,
    spill_dir: str | Path | None = None,
) -> MergeStats:
    """Union several normalized ``(nodes, edges)`` graphs into one."""
    stats = MergeStats()
    merge_nodes([n for n, _ in graphs], nodes_out, stats)
    merge_edge_stream(iter_edges([e for _, e in graphs]), edges_out, batch_size, spill_dir, stats)
    log.info("merged %d edges into %d (%d spill files)", stats.edges_in, stats.edges_out, stats.spill_files)
    return stats


def node_ids(path: str | Path) -> set[str]:
    return {obj["id"] for obj in read_jsonl(path)}


@dataclass
class RestrictStats:
    kept: int = 0
    dropped: int = 0


def restrict_to_existing(edges_in: str | Path, existing: set[str], edges_out: str | Path) -> RestrictStats:
    """Keep only edges whose subject and object are both already in ``existing``."""
    stats = RestrictStats()
    with atomic_write(edges_out) as out:
        for obj in read_jsonl(edges_in):
            if obj["subject"] in existing and obj["object"] in existing:
                out.write(EdgeRecord.from_json(obj).line() + "\n")
                stats.kept += 1
            else:
                stats.dropped += 1
    return stats


@dataclass(frozen=True)
class PropagationRule:
    """Copy ``property`` from nodes of ``source`` onto every synonymous node as ``target_property``."""

    source: str
    property: str
    target_property: str | None = None

    @property
    def target(self) -> str:
        return self.target_property or self.property


@dataclass
class PropagationStats:
    assertions: int = 0
    nodes_updated: int = 0
    values_applied: dict[str, int] = field(default_factory=dict)


def collect_assertions(
    rules: Sequence[PropagationRule],
    source_nodes: dict[str, str | Path],
    closure: Callable[[str], str],
) -> dict[str, dict[str, Any]]:
    """Gather property values keyed by the equivalence-class key of the asserting node."""
    out: dict[str, dict[str, Any]] = {}
    for rule in rules:
        for obj in read_jsonl(source_nodes[rule.source]):
            if rule.property not in obj:
                continue
            slot = out.setdefault(closure(obj["id"]), {})
            value = obj[rule.property]
            if rule.target in slot:
                slot[rule.target], _ = merge_values(slot[rule.target], value)
            else:
                slot[rule.target] = value
    return out


def propagate_properties(
    nodes_in: str | Path,
    nodes_out: str | Path,
    assertions: dict[str, dict[str, Any]],
    closure: Callable[[str], str],
) -> PropagationStats:
    stats = PropagationStats(assertions=sum(len(v) for v in assertions.values()))
    with atomic_write(nodes_out) as out:
        for obj in read_jsonl(nodes_in):
            node = NodeRecord.from_json(obj)
            props = assertions.get(closure(node.id))
            if props:
                for k, v in props.items():
                    if k in node.properties:
                        node.properties[k], _ = merge_values(node.properties[k], v)
                    else:
                        node.properties[k] = v
                    stats.values_applied[k] = stats.values_applied.get(k, 0) + 1
                stats.nodes_updated += 1
            out.write(node.line() + "\n")
    return stats

