"""Graphspec execution over a content-addressed artifact store, plus graph metadata."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import platform
import shutil
import tempfile
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from .. import __version__
from ..compendium import dumps, read_jsonl
from ..errors import BuildFailed
from ..model import TypeTaxonomy
from ..normalizer import NormalizerIndex, load_index
from .merge import (
    collect_assertions,
    merge_edge_stream,
    iter_edges,
    merge_nodes,
    node_ids,
    propagate_properties,
    restrict_to_existing,
)
from .normalize import HarmonizationStats, PredicateTable, harmonize_predicates, normalize_graph
from .parsers import parse_source
from .spec import GraphSpec, MergeStrategy, SourceSpec

log = logging.getLogger(__name__)

NODES = "nodes.jsonl"
EDGES = "edges.jsonl"
MANIFEST = "manifest.json"


def file_digest(*paths: Path) -> str:
    h = hashlib.sha256()
    for path in paths:
        files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
        for f in files:
            h.update(str(f.relative_to(path) if path.is_dir() else f.name).encode())
            h.update(b"\0")
            with open(f, "rb") as fh:
                for chunk in iter(lambda: fh.read(1 << 20), b""):
                    h.update(chunk)
    return h.hexdigest()


def config_key(obj: Any) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:20]


class ArtifactStore:
    """Stage outputs under ``<root>/<stage>/<source>/<key>/``.

    A directory only appears once its stage has finished: work happens in a
    private temp directory that is renamed into place, so a crashed stage
    leaves nothing a later run would mistake for a finished artifact.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, stage: str, source: str, key: str) -> Path:
        return self.root / stage / source / key

    def exists(self, stage: str, source: str, key: str) -> bool:
        return (self.path(stage, source, key) / MANIFEST).exists()

    def manifest(self, stage: str, source: str, key: str) -> dict[str, Any]:
        with open(self.path(stage, source, key) / MANIFEST, encoding="utf-8") as fh:
            return json.load(fh)

    @contextmanager
    def produce(self, stage: str, source: str, key: str) -> Iterator[Path]:
        final = self.path(stage, source, key)
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{key}.", dir=final.parent))
        try:
            yield tmp
            try:
                os.rename(tmp, final)
            except OSError:
                # another builder finished the same artifact first
                if not self.exists(stage, source, key):
                    raise
                shutil.rmtree(tmp, ignore_errors=True)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise


@dataclass
class BuildResult:
    nodes: Path
    edges: Path
    metadata_path: Path
    metadata: dict[str, Any]
    executed: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


class _Runner:
    def __init__(self, store: ArtifactStore):
        self.store = store
        self.executed: list[str] = []
        self.skipped: list[str] = []

    def run(self, stage: str, source: str, key: str, fn) -> tuple[Path, dict[str, Any]]:
        label = f"{stage}:{source}"
        if self.store.exists(stage, source, key):
            self.skipped.append(label)
            return self.store.path(stage, source, key), self.store.manifest(stage, source, key)
        log.info("running %s (%s)", label, key)
        with self.store.produce(stage, source, key) as tmp:
            stats = fn(tmp)
            manifest = {"stage": stage, "source": source, "key": key, "stats": stats}
            (tmp / MANIFEST).write_text(dumps(manifest) + "\n", encoding="utf-8")
        self.executed.append(label)
        return self.store.path(stage, source, key), manifest


def _stats_json(stats) -> dict[str, Any]:
    return stats.to_json() if hasattr(stats, "to_json") else dict(vars(stats))


def build_from_graphspec(
    spec: GraphSpec,
    workdir: str | Path,
    out_dir: str | Path | None = None,
    index: NormalizerIndex | None = None,
) -> BuildResult:
    """Run parse, normalize, harmonize per source, then merge and propagate.

    Each stage's key hashes its configuration with the keys of the stages it
    consumes, so a stage whose key already has an artifact is skipped. A
    failing source aborts the build after every other source has been tried;
    finished artifacts stay in the store.
    """
    workdir = Path(workdir)
    out_dir = Path(out_dir) if out_dir is not None else workdir / "graphs" / spec.graph_id
    store = ArtifactStore(workdir / "artifacts")
    runner = _Runner(store)

    taxonomy = TypeTaxonomy.from_file(spec.normalizer.types) if spec.normalizer.types else None
    if index is None:
        index = load_index(spec.normalizer.compendia, spec.normalizer.gene_protein, spec.normalizer.drug_chemical, taxonomy)
    index_id = index.metadata.get("build_id", "none")

    table = PredicateTable()
    table_digest = "none"
    if spec.predicate_table is not None:
        table = PredicateTable.from_file(spec.predicate_table, set(spec.extra_canonical_predicates))
        table_digest = file_digest(spec.predicate_table)
    else:
        table.extra_canonical = set(spec.extra_canonical_predicates)

    per_source: dict[str, dict[str, Any]] = {}
    harmonized: dict[str, tuple[Path, str]] = {}
    failures: dict[str, BaseException] = {}
    for source in spec.sources:
        try:
            harmonized[source.id] = _build_source(spec, source, runner, index, index_id, table, table_digest, per_source)
        except Exception as exc:  # noqa: BLE001 - collected and re-raised as BuildFailed
            log.error("source %s failed: %s", source.id, exc)
            failures[source.id] = exc
    if failures:
        raise BuildFailed(failures)

    union = [s for s in spec.sources if s.merge_strategy is MergeStrategy.UNION]
    restricted = [s for s in spec.sources if s.merge_strategy is MergeStrategy.RESTRICT_TO_EXISTING_NODES]
    merge_key = config_key(
        {
            "union": [(s.id, harmonized[s.id][1]) for s in union],
            "restricted": [(s.id, harmonized[s.id][1]) for s in restricted],
            "batch_size": spec.batch_size,
        }
    )

    def do_merge(tmp: Path) -> dict[str, Any]:
        stats = merge_nodes([harmonized[s.id][0] / NODES for s in union], tmp / NODES)
        existing = node_ids(tmp / NODES)
        restrict_stats = {}
        edge_files = [harmonized[s.id][0] / EDGES for s in union]
        for s in restricted:
            kept = tmp / f"restricted-{s.id}.jsonl"
            rs = restrict_to_existing(harmonized[s.id][0] / EDGES, existing, kept)
            restrict_stats[s.id] = {"kept": rs.kept, "dropped": rs.dropped}
            edge_files.append(kept)
        merge_edge_stream(iter_edges(edge_files), tmp / EDGES, spec.batch_size, tmp / "spill", stats)
        for s in restricted:
            (tmp / f"restricted-{s.id}.jsonl").unlink()
        return {"merge": stats.to_json(), "restricted": restrict_stats}

    merged_dir, merge_manifest = runner.run("merge", spec.graph_id, merge_key, do_merge)
    for sid, rs in merge_manifest["stats"]["restricted"].items():
        per_source[sid]["restricted_edges_dropped"] = rs["dropped"]

    final_dir = merged_dir
    if spec.property_propagation:
        rules = spec.property_propagation
        prop_key = config_key(
            {
                "merge": merge_key,
                "rules": [(r.source, r.property, r.target) for r in rules],
                "sources": {r.source: harmonized[r.source][1] for r in rules},
                "index": index_id,
            }
        )

        def closure(curie: str) -> str:
            return index.id_leader.get(curie, curie)

        def do_propagate(tmp: Path) -> dict[str, Any]:
            assertions = collect_assertions(rules, {r.source: harmonized[r.source][0] / NODES for r in rules}, closure)
            stats = propagate_properties(merged_dir / NODES, tmp / NODES, assertions, closure)
            shutil.copyfile(merged_dir / EDGES, tmp / EDGES)
            return {"assertions": stats.assertions, "nodes_updated": stats.nodes_updated}

        final_dir, _ = runner.run("propagate", spec.graph_id, prop_key, do_propagate)

    out_dir.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(final_dir / NODES, out_dir / NODES)
    shutil.copyfile(final_dir / EDGES, out_dir / EDGES)
    context = {
        "graph_id": spec.graph_id,
        "graph_version": spec.graph_version,
        "normalizer_build_id": index_id,
        "predicate_table_digest": table_digest,
        "sources": per_source,
        "merge": merge_manifest["stats"]["merge"],
        "batch_size": spec.batch_size,
    }
    meta_path = out_dir / "metadata.json"
    metadata = emit_metadata(out_dir / NODES, out_dir / EDGES, context, meta_path)
    return BuildResult(out_dir / NODES, out_dir / EDGES, meta_path, metadata, runner.executed, runner.skipped)


def _build_source(
    spec: GraphSpec,
    source: SourceSpec,
    runner: _Runner,
    index: NormalizerIndex,
    index_id: str,
    table: PredicateTable,
    table_digest: str,
    per_source: dict[str, dict[str, Any]],
) -> tuple[Path, str]:
    version = spec.resolve_version(source)
    raw = spec.raw_path(source, version)
    parse_key = config_key({"source": source.id, "version": version, "parser": source.parser, "raw": file_digest(raw)})

    def do_parse(tmp: Path) -> dict[str, Any]:
        return parse_source(source.parser, source.id, raw, tmp / NODES, tmp / EDGES).to_json()

    parsed, parse_manifest = runner.run("parse", source.id, parse_key, do_parse)

    opts = source.normalization
    norm_key = config_key({"upstream": parse_key, "index": index_id, "options": opts.to_json()})

    def do_normalize(tmp: Path) -> dict[str, Any]:
        return normalize_graph(parsed / NODES, parsed / EDGES, index, opts, tmp / NODES, tmp / EDGES).to_json()

    normalized, norm_manifest = runner.run("normalize", source.id, norm_key, do_normalize)

    harm_key = config_key({"upstream": norm_key, "table": table_digest, "canonical": sorted(table.extra_canonical)})

    def do_harmonize(tmp: Path) -> dict[str, Any]:
        shutil.copyfile(normalized / NODES, tmp / NODES)
        return harmonize_predicates(normalized / EDGES, table, tmp / EDGES).to_json()

    harmonized, harm_manifest = runner.run("harmonize", source.id, harm_key, do_harmonize)

    ns = norm_manifest["stats"]
    hs: dict[str, Any] = harm_manifest["stats"]
    per_source[source.id] = {
        "version": version,
        "parser": source.parser,
        "merge_strategy": source.merge_strategy.value,
        "normalization": opts.to_json(),
        "license": source.license,
        "provenance": source.provenance,
        "parsed_nodes": parse_manifest["stats"]["nodes"],
        "parsed_edges": parse_manifest["stats"]["edges"],
        "resolved_ids": ns["resolved"],
        "unresolved_ids": ns["unresolved"],
        "normalization_success_fraction": ns["success_fraction"],
        "edges_in": ns["edges_in"],
        "edges_out": hs["edges_out"],
        "dropped_unresolvable_edges": ns["dropped_unresolvable_edges"],
        "dropped_unmapped_predicate_edges": hs["dropped_unmapped_predicate"],
        "artifact_keys": {"parse": parse_key, "normalize": norm_key, "harmonize": harm_key},
    }
    return harmonized, harm_key


def emit_metadata(nodes: str | Path, edges: str | Path, context: dict[str, Any], out_path: str | Path | None = None) -> dict[str, Any]:
    """Count what is actually in the graph files and combine it with the build context.

    Nodes are counted under their first (most specific) category.
    """
    node_count = 0
    by_type: Counter[str] = Counter()
    for obj in read_jsonl(nodes):
        node_count += 1
        cats = obj.get("category") or []
        by_type[cats[0] if cats else "unknown"] += 1
    edge_count = 0
    by_pred: Counter[str] = Counter()
    by_pks: Counter[str] = Counter()
    for obj in read_jsonl(edges):
        edge_count += 1
        by_pred[obj["predicate"]] += 1
        by_pks[obj["primary_knowledge_source"]] += 1

    sources = context.get("sources", {})
    resolved = sum(s.get("resolved_ids", 0) for s in sources.values())
    unresolved = sum(s.get("unresolved_ids", 0) for s in sources.values())
    digest = hashlib.sha256()
    for p in (nodes, edges):
        digest.update(Path(p).read_bytes())
    meta = {
        "graph_id": context.get("graph_id"),
        "graph_version": context.get("graph_version"),
        "build_id": digest.hexdigest()[:16],
        "build_time": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "node_count": node_count,
        "edge_count": edge_count,
        "nodes_by_category": dict(sorted(by_type.items())),
        "edges_by_predicate": dict(sorted(by_pred.items())),
        "edges_by_primary_knowledge_source": dict(sorted(by_pks.items())),
        "normalization_success_fraction": resolved / (resolved + unresolved) if resolved + unresolved else 1.0,
        "sources": sources,
        "merge": context.get("merge"),
        "normalizer_build_id": context.get("normalizer_build_id"),
        "predicate_table_digest": context.get("predicate_table_digest"),
        "tool_versions": {"kgnorm": __version__, "python": platform.python_version()},
    }
    if out_path is not None:
        Path(out_path).write_text(json.dumps(meta, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return meta


__all__ = ["ArtifactStore", "BuildResult", "HarmonizationStats", "build_from_graphspec", "emit_metadata"]
