"""In-memory identifier normalization index and its HTTP front end."""

from __future__ import annotations

import hashlib
import logging
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import BaseModel

from .compendium import read_compendium, read_conflation
from .errors import DuplicateLeader
from .model import ConflationPolicy, Curie, TypeTaxonomy, curie_sort_key, parse_curie

log = logging.getLogger(__name__)


@dataclass
class NormalizerIndex:
    """Seven lookup tables plus the member lists needed to answer with whole cliques.

    All keys and values are rendered CURIE strings so lookups never construct
    objects. Treat an instance as frozen once :func:`load_index` returns it.
    """

    id_label: dict[str, str] = field(default_factory=dict)
    id_leader: dict[str, str] = field(default_factory=dict)
    leader_type: dict[str, str] = field(default_factory=dict)
    leader_props: dict[str, dict[str, Any]] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)
    gene_protein: dict[str, tuple[str, ...]] = field(default_factory=dict)
    drug_chemical: dict[str, tuple[str, ...]] = field(default_factory=dict)
    leader_members: dict[str, tuple[str, ...]] = field(default_factory=dict)
    type_lineage: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def leader(self, curie: str) -> str | None:
        return self.id_leader.get(curie)

    def __contains__(self, curie: object) -> bool:
        return curie in self.id_leader

    def __len__(self) -> int:
        return len(self.leader_members)


@dataclass
class NormalizationResult:
    query: str
    leader: str
    label: str | None
    equivalent_identifiers: list[tuple[str, str | None]]
    type_lineage: list[str]
    information_content: float | None = None
    taxa: list[str] | None = None
    descriptions: list[str] | None = None

    def to_json(self) -> dict[str, Any]:
        def ident(curie: str, label: str | None) -> dict[str, str]:
            out = {"identifier": curie}
            if label is not None:
                out["label"] = label
            return out

        body: dict[str, Any] = {
            "id": ident(self.leader, self.label),
            "equivalent_identifiers": [ident(c, l) for c, l in self.equivalent_identifiers],
            "type": list(self.type_lineage),
        }
        if self.information_content is not None:
            body["information_content"] = self.information_content
        if self.taxa:
            body["taxa"] = list(self.taxa)
        if self.descriptions:
            body["description"] = self.descriptions[0]
        return body


def _digest(paths: Iterable[Path]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(p.name.encode())
        with open(p, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    return h.hexdigest()[:16]


def load_index(
    compendia: Sequence[str | Path] = (),
    gene_protein: Sequence[str | Path] = (),
    drug_chemical: Sequence[str | Path] = (),
    taxonomy: TypeTaxonomy | None = None,
    build_id: str | None = None,
) -> NormalizerIndex:
    """Build a fresh index from compendium and conflation files.

    Raises :class:`DuplicateLeader` when two cliques in the load share a leader.
    An identifier listed in several cliques keeps its first clique; the number
    of such identifiers is reported in the metadata.
    """
    idx = NormalizerIndex()
    prefix_dist: dict[str, Counter] = defaultdict(Counter)
    shadowed = 0
    for path in compendia:
        for clique in read_compendium(path):
            leader = str(clique.leader)
            if leader in idx.leader_type:
                raise DuplicateLeader(f"{leader} leads more than one clique ({path})")
            members = tuple(str(c) for c in clique.members)
            idx.leader_members[leader] = members
            idx.leader_type[leader] = clique.type
            props: dict[str, Any] = {"preferred_name": clique.preferred_label}
            if clique.information_content is not None:
                props["information_content"] = clique.information_content
            if clique.taxa:
                props["taxa"] = [str(t) for t in clique.taxa]
            if clique.descriptions:
                props["descriptions"] = clique.descriptions
            idx.leader_props[leader] = props
            for ident, member in zip(clique.identifiers, members):
                if member in idx.id_leader:
                    shadowed += 1
                    continue
                idx.id_leader[member] = leader
                if ident.label is not None:
                    idx.id_label[member] = ident.label
                prefix_dist[clique.type][ident.curie.prefix] += 1

    for name in set(idx.leader_type.values()):
        lineage = taxonomy.lineage(name) if taxonomy and name in taxonomy else [name]
        idx.type_lineage[name] = tuple(lineage)

    dropped = 0
    for policy, paths, table in (
        (ConflationPolicy.GENE_PROTEIN, gene_protein, idx.gene_protein),
        (ConflationPolicy.DRUG_CHEMICAL, drug_chemical, idx.drug_chemical),
    ):
        for path in paths:
            for cset in read_conflation(path, policy):
                leaders: list[str] = []
                for c in cset.leaders:
                    lead = idx.id_leader.get(str(c))
                    if lead is None:
                        dropped += 1
                    elif lead not in leaders:
                        leaders.append(lead)
                if len(leaders) < 2:
                    continue
                ordered = tuple(leaders)
                for lead in ordered:
                    table[lead] = ordered

    files = [Path(p) for p in (*compendia, *gene_protein, *drug_chemical)]
    idx.metadata = {
        "build_id": build_id or (_digest(files) if files else "empty"),
        "compendia": [Path(p).name for p in compendia],
        "clique_count": len(idx.leader_members),
        "identifier_count": len(idx.id_leader),
        "conflations": {
            ConflationPolicy.GENE_PROTEIN.value: bool(gene_protein),
            ConflationPolicy.DRUG_CHEMICAL.value: bool(drug_chemical),
        },
        "types": sorted(prefix_dist),
        "prefix_distribution": {t: dict(sorted(c.items())) for t, c in sorted(prefix_dist.items())},
        "shadowed_identifiers": shadowed,
        "unresolved_conflation_members": dropped,
    }
    log.info("loaded %d cliques, %d identifiers", len(idx.leader_members), len(idx.id_leader))
    return idx


def conflated_leaders(
    index: NormalizerIndex, leader: str, conflate_gene_protein: bool, conflate_drug_chemical: bool
) -> list[str]:
    """Ordered leaders whose cliques answer for ``leader`` under the given toggles.

    GeneProtein expansion happens first; each resulting leader is then expanded
    through its DrugChemical set when that toggle is on.
    """
    out = [leader]
    if conflate_gene_protein and leader in index.gene_protein:
        out = list(index.gene_protein[leader])
    if conflate_drug_chemical:
        expanded: list[str] = []
        for lead in out:
            for x in index.drug_chemical.get(lead, (lead,)):
                if x not in expanded:
                    expanded.append(x)
        out = expanded
    return out


def normalize_one(
    index: NormalizerIndex, curie: str, conflate_gene_protein: bool = False, conflate_drug_chemical: bool = False
) -> NormalizationResult | None:
    leader = index.id_leader.get(curie)
    if leader is None:
        return None
    leaders = conflated_leaders(index, leader, conflate_gene_protein, conflate_drug_chemical)
    head = leaders[0]
    labels = index.id_label
    equivalents: list[tuple[str, str | None]] = []
    for lead in leaders:
        equivalents.extend((m, labels.get(m)) for m in index.leader_members[lead])
    props = index.leader_props[head]
    return NormalizationResult(
        query=curie,
        leader=head,
        label=props.get("preferred_name"),
        equivalent_identifiers=equivalents,
        type_lineage=list(index.type_lineage[index.leader_type[head]]),
        information_content=props.get("information_content"),
        taxa=props.get("taxa"),
        descriptions=props.get("descriptions"),
    )


def normalize_batch(
    index: NormalizerIndex,
    curies: Iterable[str | Curie],
    conflate_gene_protein: bool = False,
    conflate_drug_chemical: bool = False,
) -> dict[str, NormalizationResult | None]:
    """Normalize many identifiers; the result keeps query order and maps misses to None."""
    return {
        key: normalize_one(index, key, conflate_gene_protein, conflate_drug_chemical)
        for key in map(str, curies)
    }


def status(index: NormalizerIndex) -> dict[str, Any]:
    return dict(index.metadata)


class IndexHolder:
    """Publishes a fully built index to readers by swapping one reference."""

    def __init__(self, index: NormalizerIndex | None = None):
        self._index = index if index is not None else load_index()
        self._lock = threading.Lock()

    @property
    def index(self) -> NormalizerIndex:
        return self._index

    def swap(self, index: NormalizerIndex) -> NormalizerIndex:
        with self._lock:
            old, self._index = self._index, index
        return old


class CurieQuery(BaseModel):
    curies: list[str]
    conflate: bool = False
    drug_chemical_conflate: bool = False


def create_app(holder: IndexHolder):
    from fastapi import FastAPI, Query

    app = FastAPI(title="kgnorm node normalizer")

    def respond(curies: list[str], conflate: bool, drug_chemical: bool) -> dict[str, Any]:
        results = normalize_batch(holder.index, curies, conflate, drug_chemical)
        return {k: (v.to_json() if v is not None else None) for k, v in results.items()}

    @app.post("/get_normalized_nodes")
    def post_normalized(body: CurieQuery) -> dict[str, Any]:
        return respond(body.curies, body.conflate, body.drug_chemical_conflate)

    @app.get("/get_normalized_nodes")
    def get_normalized(
        curie: list[str] = Query(default=[]),
        conflate: bool = False,
        drug_chemical_conflate: bool = False,
    ) -> dict[str, Any]:
        return respond(curie, conflate, drug_chemical_conflate)

    @app.get("/status")
    def get_status() -> dict[str, Any]:
        return status(holder.index)

    return app


def leader_of(index: NormalizerIndex, curie: Curie | str) -> Curie | None:
    lead = index.id_leader.get(str(curie))
    return parse_curie(lead) if lead is not None else None


def sorted_leaders(index: NormalizerIndex) -> list[str]:
    return sorted(index.leader_members, key=lambda s: curie_sort_key(parse_curie(s)))
