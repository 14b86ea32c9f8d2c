"""Equivalence clique construction, leader/label election and enrichment."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

from ._io import data_lines
from .errors import MalformedRecord, NoTypeAvailable
from .ingest import EnrichmentRecord, LabelKind, LabelRecord, MappingRecord
from .model import (
    Clique,
    Curie,
    Identifier,
    PrefixPreference,
    PrefixPreferences,
    TypeTaxonomy,
    curie_sort_key,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_LABEL_LENGTH = 100


class UnionFind:
    """Disjoint sets over hashable items with path halving and union by size."""

    def __init__(self) -> None:
        self._parent: dict[Hashable, Hashable] = {}
        self._size: dict[Hashable, int] = {}

    def add(self, x: Hashable) -> None:
        if x not in self._parent:
            self._parent[x] = x
            self._size[x] = 1

    def find(self, x: Hashable) -> Hashable:
        parent = self._parent
        if x not in parent:
            self.add(x)
            return x
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: Hashable, b: Hashable) -> Hashable:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return ra

    def __contains__(self, x: object) -> bool:
        return x in self._parent

    def groups(self) -> list[list[Hashable]]:
        out: dict[Hashable, list[Hashable]] = defaultdict(list)
        for x in self._parent:
            out[self.find(x)].append(x)
        return list(out.values())


def build_cliques(mappings: Iterable[MappingRecord], singletons: Iterable[Curie] = ()) -> list[frozenset[Curie]]:
    """Connected components of the mapping graph.

    ``singletons`` adds identifiers that have no mapping of their own (for
    example ids seen only in label files). The result is sorted by each
    component's smallest member so it does not depend on input order.
    """
    uf = UnionFind()
    for rec in mappings:
        uf.union(rec.subject, rec.object)
    for c in singletons:
        uf.add(c)
    comps = [frozenset(g) for g in uf.groups()]
    comps.sort(key=lambda s: curie_sort_key(min(s, key=curie_sort_key)))
    return comps


def order_members(members: Iterable[Curie], prefs: PrefixPreference) -> list[Curie]:
    return sorted(members, key=prefs.member_key)


def elect_leader(members: Iterable[Curie], prefs: PrefixPreference) -> Curie:
    members = list(members)
    if not members:
        raise ValueError("cannot elect a leader for an empty clique")
    return min(members, key=prefs.member_key)


def _label_rank(text: str, max_len: int) -> tuple:
    return (len(text) > max_len, len(text), text)


def choose_label(
    members: Iterable[Curie],
    labels: Mapping[Curie, Sequence[LabelRecord]],
    prefs: PrefixPreference,
    max_len: int = DEFAULT_MAX_LABEL_LENGTH,
) -> str:
    """Pick the preferred label for a clique.

    Candidates rank by the prefix preference of the member that carries them,
    then shorter first, then alphabetically. Anything longer than ``max_len``
    falls behind every acceptable candidate. Synonyms are only consulted when
    no member has a preferred label; the leader's CURIE is the last resort.
    """
    members = list(members)
    for kind in (LabelKind.PREFERRED_LABEL, LabelKind.SYNONYM):
        best = None
        for m in members:
            pkey = prefs.prefix_key(m.prefix)
            for rec in labels.get(m, ()):
                if rec.kind is not kind:
                    continue
                too_long, length, text = _label_rank(rec.text, max_len)
                key = (too_long, pkey, length, text)
                if best is None or key < best:
                    best = key
        if best is not None:
            return best[-1]
    return str(elect_leader(members, prefs))


def identifier_label(records: Sequence[LabelRecord], max_len: int = DEFAULT_MAX_LABEL_LENGTH) -> str | None:
    """Best label carried by a single identifier (its own preferred label if any)."""
    for kind in (LabelKind.PREFERRED_LABEL, LabelKind.SYNONYM):
        texts = [r.text for r in records if r.kind is kind]
        if texts:
            return min(texts, key=lambda t: _label_rank(t, max_len))
    return None


@dataclass
class TypeAssignmentRule:
    """Prefix-to-type hints plus an optional fallback type.

    Conflicting hints resolve to the deepest type in ``taxonomy``; equal
    depths go to whichever type the taxonomy file declared first.
    """

    taxonomy: TypeTaxonomy
    hints: dict[str, str] = field(default_factory=dict)
    default: str | None = None

    def __post_init__(self) -> None:
        for prefix, type_name in self.hints.items():
            if type_name not in self.taxonomy:
                raise MalformedRecord(f"hint {prefix} -> {type_name}: type not in taxonomy")
        if self.default is not None and self.default not in self.taxonomy:
            raise MalformedRecord(f"default type {self.default} not in taxonomy")

    @classmethod
    def from_file(cls, path: str | Path, taxonomy: TypeTaxonomy, default: str | None = None) -> "TypeAssignmentRule":
        hints = {}
        for lineno, line in data_lines(path):
            cols = line.split("\t")
            if len(cols) != 2 or not all(cols):
                raise MalformedRecord(f"expected prefix<TAB>type, got {line!r}", lineno, str(path))
            hints[cols[0]] = cols[1]
        return cls(taxonomy, hints, default)

    @classmethod
    def from_preferences(
        cls, prefs: PrefixPreferences, taxonomy: TypeTaxonomy, default: str | None = None
    ) -> "TypeAssignmentRule":
        """Hint each prefix toward the first type whose preference list names it."""
        hints: dict[str, str] = {}
        for type_name in prefs:
            for prefix in prefs[type_name].ordered_prefixes:
                hints.setdefault(prefix, type_name)
        return cls(taxonomy, hints, default)

    def most_specific(self, types: Iterable[str]) -> str:
        tax = self.taxonomy
        return min(set(types), key=lambda t: (-tax.depth(t), tax.position(t)))


def assign_type(members: Iterable[Curie], rules: TypeAssignmentRule) -> str:
    members = list(members)
    hinted = [rules.hints[m.prefix] for m in members if m.prefix in rules.hints]
    if hinted:
        return rules.most_specific(hinted)
    if rules.default is not None:
        return rules.default
    raise NoTypeAvailable(f"no type hint for any of {sorted(map(str, members))}")


def attach_enrichments(clique: Clique, enrich: Mapping[Curie, EnrichmentRecord]) -> Clique:
    """Minimum member IC becomes the clique IC; member taxa and descriptions are copied over."""
    idents = []
    ics = []
    for ident in clique.identifiers:
        rec = enrich.get(ident.curie)
        if rec is None:
            idents.append(ident)
            continue
        if rec.information_content is not None:
            ics.append(rec.information_content)
        taxa = ident.taxa
        if rec.taxa:
            taxa = tuple(sorted(set(taxa) | set(rec.taxa), key=curie_sort_key))
        descriptions = ident.descriptions
        if rec.description and rec.description not in descriptions:
            descriptions = descriptions + (rec.description,)
        idents.append(replace(ident, taxa=taxa, descriptions=descriptions))
    if clique.information_content is not None:
        ics.append(clique.information_content)
    return replace(clique, identifiers=tuple(idents), information_content=min(ics) if ics else None)


def group_labels(labels: Iterable[LabelRecord]) -> dict[Curie, list[LabelRecord]]:
    out: dict[Curie, list[LabelRecord]] = defaultdict(list)
    for rec in labels:
        out[rec.curie].append(rec)
    return out


def make_clique(
    members: Iterable[Curie],
    labels: Mapping[Curie, Sequence[LabelRecord]],
    prefs: PrefixPreferences,
    rules: TypeAssignmentRule,
    enrich: Mapping[Curie, EnrichmentRecord] | None = None,
    max_len: int = DEFAULT_MAX_LABEL_LENGTH,
) -> Clique:
    members = list(members)
    type_name = assign_type(members, rules)
    pref = prefs.for_type(type_name)
    ordered = order_members(members, pref)
    idents = tuple(Identifier(c, identifier_label(labels.get(c, ()), max_len)) for c in ordered)
    clique = Clique(idents, choose_label(ordered, labels, pref, max_len), type_name)
    if enrich:
        clique = attach_enrichments(clique, enrich)
    return clique


def build_compendium(
    mappings: Iterable[MappingRecord],
    labels: Iterable[LabelRecord],
    prefs: PrefixPreferences,
    rules: TypeAssignmentRule,
    enrich: Mapping[Curie, EnrichmentRecord] | None = None,
    max_len: int = DEFAULT_MAX_LABEL_LENGTH,
    singletons: Iterable[Curie] = (),
) -> list[Clique]:
    """Run one pipeline end to end and return its cliques sorted by leader."""
    by_curie = group_labels(labels)
    comps = build_cliques(mappings, singletons)
    cliques = [make_clique(c, by_curie, prefs, rules, enrich, max_len) for c in comps]
    cliques.sort(key=lambda c: curie_sort_key(c.leader))
    log.info("built %d cliques over %d identifiers", len(cliques), sum(len(c) for c in cliques))
    return cliques


@dataclass
class DuplicateReport:
    multi_clique_curies: list[tuple[Curie, list[Curie]]] = field(default_factory=list)
    duplicate_labels: list[tuple[str, list[Curie]]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.multi_clique_curies or self.duplicate_labels)


def find_duplicates(cliques: Iterable[Clique]) -> DuplicateReport:
    """Identifiers sitting in two or more cliques, and labels shared by two or more cliques."""
    by_curie: dict[Curie, list[Curie]] = defaultdict(list)
    by_label: dict[str, list[Curie]] = defaultdict(list)
    for clique in cliques:
        leader = clique.leader
        for c in clique.members:
            by_curie[c].append(leader)
        by_label[clique.preferred_label].append(leader)

    def norm(leaders: list[Curie]) -> list[Curie]:
        return sorted(leaders, key=curie_sort_key)

    report = DuplicateReport()
    for c in sorted(by_curie, key=curie_sort_key):
        if len(by_curie[c]) > 1:
            report.multi_clique_curies.append((c, norm(by_curie[c])))
    for label in sorted(by_label):
        if len(by_label[label]) > 1:
            report.duplicate_labels.append((label, norm(by_label[label])))
    return report


def detect_duplicates(compendia: Sequence[str | Path]) -> DuplicateReport:
    from .compendium import read_compendium

    def stream():
        for path in compendia:
            yield from read_compendium(path)

    return find_duplicates(stream())


class CliqueCatalog:
    """Loaded cliques addressable by leader, with member-to-leader lookup."""

    def __init__(self, cliques: Iterable[Clique] = ()):
        self.by_leader: dict[Curie, Clique] = {}
        self.leader_of: dict[Curie, Curie] = {}
        for clique in cliques:
            self.add(clique)

    def add(self, clique: Clique) -> None:
        self.by_leader[clique.leader] = clique
        for c in clique.members:
            self.leader_of.setdefault(c, clique.leader)

    @classmethod
    def from_files(cls, paths: Sequence[str | Path]) -> "CliqueCatalog":
        from .compendium import read_compendium

        cat = cls()
        for path in paths:
            for clique in read_compendium(path):
                cat.add(clique)
        return cat

    def __getitem__(self, leader: Curie) -> Clique:
        return self.by_leader[leader]

    def __contains__(self, c: object) -> bool:
        return c in self.leader_of

    def __len__(self) -> int:
        return len(self.by_leader)
