"""GeneProtein and DrugChemical conflation sets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ._io import data_lines
from .cliques import CliqueCatalog, UnionFind
from .errors import MalformedRecord, UnresolvableCurie
from .ingest import _curie_at
from .model import ConflationPolicy, ConflationSet, Curie, TypeTaxonomy, curie_sort_key, numeric_suffix_key

DEFAULT_DRUG_CHEMICAL_TYPE_ORDER = (
    "SmallMolecule",
    "MolecularMixture",
    "ComplexMolecularMixture",
    "ChemicalMixture",
    "Drug",
    "MolecularEntity",
    "ChemicalEntity",
)


@dataclass(frozen=True, slots=True)
class CrossTypeMapping:
    left: Curie
    right: Curie
    policy: ConflationPolicy


def load_cross_type_mappings(path: str | Path, policy: ConflationPolicy) -> Iterator[CrossTypeMapping]:
    for lineno, line in data_lines(path):
        cols = line.split("\t")
        if len(cols) < 2:
            raise MalformedRecord(f"expected left<TAB>right, got {line!r}", lineno, str(path))
        yield CrossTypeMapping(_curie_at(cols[0], lineno, path), _curie_at(cols[1], lineno, path), policy)


def _suffix_order(c: Curie) -> tuple:
    return (numeric_suffix_key(c), c.prefix)


def order_gene_protein(
    cset: ConflationSet,
    catalog: CliqueCatalog,
    taxonomy: TypeTaxonomy | None = None,
    gene_type: str = "Gene",
) -> ConflationSet:
    """Genes first, then everything else; numeric suffix order inside each block."""

    def is_gene(leader: Curie) -> bool:
        t = catalog[leader].type
        if taxonomy is not None and t in taxonomy:
            return taxonomy.is_a(t, gene_type)
        return t == gene_type

    leaders = sorted(cset.leaders, key=lambda c: (not is_gene(c), _suffix_order(c)))
    return ConflationSet(cset.policy, tuple(leaders))


def drug_chemical_key(
    leader: Curie,
    catalog: CliqueCatalog,
    type_order: Sequence[str] = DEFAULT_DRUG_CHEMICAL_TYPE_ORDER,
    ic_ascending: bool = True,
) -> tuple:
    clique = catalog[leader]
    try:
        type_rank = list(type_order).index(clique.type)
    except ValueError:
        type_rank = len(type_order)
    ic = clique.information_content
    if ic is None:
        ic_key: tuple = (1, 0.0)
    else:
        ic_key = (0, ic if ic_ascending else -ic)
    return (type_rank, ic_key, -len(clique), _suffix_order(leader))


def order_drug_chemical(
    cset: ConflationSet,
    catalog: CliqueCatalog,
    type_order: Sequence[str] = DEFAULT_DRUG_CHEMICAL_TYPE_ORDER,
    ic_ascending: bool = True,
) -> ConflationSet:
    """Sort by type preference, information content (missing last), larger clique first, then suffix."""
    leaders = sorted(cset.leaders, key=lambda c: drug_chemical_key(c, catalog, type_order, ic_ascending))
    return ConflationSet(cset.policy, tuple(leaders))


def build_conflations(
    mappings: Iterable[CrossTypeMapping],
    catalog: CliqueCatalog,
    taxonomy: TypeTaxonomy | None = None,
    type_order: Sequence[str] = DEFAULT_DRUG_CHEMICAL_TYPE_ORDER,
    ic_ascending: bool = True,
) -> list[ConflationSet]:
    """Connected components over leader-normalized cross-type mappings, one family per policy.

    Every mapped identifier must belong to a loaded clique. Components with a
    single leader (both sides already in one clique) are dropped.
    """
    finders: dict[ConflationPolicy, UnionFind] = {}
    for m in mappings:
        ends = []
        for c in (m.left, m.right):
            leader = catalog.leader_of.get(c)
            if leader is None:
                raise UnresolvableCurie(str(c))
            ends.append(leader)
        finders.setdefault(m.policy, UnionFind()).union(*ends)

    out: list[ConflationSet] = []
    for policy in ConflationPolicy:
        uf = finders.get(policy)
        if uf is None:
            continue
        for group in uf.groups():
            if len(group) < 2:
                continue
            cset = ConflationSet(policy, tuple(group))
            if policy is ConflationPolicy.GENE_PROTEIN:
                cset = order_gene_protein(cset, catalog, taxonomy)
            else:
                cset = order_drug_chemical(cset, catalog, type_order, ic_ascending)
            out.append(cset)
    out.sort(key=lambda s: (list(ConflationPolicy).index(s.policy), curie_sort_key(s.leaders[0])))
    return out
