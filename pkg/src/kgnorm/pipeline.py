"""File-to-file drivers for clique and conflation builds (used by the CLI)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import chain
from pathlib import Path
from typing import Sequence

from .cliques import CliqueCatalog, TypeAssignmentRule, build_compendium, group_labels
from .compendium import synonym_entry, write_compendium, write_conflation, write_synonyms
from .conflation import DEFAULT_DRUG_CHEMICAL_TYPE_ORDER, build_conflations, load_cross_type_mappings
from .ingest import LoadStats, PrefixPairFilter, load_enrichments, load_labels, load_mappings
from .model import Clique, ConflationPolicy, ConflationSet, PrefixPreferences, TypeTaxonomy

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    cliques: list[Clique]
    compendium: Path
    synonyms: Path | None
    mapping_stats: LoadStats = field(default_factory=LoadStats)


def run_clique_pipeline(
    mappings: Sequence[str | Path],
    labels: Sequence[str | Path],
    enrich: Sequence[str | Path],
    prefs_path: str | Path,
    types_path: str | Path,
    out: str | Path,
    synonyms_out: str | Path | None = None,
    hints_path: str | Path | None = None,
    default_type: str | None = None,
    filter_path: str | Path | None = None,
    include_singletons: bool = False,
    max_label_length: int = 100,
) -> PipelineResult:
    """Build one pipeline's compendium (and synonym file) from its input files.

    With ``include_singletons`` every identifier named in the label files
    becomes a clique even when nothing maps to it.
    """
    taxonomy = TypeTaxonomy.from_file(types_path)
    prefs = PrefixPreferences.from_file(prefs_path, taxonomy)
    if hints_path is not None:
        rules = TypeAssignmentRule.from_file(hints_path, taxonomy, default_type)
    else:
        rules = TypeAssignmentRule.from_preferences(prefs, taxonomy, default_type)
    prefix_filter = PrefixPairFilter.from_file(filter_path) if filter_path else None

    stats = LoadStats()
    records = chain.from_iterable(load_mappings(p, prefix_filter, stats) for p in mappings)
    label_records = [rec for p in labels for rec in load_labels(p)]
    enrichments = {}
    for p in enrich:
        enrichments.update(load_enrichments(p))
    singletons = {rec.curie for rec in label_records} if include_singletons else ()

    cliques = build_compendium(records, label_records, prefs, rules, enrichments, max_label_length, singletons)
    write_compendium(cliques, out, presorted=True)
    if synonyms_out is not None:
        by_curie = group_labels(label_records)
        entries = (
            synonym_entry(c, (r.text for m in c.members for r in by_curie.get(m, ())), taxonomy) for c in cliques
        )
        write_synonyms(entries, synonyms_out, presorted=True)
    log.info("%s: %d mapping lines, %d admitted, %d rejected", out, stats.lines, stats.yielded, stats.rejected)
    return PipelineResult(cliques, Path(out), Path(synonyms_out) if synonyms_out else None, stats)


def run_conflation_pipeline(
    policy: ConflationPolicy,
    mappings: Sequence[str | Path],
    compendia: Sequence[str | Path],
    out: str | Path,
    types_path: str | Path | None = None,
    type_order: Sequence[str] = DEFAULT_DRUG_CHEMICAL_TYPE_ORDER,
    ic_ascending: bool = True,
) -> list[ConflationSet]:
    catalog = CliqueCatalog.from_files(compendia)
    taxonomy = TypeTaxonomy.from_file(types_path) if types_path else None
    records = chain.from_iterable(load_cross_type_mappings(p, policy) for p in mappings)
    sets = [s for s in build_conflations(records, catalog, taxonomy, type_order, ic_ascending) if s.policy is policy]
    write_conflation(sets, out)
    return sets
