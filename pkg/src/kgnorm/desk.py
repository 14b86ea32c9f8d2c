"""The bundled desk fixture: a small hand-checkable corpus that runs every stage."""

from __future__ import annotations

import shutil
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .cliques import detect_duplicates
from .compendium import export_kgx_equivalence, read_compendium, write_reports
from .model import ConflationPolicy
from .pipeline import run_clique_pipeline, run_conflation_pipeline

# pipeline name -> fallback type when no prefix hint applies
PIPELINES = {
    "chemical": "ChemicalEntity",
    "drug": "Drug",
    "gene": "Gene",
    "protein": "Protein",
    "disease": "Disease",
    "process": "BiologicalProcess",
    "taxon": "OrganismTaxon",
}


def desk_source() -> Path:
    return Path(str(resources.files("kgnorm") / "data" / "desk"))


@dataclass
class DeskBuild:
    root: Path

    @property
    def compendia(self) -> list[Path]:
        return [self.root / "compendia" / f"{name}.jsonl" for name in PIPELINES]

    @property
    def synonyms(self) -> list[Path]:
        return [self.root / "synonyms" / f"{name}.jsonl" for name in PIPELINES]

    @property
    def gene_protein(self) -> Path:
        return self.root / "conflation" / "gene_protein.jsonl"

    @property
    def drug_chemical(self) -> Path:
        return self.root / "conflation" / "drug_chemical.jsonl"

    @property
    def types(self) -> Path:
        return self.root / "types.tsv"

    @property
    def graphspec(self) -> Path:
        return self.root / "graph" / "graphspec.yaml"

    @property
    def overlap(self) -> Path:
        return self.root / "overlap"


def build_desk(out_dir: str | Path, source: str | Path | None = None) -> DeskBuild:
    """Run every desk pipeline into ``out_dir`` and lay out graph and overlap inputs beside the results.

    ``source`` defaults to the bundled corpus; any directory with the same layout works.
    """
    src = Path(source) if source is not None else desk_source()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("types.tsv", "prefs.tsv", "enrich.tsv"):
        shutil.copyfile(src / name, out / name)
    for name in ("graph", "overlap"):
        shutil.copytree(src / name, out / name, dirs_exist_ok=True)
    build = DeskBuild(out)

    for name, default in PIPELINES.items():
        pdir = src / name
        hints = pdir / "hints.tsv"
        filt = pdir / "filter.tsv"
        run_clique_pipeline(
            mappings=[pdir / "mappings.tsv"],
            labels=[pdir / "labels.tsv"],
            enrich=[src / "enrich.tsv"],
            prefs_path=src / "prefs.tsv",
            types_path=src / "types.tsv",
            out=out / "compendia" / f"{name}.jsonl",
            synonyms_out=out / "synonyms" / f"{name}.jsonl",
            hints_path=hints if hints.exists() else None,
            default_type=default,
            filter_path=filt if filt.exists() else None,
            include_singletons=True,
        )

    run_conflation_pipeline(
        ConflationPolicy.GENE_PROTEIN,
        [src / "conflation" / "gene_protein.tsv"],
        build.compendia,
        build.gene_protein,
        types_path=build.types,
    )
    run_conflation_pipeline(
        ConflationPolicy.DRUG_CHEMICAL,
        [src / "conflation" / "drug_chemical.tsv"],
        build.compendia,
        build.drug_chemical,
        types_path=build.types,
    )
    write_reports(detect_duplicates(build.compendia), out / "reports" / "duplicates.tsv")
    cliques = [c for path in build.compendia for c in read_compendium(path)]
    export_kgx_equivalence(cliques, out / "kgx" / "nodes.jsonl", out / "kgx" / "edges.jsonl")
    return build
