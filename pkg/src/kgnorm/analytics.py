"""Cross-source identifier overlap before and after normalization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Sequence

from ._io import atomic_write, data_lines
from .errors import EmptySource
from .normalizer import NormalizerIndex, conflated_leaders


@dataclass(frozen=True)
class SourceIdSet:
    source: str
    ids: frozenset[str]

    @classmethod
    def of(cls, source: str, ids: Iterable[Any]) -> "SourceIdSet":
        return cls(source, frozenset(map(str, ids)))

    def __len__(self) -> int:
        return len(self.ids)


def overlap_density(a: SourceIdSet, b: SourceIdSet) -> float:
    """Shared-id count scaled by the geometric mean of the two set sizes."""
    if not a.ids or not b.ids:
        raise EmptySource(f"cannot compute density with an empty source ({a.source if not a.ids else b.source})")
    return len(a.ids & b.ids) / math.sqrt(len(a.ids) * len(b.ids))


def percent_increase(before: int, after: int) -> float:
    if before == 0:
        return math.inf if after else 0.0
    return 100.0 * (after - before) / before


Pair = tuple[str, str]


@dataclass
class OverlapMatrix:
    sources: list[str]
    counts: list[list[int]]
    densities: list[list[float]]
    connections: set[Pair] = field(default_factory=set)

    def count(self, a: str, b: str) -> int:
        return self.counts[self.sources.index(a)][self.sources.index(b)]

    def density(self, a: str, b: str) -> float:
        return self.densities[self.sources.index(a)][self.sources.index(b)]

    def degree(self, source: str) -> int:
        return sum(1 for pair in self.connections if source in pair)

    @property
    def average_degree(self) -> float:
        return 2 * len(self.connections) / len(self.sources) if self.sources else 0.0


def _pair(a: str, b: str) -> Pair:
    return (a, b) if a <= b else (b, a)


def normalize_sets(
    sets: Sequence[SourceIdSet],
    index: NormalizerIndex,
    conflate_gene_protein: bool = False,
    conflate_drug_chemical: bool = False,
) -> list[SourceIdSet]:
    """Replace every id by its clique leader; unknown ids stay as they are."""

    def leader(curie: str) -> str:
        lead = index.id_leader.get(curie)
        if lead is None:
            return curie
        if conflate_gene_protein or conflate_drug_chemical:
            return conflated_leaders(index, lead, conflate_gene_protein, conflate_drug_chemical)[0]
        return lead

    return [SourceIdSet(s.source, frozenset(leader(c) for c in s.ids)) for s in sets]


def build_matrix(
    sets: Sequence[SourceIdSet],
    normalizer: NormalizerIndex | None = None,
    **conflation: bool,
) -> OverlapMatrix:
    if len(sets) < 2:
        raise ValueError("need at least two sources")
    names = [s.source for s in sets]
    if len(set(names)) != len(names):
        raise ValueError("source names must be unique")
    if normalizer is not None:
        sets = normalize_sets(sets, normalizer, **conflation)
    n = len(sets)
    counts = [[0] * n for _ in range(n)]
    dens = [[0.0] * n for _ in range(n)]
    conns: set[Pair] = set()
    for i in range(n):
        counts[i][i] = len(sets[i])
        dens[i][i] = 1.0 if sets[i].ids else 0.0
    for i, j in combinations(range(n), 2):
        shared = len(sets[i].ids & sets[j].ids)
        counts[i][j] = counts[j][i] = shared
        if sets[i].ids and sets[j].ids:
            dens[i][j] = dens[j][i] = shared / math.sqrt(len(sets[i]) * len(sets[j]))
        if shared:
            conns.add(_pair(names[i], names[j]))
    return OverlapMatrix(names, counts, dens, conns)


@dataclass
class OverlapComparison:
    new_connections: list[Pair]
    lost_connections: list[Pair]
    pre_connections: int
    post_connections: int
    percent_increase: float
    pre_average_degree: float
    post_average_degree: float

    def to_json(self) -> dict[str, Any]:
        return {
            "pre_connections": self.pre_connections,
            "post_connections": self.post_connections,
            "new_connections": [list(p) for p in self.new_connections],
            "new_connection_count": len(self.new_connections),
            "lost_connections": [list(p) for p in self.lost_connections],
            "percent_increase": self.percent_increase if math.isfinite(self.percent_increase) else None,
            "pre_average_degree": self.pre_average_degree,
            "post_average_degree": self.post_average_degree,
        }


def compare(pre: OverlapMatrix, post: OverlapMatrix) -> OverlapComparison:
    return OverlapComparison(
        new_connections=sorted(post.connections - pre.connections),
        lost_connections=sorted(pre.connections - post.connections),
        pre_connections=len(pre.connections),
        post_connections=len(post.connections),
        percent_increase=percent_increase(len(pre.connections), len(post.connections)),
        pre_average_degree=pre.average_degree,
        post_average_degree=post.average_degree,
    )


def load_source_sets(directory: str | Path) -> list[SourceIdSet]:
    """One id per line, one file per source; the file stem names the source."""
    out = []
    for path in sorted(Path(directory).iterdir()):
        if not path.is_file() or path.name.startswith("."):
            continue
        ids = [line.split("\t", 1)[0].strip() for _, line in data_lines(path)]
        out.append(SourceIdSet.of(path.name.split(".", 1)[0], ids))
    return out


def write_matrix_tsv(matrix: OverlapMatrix, path: str | Path, values: str = "counts") -> None:
    grid = matrix.counts if values == "counts" else matrix.densities
    with atomic_write(path) as fh:
        fh.write("source\t" + "\t".join(matrix.sources) + "\n")
        for name, row in zip(matrix.sources, grid):
            cells = [str(v) if values == "counts" else repr(float(v)) for v in row]
            fh.write(name + "\t" + "\t".join(cells) + "\n")


def write_report(pre: OverlapMatrix, post: OverlapMatrix, out_dir: str | Path, figures: bool = True) -> dict[str, Any]:
    """Write matrices, a JSON comparison and (optionally) heatmap figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for tag, m in (("pre", pre), ("post", post)):
        write_matrix_tsv(m, out / f"{tag}_counts.tsv", "counts")
        write_matrix_tsv(m, out / f"{tag}_density.tsv", "density")
    report = compare(pre, post).to_json()
    report["sources"] = pre.sources
    if figures:
        from .plotting import plot_overlap_heatmaps

        report["figures"] = [p.name for p in plot_overlap_heatmaps(pre, post, out / "overlap_heatmap")]
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return report
