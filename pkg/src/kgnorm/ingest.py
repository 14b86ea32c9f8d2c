"""Streaming loaders for mapping, label and enrichment TSV files."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from ._io import data_lines
from .errors import MalformedCurie, MalformedRecord
from .model import Curie, parse_curie


@dataclass(frozen=True, slots=True)
class MappingRecord:
    subject: Curie
    object: Curie
    source: str = ""


class LabelKind(str, enum.Enum):
    PREFERRED_LABEL = "preferred_label"
    SYNONYM = "synonym"


_KIND_COLUMN = {"label": LabelKind.PREFERRED_LABEL, "synonym": LabelKind.SYNONYM}


@dataclass(frozen=True, slots=True)
class LabelRecord:
    curie: Curie
    text: str
    kind: LabelKind
    source: str = ""


@dataclass(frozen=True)
class EnrichmentRecord:
    curie: Curie
    information_content: float | None = None
    taxa: tuple[Curie, ...] | None = None
    description: str | None = None


@dataclass
class LoadStats:
    """Counters filled in while a loader is consumed.

    ``yielded + rejected`` equals ``lines`` once a mapping load finishes.
    ``skipped`` counts blank and comment lines, which are not data lines.
    """

    lines: int = 0
    yielded: int = 0
    rejected: int = 0
    self_mappings: int = 0
    duplicates: int = 0
    skipped: int = 0


@dataclass
class PrefixPairFilter:
    """Curated vocabulary-pair allow list for one mapping source."""

    source: str = ""
    allowed_pairs: set[frozenset[str]] = field(default_factory=set)

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, str]], source: str = "") -> "PrefixPairFilter":
        return cls(source, {frozenset(p) for p in pairs})

    @classmethod
    def from_file(cls, path: str | Path, source: str = "") -> "PrefixPairFilter":
        pairs = []
        for lineno, line in data_lines(path):
            cols = line.split("\t")
            if len(cols) != 2 or not all(cols):
                raise MalformedRecord(f"expected prefixA<TAB>prefixB, got {line!r}", lineno, str(path))
            pairs.append((cols[0], cols[1]))
        return cls.of(pairs, source)

    def allows(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.allowed_pairs


def _curie_at(text: str, lineno: int, path: str | Path) -> Curie:
    try:
        return parse_curie(text.strip())
    except MalformedCurie as exc:
        raise MalformedCurie(exc.text, lineno, str(path)) from None


def load_mappings(
    path: str | Path,
    prefix_filter: PrefixPairFilter | None = None,
    stats: LoadStats | None = None,
) -> Iterator[MappingRecord]:
    """Stream admitted equivalence mappings from ``subject<TAB>object[<TAB>source]`` lines.

    With no filter every well-formed pair is admitted. Self-mappings carry no
    information and are counted as rejected.
    """
    stats = stats if stats is not None else LoadStats()
    default_source = (prefix_filter.source if prefix_filter and prefix_filter.source else Path(path).name)
    for lineno, line in data_lines(path):
        stats.lines += 1
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise MalformedRecord(f"expected 2 or 3 columns, got {len(cols)}", lineno, str(path))
        subj = _curie_at(cols[0], lineno, path)
        obj = _curie_at(cols[1], lineno, path)
        if subj == obj:
            stats.rejected += 1
            stats.self_mappings += 1
            continue
        if prefix_filter is not None and not prefix_filter.allows(subj.prefix, obj.prefix):
            stats.rejected += 1
            continue
        stats.yielded += 1
        yield MappingRecord(subj, obj, cols[2] if len(cols) == 3 and cols[2] else default_source)


def load_labels(path: str | Path, stats: LoadStats | None = None) -> Iterator[LabelRecord]:
    stats = stats if stats is not None else LoadStats()
    source = Path(path).name
    for lineno, line in data_lines(path):
        stats.lines += 1
        cols = line.split("\t")
        if len(cols) != 3:
            raise MalformedRecord(f"expected curie<TAB>kind<TAB>text, got {line!r}", lineno, str(path))
        kind = _KIND_COLUMN.get(cols[1])
        if kind is None:
            raise MalformedRecord(f"unknown label kind {cols[1]!r}", lineno, str(path))
        text = cols[2].strip()
        if not text:
            raise MalformedRecord("empty label text", lineno, str(path))
        stats.yielded += 1
        yield LabelRecord(_curie_at(cols[0], lineno, path), text, kind, source)


def load_enrichments(path: str | Path, stats: LoadStats | None = None) -> dict[Curie, EnrichmentRecord]:
    """Read ``curie<TAB>ic|-<TAB>taxa_csv|-[<TAB>description]`` lines, last line wins.

    Repeated identifiers are tallied in ``stats.duplicates``.
    """
    stats = stats if stats is not None else LoadStats()
    out: dict[Curie, EnrichmentRecord] = {}
    for lineno, line in data_lines(path):
        stats.lines += 1
        cols = line.split("\t")
        if len(cols) not in (3, 4):
            raise MalformedRecord(f"expected 3 or 4 columns, got {len(cols)}", lineno, str(path))
        curie = _curie_at(cols[0], lineno, path)
        ic: float | None = None
        if cols[1].strip() not in ("", "-"):
            try:
                ic = float(cols[1])
            except ValueError:
                raise MalformedRecord(f"non-numeric information content {cols[1]!r}", lineno, str(path)) from None
            if math.isnan(ic) or not 0 <= ic <= 100:
                raise MalformedRecord(f"information content {cols[1]} outside [0, 100]", lineno, str(path))
            if ic.is_integer():
                ic = int(ic)
        taxa = None
        if cols[2].strip() not in ("", "-"):
            taxa = tuple(_curie_at(t, lineno, path) for t in cols[2].split(",") if t.strip())
        description = cols[3].strip() if len(cols) == 4 and cols[3].strip() not in ("", "-") else None
        if ic is None and taxa is None and description is None:
            raise MalformedRecord("enrichment line carries no values", lineno, str(path))
        if curie in out:
            stats.duplicates += 1
        stats.yielded += 1
        out[curie] = EnrichmentRecord(curie, ic, taxa, description)
    return out
