"""Identifier, clique and type-taxonomy primitives used by every other module."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import MalformedCurie, MalformedRecord


@dataclass(frozen=True, slots=True)
class Curie:
    prefix: str
    suffix: str

    def __post_init__(self) -> None:
        if not self.prefix or ":" in self.prefix or not self.suffix:
            raise MalformedCurie(f"{self.prefix}:{self.suffix}")

    def __str__(self) -> str:
        return f"{self.prefix}:{self.suffix}"

    def __repr__(self) -> str:
        return f"Curie({str(self)!r})"


def parse_curie(text: str) -> Curie:
    """Split ``text`` on its first colon.

    >>> parse_curie("a:b:c")
    Curie('a:b:c')
    """
    prefix, sep, suffix = text.partition(":")
    if not sep or not prefix or not suffix:
        raise MalformedCurie(text)
    return Curie(prefix, suffix)


def numeric_suffix_key(c: Curie) -> tuple[int, int | str]:
    """All-digit suffixes sort numerically and ahead of every other suffix."""
    s = c.suffix
    if s.isascii() and s.isdigit():
        return (0, int(s))
    return (1, s)


def curie_sort_key(c: Curie) -> tuple:
    """Total order over Curies: prefix, then numeric-aware suffix."""
    return (c.prefix, numeric_suffix_key(c))


class ConflationPolicy(str, enum.Enum):
    GENE_PROTEIN = "GeneProtein"
    DRUG_CHEMICAL = "DrugChemical"

    @classmethod
    def parse(cls, text: str) -> "ConflationPolicy":
        key = text.replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown conflation policy {text!r}")


@dataclass(frozen=True)
class SemanticType:
    name: str
    parent: str | None = None


class TypeTaxonomy:
    """Single-parent type hierarchy loaded from ``child<TAB>parent`` lines.

    A line with only one column (or a ``-`` parent) declares a root. Parents
    that never appear as a child are treated as roots. Declaration order is
    remembered because it breaks depth ties during type assignment.
    """

    def __init__(self, pairs: Iterable[tuple[str, str | None]] = ()):
        self._parent: dict[str, str | None] = {}
        self._order: dict[str, int] = {}
        for child, parent in pairs:
            self._add(child, parent)
        self._check_acyclic()

    def _add(self, child: str, parent: str | None) -> None:
        if child in self._parent and self._parent[child] not in (None, parent):
            raise MalformedRecord(f"type {child!r} has two parents")
        for name in (child, parent):
            if name is not None and name not in self._order:
                self._order[name] = len(self._order)
                self._parent.setdefault(name, None)
        self._parent[child] = parent

    def _check_acyclic(self) -> None:
        for name in self._parent:
            seen = {name}
            cur = self._parent[name]
            while cur is not None:
                if cur in seen:
                    raise MalformedRecord(f"type taxonomy has a cycle through {name!r}")
                seen.add(cur)
                cur = self._parent.get(cur)

    @classmethod
    def from_file(cls, path: str | Path) -> "TypeTaxonomy":
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) > 2 or not cols[0]:
                    raise MalformedRecord(f"expected child<TAB>parent, got {line!r}", lineno, str(path))
                parent = cols[1] if len(cols) == 2 and cols[1] not in ("", "-") else None
                pairs.append((cols[0], parent))
        return cls(pairs)

    def __contains__(self, name: object) -> bool:
        return name in self._parent

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._parent, key=self._order.__getitem__))

    def __len__(self) -> int:
        return len(self._parent)

    def get(self, name: str) -> SemanticType:
        return SemanticType(name, self._parent[name])

    def parent(self, name: str) -> str | None:
        return self._parent.get(name)

    def lineage(self, name: str) -> list[str]:
        """``name`` followed by its ancestors, most specific first."""
        out = [name]
        cur = self._parent.get(name)
        while cur is not None:
            out.append(cur)
            cur = self._parent.get(cur)
        return out

    def depth(self, name: str) -> int:
        return len(self.lineage(name)) - 1

    def position(self, name: str) -> int:
        return self._order.get(name, len(self._order))

    def is_a(self, name: str, ancestor: str) -> bool:
        return ancestor in self.lineage(name)


@dataclass(frozen=True)
class PrefixPreference:
    type_name: str
    ordered_prefixes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.ordered_prefixes)) != len(self.ordered_prefixes):
            raise MalformedRecord(f"duplicate prefix in preference list for {self.type_name}")
        object.__setattr__(self, "ordered_prefixes", tuple(self.ordered_prefixes))
        object.__setattr__(self, "_rank", {p: i for i, p in enumerate(self.ordered_prefixes)})

    def prefix_key(self, prefix: str) -> tuple[int, str]:
        # unlisted prefixes come after every listed one, alphabetically
        rank = self._rank.get(prefix)  # type: ignore[attr-defined]
        if rank is None:
            return (len(self.ordered_prefixes), prefix)
        return (rank, "")

    def member_key(self, c: Curie) -> tuple:
        return (self.prefix_key(c.prefix), numeric_suffix_key(c))


class PrefixPreferences(Mapping[str, PrefixPreference]):
    """Per-type prefix orders; lookups fall back along the type's ancestry."""

    def __init__(self, prefs: Iterable[PrefixPreference] = (), taxonomy: TypeTaxonomy | None = None):
        self._prefs = {p.type_name: p for p in prefs}
        self.taxonomy = taxonomy

    @classmethod
    def from_file(cls, path: str | Path, taxonomy: TypeTaxonomy | None = None) -> "PrefixPreferences":
        prefs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 2 or not cols[0]:
                    raise MalformedRecord(f"expected type<TAB>prefixes, got {line!r}", lineno, str(path))
                prefixes = tuple(p.strip() for p in cols[1].split(",") if p.strip())
                prefs.append(PrefixPreference(cols[0], prefixes))
        return cls(prefs, taxonomy)

    def __getitem__(self, type_name: str) -> PrefixPreference:
        return self._prefs[type_name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._prefs)

    def __len__(self) -> int:
        return len(self._prefs)

    def for_type(self, type_name: str) -> PrefixPreference:
        names = self.taxonomy.lineage(type_name) if self.taxonomy and type_name in self.taxonomy else [type_name]
        for name in names:
            if name in self._prefs:
                return self._prefs[name]
        return PrefixPreference(type_name, ())


@dataclass(frozen=True)
class Identifier:
    """One clique member together with the per-identifier metadata we keep."""

    curie: Curie
    label: str | None = None
    descriptions: tuple[str, ...] = ()
    taxa: tuple[Curie, ...] = ()


@dataclass(frozen=True)
class Clique:
    identifiers: tuple[Identifier, ...]
    preferred_label: str
    type: str
    information_content: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "identifiers", tuple(self.identifiers))
        if not self.identifiers:
            raise ValueError("a clique needs at least one identifier")
        curies = [i.curie for i in self.identifiers]
        if len(set(curies)) != len(curies):
            raise ValueError(f"clique led by {curies[0]} has repeated members")
        ic = self.information_content
        if ic is not None and not 0 <= ic <= 100:
            raise ValueError(f"information content {ic} outside [0, 100]")

    @property
    def leader(self) -> Curie:
        return self.identifiers[0].curie

    @property
    def members(self) -> list[Curie]:
        return [i.curie for i in self.identifiers]

    @property
    def taxa(self) -> list[Curie] | None:
        found = {t for i in self.identifiers for t in i.taxa}
        return sorted(found, key=curie_sort_key) or None

    @property
    def descriptions(self) -> list[str] | None:
        out: list[str] = []
        for ident in self.identifiers:
            out.extend(d for d in ident.descriptions if d not in out)
        return out or None

    def __len__(self) -> int:
        return len(self.identifiers)


@dataclass(frozen=True)
class ConflationSet:
    policy: ConflationPolicy
    leaders: tuple[Curie, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "leaders", tuple(self.leaders))
        if len(set(self.leaders)) != len(self.leaders):
            raise ValueError("conflation set repeats a leader")
