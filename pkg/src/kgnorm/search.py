"""Label and synonym search with exact-match boosting and autocomplete."""

from __future__ import annotations

import bisect
import enum
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .compendium import SynonymEntry, read_synonyms
from .errors import NotFound
from .model import Curie, curie_sort_key, parse_curie

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return [t.casefold() for t in _TOKEN.findall(text)]


def keyword(text: str) -> str:
    """Whole-string key: case-folded, whitespace runs collapsed."""
    return " ".join(text.split()).casefold()


class MatchField(str, enum.Enum):
    LABEL_EXACT = "label_exact"
    SYNONYM_EXACT = "synonym_exact"
    LABEL_TOKEN = "label_token"
    SYNONYM_TOKEN = "synonym_token"


# Band order is the contract; the magnitudes only need to keep bands apart
# once a token fraction in (0, 1] is added.
DEFAULT_BAND_SCORES = {
    MatchField.LABEL_EXACT: 1000.0,
    MatchField.SYNONYM_EXACT: 500.0,
    MatchField.LABEL_TOKEN: 10.0,
    MatchField.SYNONYM_TOKEN: 5.0,
}


def rank_score(field: MatchField, token_fraction: float = 1.0, bands: dict[MatchField, float] | None = None) -> float:
    return (bands or DEFAULT_BAND_SCORES)[field] + token_fraction


@dataclass(frozen=True)
class SearchDocument:
    leader: Curie
    preferred_label: str
    synonyms: tuple[str, ...]
    types: tuple[str, ...]
    taxa: tuple[Curie, ...] = ()
    clique_size: int = 1

    @property
    def texts(self) -> tuple[str, ...]:
        """Preferred label first, then synonyms, without repeats."""
        seen = [self.preferred_label]
        seen.extend(s for s in self.synonyms if s != self.preferred_label)
        return tuple(seen)


@dataclass(frozen=True)
class ScoredMatch:
    document: SearchDocument
    score: float
    matched_field: MatchField
    matched_text: str

    def to_json(self) -> dict[str, Any]:
        d = self.document
        return {
            "curie": str(d.leader),
            "label": d.preferred_label,
            "synonyms": list(d.synonyms),
            "types": list(d.types),
            "taxa": [str(t) for t in d.taxa],
            "clique_identifier_count": d.clique_size,
            "score": self.score,
            "matched_field": self.matched_field.value,
            "matched_text": self.matched_text,
        }


class SearchIndex:
    """Each text is indexed twice: as word tokens and as one case-folded keyword.

    Postings point at ``(doc, text)`` pairs; text 0 of every document is its
    preferred label. Token prefixes for autocomplete come from a sorted term
    list, so a prefix lookup is a bisect plus a scan of the matching run.
    """

    def __init__(self, documents: Iterable[SearchDocument] = (), bands: dict[MatchField, float] | None = None):
        self.bands = dict(bands or DEFAULT_BAND_SCORES)
        self.docs: list[SearchDocument] = []
        self.by_leader: dict[Curie, int] = {}
        self._text_tokens: list[list[frozenset[str]]] = []
        self._postings: dict[str, set[tuple[int, int]]] = defaultdict(set)
        self._keywords: dict[str, set[tuple[int, int]]] = defaultdict(set)
        for doc in documents:
            self.add(doc)
        self._terms: list[str] = sorted(self._postings)

    def add(self, doc: SearchDocument) -> None:
        i = len(self.docs)
        self.docs.append(doc)
        self.by_leader[doc.leader] = i
        token_sets = []
        for j, text in enumerate(doc.texts):
            toks = frozenset(tokenize(text))
            token_sets.append(toks)
            for t in toks:
                self._postings[t].add((i, j))
            self._keywords[keyword(text)].add((i, j))
        self._text_tokens.append(token_sets)
        self._terms = []

    @classmethod
    def from_entries(cls, entries: Iterable[SynonymEntry], **kwargs) -> "SearchIndex":
        return cls(
            (SearchDocument(e.curie, e.preferred_name, e.names, e.types, e.taxa, e.clique_size) for e in entries),
            **kwargs,
        )

    def _prefix_terms(self, prefix: str) -> list[str]:
        if not self._terms:
            self._terms = sorted(self._postings)
        start = bisect.bisect_left(self._terms, prefix)
        out = []
        for term in self._terms[start:]:
            if not term.startswith(prefix):
                break
            out.append(term)
        return out

    def lookup(
        self,
        query: str,
        autocomplete: bool = False,
        limit: int | None = 10,
        type_filter: str | Sequence[str] | None = None,
        prefix_filter: Sequence[str] | None = None,
        taxa_filter: Sequence[str | Curie] | None = None,
    ) -> list[ScoredMatch]:
        if limit is not None and limit < 1:
            raise ValueError("limit must be at least 1")
        tokens = tokenize(query)
        kw = keyword(query)
        if not kw or not tokens and kw not in self._keywords:
            return []
        qtokens = list(dict.fromkeys(tokens))
        last = tokens[-1] if tokens else None
        prefix_hits: set[str] = set()
        if autocomplete and last is not None:
            prefix_hits = set(self._prefix_terms(last))

        candidates: set[int] = {i for i, _ in self._keywords.get(kw, ())}
        for t in qtokens:
            candidates.update(i for i, _ in self._postings.get(t, ()))
        for t in prefix_hits:
            candidates.update(i for i, _ in self._postings[t])

        keep = _filter(type_filter, prefix_filter, taxa_filter)
        matches = []
        for i in candidates:
            doc = self.docs[i]
            if keep is not None and not keep(doc):
                continue
            m = self._score(i, kw, qtokens, last, prefix_hits)
            if m is not None:
                matches.append(m)
        matches.sort(key=lambda m: (-m.score, curie_sort_key(m.document.leader)))
        return matches if limit is None else matches[:limit]

    def _score(self, i: int, kw: str, qtokens: list[str], last: str | None, prefix_hits: set[str]) -> ScoredMatch | None:
        doc = self.docs[i]
        best: tuple[float, MatchField, str] | None = None
        for j, text in enumerate(doc.texts):
            is_label = j == 0
            if keyword(text) == kw:
                field = MatchField.LABEL_EXACT if is_label else MatchField.SYNONYM_EXACT
                cand = (rank_score(field, 1.0, self.bands), field, text)
            else:
                toks = self._text_tokens[i][j]
                hit = sum(1 for t in qtokens if t in toks or (t == last and prefix_hits and prefix_hits & toks))
                if not hit:
                    continue
                field = MatchField.LABEL_TOKEN if is_label else MatchField.SYNONYM_TOKEN
                cand = (rank_score(field, hit / len(qtokens), self.bands), field, text)
            if best is None or cand[0] > best[0]:
                best = cand
        if best is None:
            return None
        return ScoredMatch(doc, best[0], best[1], best[2])

    def synonyms_of(self, leader: Curie | str) -> list[str]:
        key = parse_curie(leader) if isinstance(leader, str) else leader
        i = self.by_leader.get(key)
        if i is None:
            raise NotFound(str(leader))
        return list(self.docs[i].texts)

    def __len__(self) -> int:
        return len(self.docs)


def _filter(type_filter, prefix_filter, taxa_filter):
    checks = []
    if type_filter:
        wanted = {type_filter} if isinstance(type_filter, str) else set(type_filter)
        wanted = {t.removeprefix("biolink:") for t in wanted}
        checks.append(lambda d: not wanted.isdisjoint(d.types))
    if prefix_filter:
        prefixes = set(prefix_filter)
        checks.append(lambda d: d.leader.prefix in prefixes)
    if taxa_filter:
        taxa = {str(t) for t in taxa_filter}
        checks.append(lambda d: any(str(t) in taxa for t in d.taxa))
    if not checks:
        return None
    return lambda d: all(c(d) for c in checks)


def build_search_index(synonym_files: Sequence[str | Path], **kwargs) -> SearchIndex:
    def entries():
        for path in synonym_files:
            yield from read_synonyms(path)

    return SearchIndex.from_entries(entries(), **kwargs)


def lookup(index: SearchIndex, query: str, **kwargs) -> list[ScoredMatch]:
    return index.lookup(query, **kwargs)


def synonyms_of(index: SearchIndex, leader: Curie | str) -> list[str]:
    return index.synonyms_of(leader)


def _split_csv(value: str | None) -> list[str] | None:
    if not value:
        return None
    parts = [p.strip() for chunk in value.split("|") for p in chunk.split(",")]
    return [p for p in parts if p] or None


def create_app(holder):
    """HTTP front end; ``holder.index`` is read on every request so swaps take effect atomically."""
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="kgnorm name resolver")

    @app.get("/lookup")
    def http_lookup(
        string: str = "",
        autocomplete: bool = False,
        limit: int = 10,
        biolink_type: str | None = None,
        only_prefixes: str | None = None,
        only_taxa: str | None = None,
    ) -> list[dict[str, Any]]:
        if limit < 1:
            raise HTTPException(status_code=422, detail="limit must be at least 1")
        hits = holder.index.lookup(
            string,
            autocomplete=autocomplete,
            limit=limit,
            type_filter=_split_csv(biolink_type),
            prefix_filter=_split_csv(only_prefixes),
            taxa_filter=_split_csv(only_taxa),
        )
        return [m.to_json() for m in hits]

    @app.get("/synonyms")
    def http_synonyms(preferred_curie: str) -> dict[str, list[str]]:
        try:
            return {preferred_curie: holder.index.synonyms_of(preferred_curie)}
        except (NotFound, ValueError):
            raise HTTPException(status_code=404, detail=f"unknown identifier {preferred_curie}") from None

    return app


class SearchIndexHolder:
    def __init__(self, index: SearchIndex | None = None):
        self.index = index if index is not None else SearchIndex()

    def swap(self, index: SearchIndex) -> SearchIndex:
        old, self.index = self.index, index
        return old
