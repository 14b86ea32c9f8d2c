import random

import pytest

from kgnorm.errors import MalformedCurie, MalformedRecord
from kgnorm.ingest import (
    LabelKind,
    LoadStats,
    PrefixPairFilter,
    load_enrichments,
    load_labels,
    load_mappings,
)
from kgnorm.model import Curie


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_filter_admits_unordered_pairs(tmp_path):
    p = write(tmp_path, "m.tsv", "CHEBI:15377\tPUBCHEM.COMPOUND:962\nPUBCHEM.COMPOUND:962\tCHEBI:15377\nCHEBI:15377\tUNII:059QF0KO0R\n")
    flt = PrefixPairFilter.of([("CHEBI", "PUBCHEM.COMPOUND")])
    stats = LoadStats()
    recs = list(load_mappings(p, flt, stats))
    assert [(str(r.subject), str(r.object)) for r in recs] == [
        ("CHEBI:15377", "PUBCHEM.COMPOUND:962"),
        ("PUBCHEM.COMPOUND:962", "CHEBI:15377"),
    ]
    assert (stats.lines, stats.yielded, stats.rejected) == (3, 2, 1)


def test_empty_file(tmp_path):
    stats = LoadStats()
    assert list(load_mappings(write(tmp_path, "m.tsv", ""), None, stats)) == []
    assert (stats.lines, stats.yielded, stats.rejected) == (0, 0, 0)


def test_comments_blank_and_self_mappings(tmp_path):
    p = write(tmp_path, "m.tsv", "# header\n\nA:1\tA:1\nA:1\tB:2\tsrc\n")
    stats = LoadStats()
    recs = list(load_mappings(p, None, stats))
    assert len(recs) == 1 and recs[0].source == "src"
    assert stats.self_mappings == 1 and stats.rejected == 1 and stats.lines == 2


def test_malformed_curie_reports_line(tmp_path):
    p = write(tmp_path, "m.tsv", "A:1\tB:2\nbroken\tB:3\n")
    with pytest.raises(MalformedCurie) as err:
        list(load_mappings(p))
    assert err.value.line == 2


def test_count_invariant_random(tmp_path):
    rng = random.Random(7)
    prefixes = ["A", "B", "C", "D"]
    lines = []
    for _ in range(2000):
        a, b = rng.choice(prefixes), rng.choice(prefixes)
        lines.append(f"{a}:{rng.randint(1, 50)}\t{b}:{rng.randint(1, 50)}")
    p = write(tmp_path, "m.tsv", "\n".join(lines) + "\n")
    flt = PrefixPairFilter.of([("A", "B"), ("C", "C")])
    stats = LoadStats()
    got = list(load_mappings(p, flt, stats))
    assert stats.yielded + stats.rejected == stats.lines == 2000
    assert len(got) == stats.yielded
    assert all(flt.allows(r.subject.prefix, r.object.prefix) for r in got)


def test_mappings_stream_lazily(tmp_path):
    # a file far larger than anything we consume; the first record arrives without reading it all
    p = write(tmp_path, "big.tsv", "".join(f"A:{i}\tB:{i}\n" for i in range(200_000)))
    stats = LoadStats()
    gen = load_mappings(p, None, stats)
    first = next(gen)
    assert str(first.subject) == "A:0"
    assert stats.lines == 1
    gen.close()


def test_labels(tmp_path):
    p = write(tmp_path, "l.tsv", "CHEBI:15377\tlabel\twater\nCHEBI:15365\tsynonym\t  acetylsalicylic acid \nCHEBI:15377\tlabel\twater\n")
    recs = list(load_labels(p))
    assert recs[0].kind is LabelKind.PREFERRED_LABEL and recs[0].text == "water"
    assert recs[1].kind is LabelKind.SYNONYM and recs[1].text == "acetylsalicylic acid"
    assert len(recs) == 3  # duplicates pass through
    with pytest.raises(MalformedRecord) as err:
        list(load_labels(write(tmp_path, "bad.tsv", "X:1\tlabel\tok\nX:1\tcolor\tred\n")))
    assert err.value.line == 2


def test_enrichments(tmp_path):
    p = write(tmp_path, "e.tsv", "GO:0008150\t0\t-\nNCBIGene:100\t-\tNCBITaxon:9606\nCHEBI:1\t20\t-\nCHEBI:1\t37.5\t-\n")
    stats = LoadStats()
    got = load_enrichments(p, stats)
    assert got[Curie("GO", "0008150")].information_content == 0
    assert got[Curie("NCBIGene", "100")].information_content is None
    assert got[Curie("NCBIGene", "100")].taxa == (Curie("NCBITaxon", "9606"),)
    assert got[Curie("CHEBI", "1")].information_content == 37.5
    assert stats.duplicates == 1
    for bad in ("X:1\t150\t-\n", "X:1\tabc\t-\n", "X:1\tnan\t-\n", "X:1\t-\t-\n"):
        with pytest.raises(MalformedRecord):
            load_enrichments(write(tmp_path, "bad.tsv", bad))
