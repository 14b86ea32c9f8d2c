import gzip
import json

import pytest

from kgnorm.cliques import DuplicateReport
from kgnorm.compendium import (
    export_kgx_equivalence,
    read_compendium,
    read_conflation,
    read_kgx_edges,
    read_kgx_nodes,
    read_reports,
    read_synonyms,
    synonym_entry,
    write_compendium,
    write_conflation,
    write_reports,
    write_synonyms,
)
from kgnorm.errors import SchemaViolation
from kgnorm.model import Clique, ConflationPolicy, Identifier, parse_curie

C = parse_curie


def water():
    return Clique(
        (
            Identifier(C("CHEBI:15377"), "water", ("An oxygen hydride.",)),
            Identifier(C("PUBCHEM.COMPOUND:962"), "Water"),
            Identifier(C("CAS:7732-18-5")),
            Identifier(C("HMDB:HMDB0002111"), "Water"),
            Identifier(C("KEGG.COMPOUND:C00001"), "H2O"),
            Identifier(C("MESH:D014867"), "Water"),
        ),
        "water",
        "SmallMolecule",
        12,
    )


def test_empty_compendium(tmp_path):
    assert write_compendium([], tmp_path / "c.jsonl") == 0
    assert (tmp_path / "c.jsonl").read_bytes() == b""


def test_compendium_line_shape(tmp_path):
    write_compendium([water()], tmp_path / "c.jsonl")
    text = (tmp_path / "c.jsonl").read_text(encoding="utf-8")
    assert text.endswith("}\n") and text.count("\n") == 1
    obj = json.loads(text)
    assert list(obj) == ["type", "ic", "identifiers", "preferred_name"]
    assert obj["identifiers"][0] == {"i": "CHEBI:15377", "l": "water", "d": ["An oxygen hydride."]}
    assert obj["identifiers"][2] == {"i": "CAS:7732-18-5"}


def test_write_read_write_bytes(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_compendium([water(), Clique((Identifier(C("A:1"), "ünïcode"),), "ünïcode", "T")], a)
    write_compendium(read_compendium(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert "ünïcode" in a.read_text(encoding="utf-8")


def test_gzip_variant(tmp_path):
    p = tmp_path / "c.jsonl.gz"
    write_compendium([water()], p)
    with gzip.open(p, "rt", encoding="utf-8") as fh:
        assert json.loads(fh.readline())["preferred_name"] == "water"
    assert list(read_compendium(p)) == [water()]


@pytest.mark.parametrize(
    "line",
    [
        '{"type":"T","ic":null,"identifiers":[],"preferred_name":"x"}',
        '{"ic":null,"type":"T","identifiers":[{"i":"A:1"}],"preferred_name":"x"}',
        '{"type":"T","ic":101,"identifiers":[{"i":"A:1"}],"preferred_name":"x"}',
        '{"type":"T","ic":null,"identifiers":[{"i":"nocolon"}],"preferred_name":"x"}',
        '{"type":"T","ic":null,"identifiers":[{"i":"A:1"},{"i":"A:1"}],"preferred_name":"x"}',
        "not json",
    ],
)
def test_schema_violations_carry_line_numbers(tmp_path, line):
    p = tmp_path / "c.jsonl"
    p.write_text('{"type":"T","ic":null,"identifiers":[{"i":"A:1"}],"preferred_name":"x"}\n' + line + "\n")
    with pytest.raises(SchemaViolation) as err:
        list(read_compendium(p))
    assert err.value.line == 2


def test_synonyms(tmp_path):
    aspirin = Clique((Identifier(C("CHEBI:15365"), "aspirin"), Identifier(C("MESH:D001241"), "aspirin")), "aspirin", "SmallMolecule")
    bare = Clique((Identifier(C("X:1")),), "X:1", "T")
    entries = [synonym_entry(aspirin, ["acetylsalicylic acid", "aspirin"]), synonym_entry(bare)]
    assert entries[0].names == ("acetylsalicylic acid", "aspirin")
    assert entries[1].names == () and entries[1].preferred_name == "X:1"
    write_synonyms(entries, tmp_path / "s.jsonl")
    assert list(read_synonyms(tmp_path / "s.jsonl")) == entries


def test_desk_synonyms_for_aspirin(desk):
    entries = {str(e.curie): e for p in desk.synonyms for e in read_synonyms(p)}
    asp = entries["CHEBI:15365"]
    assert "aspirin" in asp.names and "acetylsalicylic acid" in asp.names
    assert list(asp.names) == sorted(asp.names)
    assert asp.types[0] == "SmallMolecule" and asp.types[-1] == "NamedThing"


def test_conflation_lines(tmp_path, desk):
    assert desk.gene_protein.read_text().splitlines() == [
        '["NCBIGene:100","UniProtKB:P00813"]',
        '["NCBIGene:7157","UniProtKB:P04637"]',
    ]
    sets = list(read_conflation(desk.drug_chemical, "drug-chemical"))
    write_conflation(sets, tmp_path / "dc.jsonl")
    assert (tmp_path / "dc.jsonl").read_bytes() == desk.drug_chemical.read_bytes()
    assert write_conflation([], tmp_path / "empty.jsonl") == 0
    (tmp_path / "bad.jsonl").write_text('["A:1"]\n')
    with pytest.raises(SchemaViolation):
        list(read_conflation(tmp_path / "bad.jsonl", ConflationPolicy.GENE_PROTEIN))


def test_kgx_star_export(tmp_path):
    single = Clique((Identifier(C("Z:1"), "z"),), "z", "T")
    n, e = export_kgx_equivalence([water(), single], tmp_path / "n.jsonl", tmp_path / "e.jsonl")
    assert (n, e) == (7, 5)
    nodes = list(read_kgx_nodes(tmp_path / "n.jsonl"))
    edges = list(read_kgx_edges(tmp_path / "e.jsonl"))
    assert nodes[2] == {"id": "CAS:7732-18-5", "name": "water", "category": ["SmallMolecule"]}
    assert all(edge["predicate"] == "same_as" and edge["object"] == "CHEBI:15377" for edge in edges)


def test_reports_round_trip(tmp_path):
    report = DuplicateReport([(C("MESH:D014867"), [C("CHEBI:15377"), C("MESH:D014867")])], [("insulin", [C("A:1"), C("B:1")])])
    assert write_reports(report, tmp_path / "r.tsv") == 2
    lines = (tmp_path / "r.tsv").read_text().splitlines()
    assert lines[0] == "kind\tkey\tleaders"
    assert lines[1] == "multi_clique_curie\tMESH:D014867\tCHEBI:15377,MESH:D014867"
    assert read_reports(tmp_path / "r.tsv") == report


def test_failed_write_leaves_old_file(tmp_path):
    p = tmp_path / "c.jsonl"
    write_compendium([water()], p)
    before = p.read_bytes()

    def boom():
        yield water()
        raise RuntimeError("interrupted")

    with pytest.raises(RuntimeError):
        write_compendium(boom(), p, presorted=True)
    assert p.read_bytes() == before
    assert [q.name for q in tmp_path.iterdir()] == ["c.jsonl"]
