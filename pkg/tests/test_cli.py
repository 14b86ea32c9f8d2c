import json
import subprocess
import sys

from kgnorm.cli import expand_multi, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_expand_multi():
    assert expand_multi(["normalize", "--compendia", "a", "b", "--curie", "X:1"]) == [
        "normalize", "--compendia", "a", "--compendia", "b", "--curie", "X:1"
    ]
    assert expand_multi(["build-graph", "--spec", "s.yaml"]) == ["build-graph", "--spec", "s.yaml"]


def test_build_cliques_matches_desk(capsys, desk, desk_src, tmp_path):
    d = desk_src / "chemical"
    code, out, _ = run(
        capsys, "build-cliques", "--mappings", d / "mappings.tsv", "--labels", d / "labels.tsv",
        "--enrich", desk_src / "enrich.tsv", "--prefs", desk_src / "prefs.tsv", "--types", desk_src / "types.tsv",
        "--hints", d / "hints.tsv", "--filter", d / "filter.tsv", "--singletons", "--default-type", "ChemicalEntity",
        "--out", tmp_path / "c.jsonl", "--synonyms", tmp_path / "s.jsonl",
    )
    assert code == 0 and "cliques ->" in out
    assert (tmp_path / "c.jsonl").read_bytes() == (desk.root / "compendia" / "chemical.jsonl").read_bytes()


def test_normalize_command(capsys, desk):
    code, out, _ = run(
        capsys, "normalize", "--compendia", *desk.compendia, "--gene-protein", desk.gene_protein,
        "--types", desk.types, "--curie", "UniProtKB:P00813", "NOPE:1", "--conflate",
    )
    body = json.loads(out)
    assert code == 0 and body["NOPE:1"] is None
    assert body["UniProtKB:P00813"]["id"]["identifier"] == "NCBIGene:100"


def test_lookup_command(capsys, desk):
    code, out, _ = run(capsys, "lookup", "--synonyms", *desk.synonyms, "--string", "ADA", "--only-prefixes", "NCBIGene")
    assert code == 0 and [m["curie"] for m in json.loads(out)] == ["NCBIGene:100"]


def test_conflations_duplicates_and_kgx(capsys, desk, desk_src, tmp_path):
    code, _, _ = run(
        capsys, "build-conflations", "--policy", "gene-protein", "--mappings", desk_src / "conflation" / "gene_protein.tsv",
        "--compendia", *desk.compendia, "--types", desk.types, "--out", tmp_path / "gp.jsonl",
    )
    assert code == 0 and (tmp_path / "gp.jsonl").read_bytes() == desk.gene_protein.read_bytes()
    assert run(capsys, "detect-duplicates", "--compendia", *desk.compendia, "--out", tmp_path / "d.tsv")[0] == 0
    assert "aspirin" in (tmp_path / "d.tsv").read_text()
    code, out, _ = run(capsys, "export-kgx", "--compendia", desk.compendia[0], "--nodes", tmp_path / "n.jsonl", "--edges", tmp_path / "e.jsonl")
    assert code == 0 and out.startswith(f"{len((tmp_path / 'n.jsonl').read_text().splitlines())} nodes")


def test_build_graph_and_overlap(capsys, desk, tmp_path):
    code, out, _ = run(capsys, "build-graph", "--spec", desk.graphspec, "--workdir", tmp_path / "w", "--out", tmp_path / "g")
    assert code == 0 and (tmp_path / "g" / "metadata.json").exists()
    code, _, _ = run(
        capsys, "analyze-overlap", "--sets", desk.overlap, "--compendia", *desk.compendia, "--out", tmp_path / "o", "--no-figures"
    )
    assert code == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["post_connections"] == 3


def test_errors_exit_nonzero(capsys, tmp_path):
    bad = tmp_path / "m.tsv"
    bad.write_text("nocolon\tA:1\n")
    code, _, err = run(capsys, "build-cliques", "--mappings", bad, "--prefs", bad, "--types", bad, "--out", tmp_path / "o")
    assert code == 1 and err.startswith("error:")
    assert run(capsys, "no-such-command")[0] == 2


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "kgnorm.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "build-graph" in proc.stdout
