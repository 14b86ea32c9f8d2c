import json
import math
import random

import pytest

from kgnorm.analytics import (
    OverlapMatrix,
    SourceIdSet,
    build_matrix,
    compare,
    load_source_sets,
    normalize_sets,
    overlap_density,
    percent_increase,
    write_report,
)
from kgnorm.errors import EmptySource


def S(name, *ids):
    return SourceIdSet.of(name, ids)


def test_density_examples():
    a = S("a", *range(6))
    assert overlap_density(a, S("b", *range(6))) == 6 / math.sqrt(36) == 1.0
    assert overlap_density(a, S("b", 10, 11)) == 0.0
    assert overlap_density(a, a) == 1.0
    assert overlap_density(S("a", 1, 2), S("b", 2, 3, 4, 5, 6, 7, 8, 9)) == pytest.approx(1 / 4)


def test_empty_source():
    with pytest.raises(EmptySource):
        overlap_density(S("a"), S("b", 1))


def test_density_symmetric_and_bounded():
    rng = random.Random(2)
    for _ in range(200):
        a = S("a", *rng.sample(range(50), rng.randint(1, 30)))
        b = S("b", *rng.sample(range(50), rng.randint(1, 30)))
        d = overlap_density(a, b)
        assert d == overlap_density(b, a)
        assert 0.0 <= d <= 1.0


def test_percent_increase():
    assert percent_increase(138, 267) == pytest.approx(93.478, abs=1e-3)
    assert percent_increase(0, 0) == 0.0
    assert percent_increase(0, 3) == math.inf
    assert percent_increase(10, 5) == -50.0


@pytest.fixture(scope="module")
def desk_sets(desk):
    return load_source_sets(desk.overlap)


def test_water_fixture(desk_sets, desk_index):
    pre = build_matrix(desk_sets)
    post = build_matrix(desk_sets, desk_index)
    assert len(pre.connections) == 0
    assert post.connections == {("source_a", "source_b"), ("source_a", "source_c"), ("source_b", "source_c")}
    cmp = compare(pre, post)
    assert cmp.new_connections == sorted(post.connections) and cmp.lost_connections == []
    assert cmp.percent_increase == math.inf and cmp.to_json()["percent_increase"] is None


def test_gene_protein_conflation_adds_overlap(desk_sets, desk_index):
    plain = build_matrix(desk_sets, desk_index)
    conflated = build_matrix(desk_sets, desk_index, conflate_gene_protein=True)
    # ADA gene in source_a and its protein in source_b now coincide
    assert conflated.count("source_a", "source_b") == plain.count("source_a", "source_b") + 1


def test_identical_sets():
    sets = [S("a", 1, 2, 3), S("b", 1, 2, 3), S("c", 1, 2, 3)]
    m = build_matrix(sets)
    assert all(v == 1.0 for row in m.densities for v in row)
    assert m.average_degree == 2.0


def test_normalization_is_idempotent(desk_sets, desk_index):
    once = normalize_sets(desk_sets, desk_index)
    assert normalize_sets(once, desk_index) == once


def test_average_degree_identity():
    rng = random.Random(8)
    for _ in range(50):
        sets = [S(f"s{i}", *rng.sample(range(40), rng.randint(1, 10))) for i in range(rng.randint(2, 7))]
        m = build_matrix(sets)
        assert sum(m.degree(s) for s in m.sources) == 2 * len(m.connections)
        assert m.average_degree == pytest.approx(sum(m.degree(s) for s in m.sources) / len(m.sources))


def test_build_matrix_validation():
    with pytest.raises(ValueError):
        build_matrix([S("a", 1)])
    with pytest.raises(ValueError):
        build_matrix([S("a", 1), S("a", 2)])


def test_write_report(desk_sets, desk_index, tmp_path):
    pre, post = build_matrix(desk_sets), build_matrix(desk_sets, desk_index)
    report = write_report(pre, post, tmp_path)
    assert report["post_connections"] == 3 and report["new_connection_count"] == 3
    assert json.loads((tmp_path / "report.json").read_text()) == report
    for name in ("overlap_heatmap.png", "overlap_heatmap.svg"):
        assert (tmp_path / name).stat().st_size > 0
    assert (tmp_path / "overlap_heatmap.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rows = [line.split("\t") for line in (tmp_path / "post_counts.tsv").read_text().splitlines()]
    assert rows[0] == ["source", "source_a", "source_b", "source_c"]
    assert rows[1] == ["source_a", "3", "1", "1"]
    dens = (tmp_path / "pre_density.tsv").read_text().splitlines()
    assert dens[1].split("\t")[1:] == ["1.0", "0.0", "0.0"]


def test_write_report_without_figures(tmp_path):
    m = OverlapMatrix(["a", "b"], [[1, 0], [0, 1]], [[1.0, 0.0], [0.0, 1.0]])
    report = write_report(m, m, tmp_path, figures=False)
    assert "figures" not in report and not list(tmp_path.glob("*.png"))
