import pytest
from fastapi.testclient import TestClient

from kgnorm.errors import NotFound
from kgnorm.model import parse_curie
from kgnorm.search import (
    MatchField,
    SearchDocument,
    SearchIndex,
    SearchIndexHolder,
    build_search_index,
    create_app,
    keyword,
    rank_score,
    tokenize,
)

C = parse_curie


@pytest.fixture(scope="module")
def index(desk):
    return build_search_index(desk.synonyms)


def leaders(matches):
    return [str(m.document.leader) for m in matches]


def test_tokenizer():
    assert tokenize("acetylsalicylic acid") == ["acetylsalicylic", "acid"]
    assert keyword("  Acetylsalicylic  Acid ") == "acetylsalicylic acid"
    assert tokenize("ADA-SCID") == ["ada", "scid"]
    assert tokenize("Straße_2") == ["strasse", "2"]


def test_band_order():
    bands = [MatchField.LABEL_EXACT, MatchField.SYNONYM_EXACT, MatchField.LABEL_TOKEN, MatchField.SYNONYM_TOKEN]
    for hi, lo in zip(bands, bands[1:]):
        assert rank_score(hi, 0.01) > rank_score(lo, 1.0)
    assert rank_score(MatchField.SYNONYM_TOKEN, 1.0) > rank_score(MatchField.SYNONYM_TOKEN, 0.5)


def test_ada_three_types(index):
    hits = index.lookup("ADA")
    assert len(hits) == 3
    by_leader = {str(m.document.leader): m.document.types[0] for m in hits}
    assert by_leader == {"NCBIGene:100": "Gene", "MONDO:0011130": "Disease", "NCBITaxon:125078": "OrganismTaxon"}
    # exact label hits outrank the disease synonym hit
    assert leaders(hits)[-1] == "MONDO:0011130"


def test_aspirin(index):
    hits = index.lookup("aspirin")
    # the CHEBI clique carries PUBCHEM.COMPOUND:2244 as a member
    assert "CHEBI:15365" in leaders(hits)
    assert "RXCUI:243670" in leaders(hits)  # a formulation, via a token hit
    top = [m for m in hits if m.matched_field is MatchField.LABEL_EXACT]
    assert {str(m.document.leader) for m in top} == {"CHEBI:15365", "RXCUI:1191", "UNII:R16CO5Y76E"}
    assert leaders(hits)[:3] == ["CHEBI:15365", "RXCUI:1191", "UNII:R16CO5Y76E"]  # ties by leader order


def test_autocomplete(index):
    assert "CHEBI:15365" in leaders(index.lookup("acetylsal", autocomplete=True))
    assert index.lookup("acetylsal") == []


def test_case_folding(index):
    hits = index.lookup("WATER")
    assert leaders(hits)[0] == "CHEBI:15377"
    assert hits[0].matched_field is MatchField.LABEL_EXACT


def test_empty_query_and_limit(index):
    assert index.lookup("") == []
    assert index.lookup("   ") == []
    assert len(index.lookup("water", limit=2)) == 2
    with pytest.raises(ValueError):
        index.lookup("water", limit=0)


def test_filters(index):
    assert leaders(index.lookup("ADA", type_filter="Gene")) == ["NCBIGene:100"]
    assert leaders(index.lookup("ADA", type_filter="biolink:BiologicalEntity")) == ["NCBIGene:100", "MONDO:0011130"]
    assert leaders(index.lookup("ADA", prefix_filter=["NCBITaxon"])) == ["NCBITaxon:125078"]
    assert leaders(index.lookup("ADA", taxa_filter=["NCBITaxon:9606"])) == ["NCBIGene:100"]


def test_token_fraction_orders_within_band():
    docs = [
        SearchDocument(C("X:1"), "one", ("red green",), ("T",)),
        SearchDocument(C("X:2"), "two", ("red blue",), ("T",)),
    ]
    hits = SearchIndex(docs).lookup("red green")
    assert leaders(hits) == ["X:1", "X:2"]
    assert hits[0].score > hits[1].score


def test_equal_scores_break_by_leader():
    docs = [SearchDocument(C("X:20"), "thing", (), ("T",)), SearchDocument(C("X:3"), "thing", (), ("T",))]
    assert leaders(SearchIndex(docs).lookup("thing")) == ["X:3", "X:20"]


def test_label_only_document():
    idx = SearchIndex([SearchDocument(C("X:1"), "Only Label", (), ("T",))])
    assert idx.synonyms_of("X:1") == ["Only Label"]
    assert leaders(idx.lookup("only label")) == ["X:1"]


def test_synonyms_of(index):
    assert "aspirin" in index.synonyms_of("CHEBI:15365")
    with pytest.raises(NotFound):
        index.synonyms_of("NOPE:1")


def test_http(index):
    client = TestClient(create_app(SearchIndexHolder(index)))
    body = client.get("/lookup", params={"string": "ADA", "biolink_type": "Disease"}).json()
    assert [m["curie"] for m in body] == ["MONDO:0011130"]
    assert body[0]["matched_field"] == "synonym_token"
    assert client.get("/lookup", params={"string": "ADA", "only_prefixes": "NCBIGene|NCBITaxon"}).json()[0]["curie"] == "NCBIGene:100"
    syn = client.get("/synonyms", params={"preferred_curie": "CHEBI:15365"}).json()
    assert "acetylsalicylic acid" in syn["CHEBI:15365"]
    assert client.get("/synonyms", params={"preferred_curie": "NOPE:1"}).status_code == 404
    assert client.get("/lookup", params={"string": "x", "limit": 0}).status_code == 422
