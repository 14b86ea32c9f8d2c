from __future__ import annotations

from contextlib import contextmanager

import pytest

from kgnorm.desk import build_desk, desk_source
from kgnorm.model import TypeTaxonomy
from kgnorm.normalizer import load_index


@pytest.fixture(scope="session")
def desk(tmp_path_factory):
    return build_desk(tmp_path_factory.mktemp("desk"))


@pytest.fixture(scope="session")
def desk_src():
    return desk_source()


@pytest.fixture(scope="session")
def taxonomy(desk):
    return TypeTaxonomy.from_file(desk.types)


@pytest.fixture(scope="session")
def desk_index(desk, taxonomy):
    return load_index(desk.compendia, [desk.gene_protein], [desk.drug_chemical], taxonomy)


CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the end-of-run summary."""
    @contextmanager
    def record(number: int, title: str, detail=lambda: ""):
        try:
            yield
        except BaseException as exc:
            CRITERIA[number] = (title, False, f"{type(exc).__name__}: {exc}".splitlines()[0][:160])
            raise
        CRITERIA[number] = (title, True, detail())

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok, detail = CRITERIA[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
