from __future__ import annotations

import pytest

from riskmine import fixtures, relation


@pytest.fixture(scope="session")
def demo_taxonomy():
    return fixtures.demo_taxonomy()


@pytest.fixture(scope="session")
def fixture_examples():
    return fixtures.labeled_examples()


@pytest.fixture(scope="session")
def trained_model(fixture_examples, demo_taxonomy):
    return relation.train(fixture_examples, taxonomy=demo_taxonomy)


@pytest.fixture(scope="session")
def paper_pairs():
    return fixtures.paper_pairs()
