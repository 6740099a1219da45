import pytest

from qjf import models


@pytest.fixture(scope="session")
def qubit_bundle():
    return models.single_qubit()


@pytest.fixture(scope="session")
def two_qubit_bundle():
    return models.two_qubit()


@pytest.fixture(scope="session")
def chain_bundle():
    return models.spin_chain(n_sites=2)


@pytest.fixture(scope="session")
def all_bundles(qubit_bundle, two_qubit_bundle, chain_bundle):
    return (qubit_bundle, two_qubit_bundle, chain_bundle)
