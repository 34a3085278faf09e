import pathlib

import pytest

from gluegen.chem import read_smiles_file

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus():
    return read_smiles_file(DATA / "corpus.smi")


@pytest.fixture(scope="session")
def overfit_smiles():
    return read_smiles_file(DATA / "overfit20.smi")
