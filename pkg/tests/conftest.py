import pathlib

import pytest

from lvmforge import builtin_sytherm, init_schema, parse_lvm

DATA_DIR = pathlib.Path(__file__).parent / "data"
ANNEX1_PATH = DATA_DIR / "annex1.lvm"


@pytest.fixture(scope="session")
def annex1_bytes() -> bytes:
    return ANNEX1_PATH.read_bytes()


@pytest.fixture()
def annex1_doc(annex1_bytes):
    return parse_lvm(annex1_bytes)


@pytest.fixture()
def sytherm3():
    return builtin_sytherm(3)


@pytest.fixture()
def store(tmp_path):
    handle = init_schema(tmp_path / "store.db")
    yield handle
    handle.close()
