import pytest

from kioskbot.fixtures import build_standard_db
from kioskbot.vision import InterfaceStore


@pytest.fixture(scope="session")
def db_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("interface_db")
    build_standard_db(path)
    return path


@pytest.fixture(scope="session")
def store(db_dir):
    return InterfaceStore.load_dir(db_dir)
