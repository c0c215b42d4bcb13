import pathlib

import pytest

from ellheights.harness import parse_curve_file
from ellheights.weierstrass import WeierstrassModel

CORPUS_PATH = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus.txt"


@pytest.fixture(scope="session")
def corpus():
    return parse_curve_file(CORPUS_PATH)


@pytest.fixture(scope="session")
def corpus_path():
    return CORPUS_PATH


@pytest.fixture(scope="session")
def m37():
    return WeierstrassModel(0, 0, 1, -1, 0)


@pytest.fixture(scope="session")
def m11a1():
    return WeierstrassModel(0, -1, 1, -10, -20)


@pytest.fixture(scope="session")
def m11a3():
    return WeierstrassModel(0, -1, 1, 0, 0)
