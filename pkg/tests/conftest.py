import os
import sys

import numpy as np
import pytest

HERE = os.path.dirname(__file__)
sys.path.insert(0, HERE)

DATA = os.path.join(HERE, os.pardir, "data", "wdbc.csv")


@pytest.fixture(scope="session")
def data_path():
    if not os.path.isfile(DATA):
        pytest.skip("data/wdbc.csv not present (run scripts/export_wdbc.py)")
    return os.path.abspath(DATA)


@pytest.fixture(scope="session")
def wdbc(data_path):
    from bdrga.dataset import load_dataset
    return load_dataset(data_path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
