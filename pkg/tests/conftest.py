from pathlib import Path

import pytest

from ciexplain.corpus import load_dataset
from ciexplain.miner import MiningParams, mine_all

DATA_DIR = Path(__file__).parent / "data"

# The six-sample regression corpus used throughout: three samples per class,
# concept a exclusive to class A's samples, b and c leaning toward class B.
TOY6_PATH = DATA_DIR / "toy6.jsonl"


@pytest.fixture(scope="session")
def toy6_path():
    return TOY6_PATH


@pytest.fixture(scope="session")
def toy6():
    return load_dataset(TOY6_PATH)


@pytest.fixture(scope="session")
def mined06(toy6):
    return mine_all(toy6, MiningParams(min_conf=0.6, max_k=3, min_support=1))


@pytest.fixture(scope="session")
def mined08(toy6):
    return mine_all(toy6, MiningParams(min_conf=0.8, max_k=3, min_support=1))
