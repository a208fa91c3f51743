import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hnngeo import preset
from hnngeo.bass_serre import TreeBall
from hnngeo.y_space import YModel


@pytest.fixture(scope="session")
def bs12():
    return preset("bs:1:2")


@pytest.fixture(scope="session")
def bs13():
    return preset("bs:1:3")


@pytest.fixture(scope="session")
def bs23():
    return preset("bs:2:3")


@pytest.fixture(scope="session")
def abc():
    return preset("abc:2:2,1;1,1")


@pytest.fixture(scope="session")
def ball12(bs12):
    return TreeBall(bs12, 8)


@pytest.fixture(scope="session")
def model12(bs12):
    return YModel(bs12, 0.1, (-20.0, 20.0), (-5.0, 5.0))
