import math

import pytest

from eigratio.geometry import make_rectangle


@pytest.fixture
def unit_square():
    return make_rectangle(1.0)


@pytest.fixture
def degenerate_rectangle():
    return make_rectangle(math.sqrt(8.0 / 3.0))
