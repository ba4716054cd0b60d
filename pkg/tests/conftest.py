import pytest
from mpmath import mp

from thetaheights.precision import PrecisionContext


@pytest.fixture(autouse=True)
def _test_arithmetic_precision():
    # test-side arithmetic (differences, tolerances) runs well above the
    # library's working precision; the library manages its own precision
    with mp.workprec(360):
        yield


@pytest.fixture
def ctx():
    return PrecisionContext(bits=128)


@pytest.fixture
def ctx96():
    return PrecisionContext(bits=96)
