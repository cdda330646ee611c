import numpy as np
import pytest

from nvreadout import NvParameters, RateParameters


@pytest.fixture(scope="session")
def params14() -> NvParameters:
    return NvParameters.nitrogen_14()


@pytest.fixture(scope="session")
def params15() -> NvParameters:
    return NvParameters.nitrogen_15()


@pytest.fixture(scope="session")
def rates() -> RateParameters:
    return RateParameters()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)
