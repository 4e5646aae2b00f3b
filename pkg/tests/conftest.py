import numpy as np
import pytest

import temcodec as tc


@pytest.fixture(scope="session")
def cubic_spec():
    return tc.GeneratorSpec.bspline(3, 50)


@pytest.fixture(scope="session")
def cubic_space(cubic_spec):
    return tc.PeriodicSpace.for_spec(cubic_spec)


@pytest.fixture(scope="session")
def cubic_profile(cubic_spec):
    return tc.spectral_profile(cubic_spec)


@pytest.fixture(scope="session")
def cubic_tau(cubic_profile):
    return tc.density_bound(cubic_profile).tau


@pytest.fixture(scope="session")
def box_spec():
    return tc.GeneratorSpec.bspline(0, 50)
