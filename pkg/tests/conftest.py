import numpy as np
import pytest
from hypothesis import settings

from adoe import plant

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def ref_runs():
    return plant.load_reference_runs()


@pytest.fixture(scope="session")
def space():
    return plant.reference_space()


@pytest.fixture(scope="session")
def oracle():
    return plant.build_oracle()


@pytest.fixture(scope="session")
def coded_runs(ref_runs, space):
    coded = np.array([space.to_coded(x) for x in ref_runs["settings"]])
    return coded
