import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from surfdyn.experiments import golden_torus_spec
from surfdyn.models import load_model
from surfdyn.random_walk import FiniteMeasure

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

WEHLER_PAIRS = ["s1s2", "s2s1", "s1s3", "s3s1", "s2s3", "s3s2"]
GOLDEN_RATIO_EXP = float(np.log((3 + np.sqrt(5)) / 2))


@pytest.fixture(scope="session")
def torus():
    return load_model(golden_torus_spec())


@pytest.fixture(scope="session")
def single_a():
    return FiniteMeasure(("A",), (1.0,))


@pytest.fixture(scope="session")
def pair_ac():
    return FiniteMeasure.uniform(["A", "C"])


@pytest.fixture(scope="session")
def wehler():
    return load_model({"type": "wehler", "generators": WEHLER_PAIRS})


@pytest.fixture(scope="session")
def wehler_involutions():
    return load_model({"type": "wehler"})


@pytest.fixture(scope="session")
def wehler_measure():
    return FiniteMeasure.uniform(WEHLER_PAIRS)


@pytest.fixture(scope="session")
def wehler_point(wehler):
    return wehler.sample_points(np.random.default_rng(0), 1)[0]
