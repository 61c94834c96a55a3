import numpy as np
import pytest

from fanospin import EnsembleParams, SystemModel, resolve_config

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def reference_model() -> SystemModel:
    """The embedded calibrated cell at its reference bias field."""
    return resolve_config({}).model()


def random_model(rng: np.random.Generator, bz_range=(-30.0, 30.0)) -> SystemModel:
    """A physically valid random coupled pair, broad parameter spread."""
    a = EnsembleParams(
        gamma=TWO_PI * 10 ** rng.uniform(1.5, 3.0),
        Gamma=10 ** rng.uniform(2.0, 4.5),
        mz_field=10 ** rng.uniform(-3.0, 0.0),
    )
    b = EnsembleParams(
        gamma=TWO_PI * 10 ** rng.uniform(-0.5, 1.0),
        Gamma=10 ** rng.uniform(-1.7, 0.0),
        mz_field=10 ** rng.uniform(-0.5, 1.0),
    )
    return SystemModel(a=a, b=b, kappa0=540.0, Bz=rng.uniform(*bz_range))
