import numpy as np
import pytest

from robinlab.domains import Ball, Ellipsoid, PerturbedBall


@pytest.fixture(scope="session")
def ball2():
    return Ball(2)


@pytest.fixture(scope="session")
def ball3():
    return Ball(3)


@pytest.fixture(scope="session")
def ellipsoid():
    return Ellipsoid([1.0, 4.0])


@pytest.fixture(scope="session")
def perturbed_ball():
    return PerturbedBall(2, radius=1.0, terms=[(0.05, (1, 1))])


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
