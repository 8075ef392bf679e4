import numpy as np
import pytest

from infbern import Ball, Polygon, Rectangle, build_profile
from infbern import bernoulli


UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


@pytest.fixture(scope="session")
def disk():
    return Ball(2, 1.0)


@pytest.fixture(scope="session")
def disk_profile(disk):
    return build_profile(disk)


@pytest.fixture(scope="session")
def disk_analysis(disk_profile):
    return bernoulli.analyze(disk_profile)


@pytest.fixture(scope="session")
def square():
    return Polygon(UNIT_SQUARE)


@pytest.fixture(scope="session")
def square_profile(square):
    return build_profile(square, 1024)


@pytest.fixture(scope="session")
def square_analysis(square_profile):
    return bernoulli.analyze(square_profile)


@pytest.fixture(scope="session")
def rect21_profile():
    return build_profile(Rectangle(2.0, 1.0))


def random_convex_vertices(rng, n_points=30):
    """Hull of gaussian points: generic strictly convex test polygons."""
    from scipy.spatial import ConvexHull
    pts = rng.normal(size=(n_points, 2))
    hull = ConvexHull(pts)
    return pts[hull.vertices]


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
