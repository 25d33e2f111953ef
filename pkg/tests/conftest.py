import numpy as np
import pytest

from linklab.catalog import build_family, cap_upper_half


@pytest.fixture(scope="session")
def link13():
    return build_family(1, 0, 3)


@pytest.fixture(scope="session")
def link24():
    return build_family(2, 0, 4)


@pytest.fixture(scope="session")
def capped13(link13):
    return cap_upper_half(link13)


def grid_min_distance(points_a, points_b, chunk=400):
    """Brute-force minimum distance between two point clouds."""
    best = np.inf
    for start in range(0, points_a.shape[0], chunk):
        block = points_a[start : start + chunk]
        d2 = np.sum((block[:, None, :] - points_b[None, :, :]) ** 2, axis=2)
        best = min(best, float(d2.min()))
    return np.sqrt(best)


def sphere_grid(sphere, per_axis):
    """Deterministic near-uniform parameter grid on an embedded sphere."""
    k = sphere.sphere_dim
    rng = np.random.default_rng(12345)
    U = rng.standard_normal((per_axis, k + 1))
    U /= np.linalg.norm(U, axis=1)[:, None]
    return sphere.points(U)


def ball_grid(ball, per_axis):
    rng = np.random.default_rng(54321)
    k = ball.ball_dim
    X = rng.standard_normal((per_axis, k))
    X /= np.linalg.norm(X, axis=1)[:, None]
    radii = rng.random(per_axis) ** (1.0 / k)
    return ball.points(X * radii[:, None])
