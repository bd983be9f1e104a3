"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from trimclust import EuclideanOracle, MatrixOracle, MetricInstance


def line_instance(client_xs, facility_xs, k, m, z=1.0):
    """1-D instance: clients first, then facilities, ids in listing order."""
    coords = np.asarray(list(client_xs) + list(facility_xs), dtype=float)[:, None]
    n_c = len(client_xs)
    return MetricInstance(
        clients=tuple(range(n_c)),
        facilities=tuple(range(n_c, n_c + len(facility_xs))),
        dist=EuclideanOracle(coords),
        k=k,
        m=m,
        z=z,
    )


def random_instance(rng, n_clients, n_fac, k, m, z=1.0, dim=2, integer=False, matrix=False):
    """Random instance with disjoint client and facility ids."""
    n = n_clients + n_fac
    if integer:
        coords = rng.integers(0, 50, size=(n, dim)).astype(float)
    else:
        coords = rng.uniform(0.0, 100.0, size=(n, dim))
    if matrix:
        from scipy.spatial.distance import cdist

        oracle = MatrixOracle(cdist(coords, coords))
    else:
        oracle = EuclideanOracle(coords)
    return MetricInstance(
        clients=tuple(range(n_clients)),
        facilities=tuple(range(n_clients, n)),
        dist=oracle,
        k=k,
        m=m,
        z=z,
    )


def shared_point_instance(rng, n_points, k, m, z=1.0, dim=2):
    """Every point is both client and candidate facility."""
    coords = rng.uniform(0.0, 100.0, size=(n_points, dim))
    ids = tuple(range(n_points))
    return MetricInstance(ids, ids, EuclideanOracle(coords), k=k, m=m, z=z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
