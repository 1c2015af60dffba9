import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arraydiag import ArrayConfig, DomainError, dft_codebook, nearest_grid_index, steering_vector

angles = st.floats(-math.pi / 2, math.pi / 2, allow_nan=False)


def test_config_rejects_bad_geometry():
    with pytest.raises(DomainError):
        ArrayConfig(1)
    with pytest.raises(DomainError):
        ArrayConfig(8, spacing_wavelengths=1.0)


def test_broadside_is_constant():
    a = steering_vector(ArrayConfig(4), 0.0).entries
    np.testing.assert_allclose(a, 0.5 * np.ones(4), atol=1e-15)


def test_endfire_alternates():
    a = steering_vector(ArrayConfig(4), math.pi / 2).entries
    np.testing.assert_allclose(a, 0.5 * np.array([1, -1, 1, -1]), atol=1e-15)


def test_steering_matches_scalar_loop():
    n, theta = 128, 0.3
    oracle = [cmath.exp(1j * math.pi * k * math.sin(theta)) / math.sqrt(n) for k in range(n)]
    a = steering_vector(ArrayConfig(n), theta).entries
    np.testing.assert_allclose(a, oracle, atol=1e-12)
    assert abs(np.linalg.norm(a) - 1) < 1e-12
    np.testing.assert_allclose(a[1:] / a[:-1], cmath.exp(1j * math.pi * math.sin(theta)), atol=1e-12)


@pytest.mark.parametrize("theta", [-1.6, 1.58, float("nan")])
def test_steering_rejects_out_of_range(theta):
    with pytest.raises(DomainError):
        steering_vector(ArrayConfig(4), theta)


def test_two_point_dft():
    cb = dft_codebook(ArrayConfig(2))
    np.testing.assert_allclose(cb.columns, np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 16, 128])
def test_codebook_unitary(n):
    a = dft_codebook(ArrayConfig(n)).columns
    np.testing.assert_allclose(a.conj().T @ a, np.eye(n), atol=1e-10)


def test_codebook_columns_orthogonal():
    a = dft_codebook(ArrayConfig(8)).columns
    for i in range(8):
        for k in range(8):
            if i != k:
                assert abs(np.vdot(a[:, i], a[:, k])) < 1e-12


@pytest.mark.parametrize("n", [2, 4, 16, 128])
def test_grid_angles_reproduce_columns(n):
    cfg = ArrayConfig(n)
    cb = dft_codebook(cfg)
    np.testing.assert_allclose(cb.columns[:, 0], steering_vector(cfg, 0.0).entries, atol=1e-15)
    for i, theta in enumerate(cb.angles):
        np.testing.assert_allclose(steering_vector(cfg, theta).entries, cb.columns[:, i], atol=1e-12)


def test_nearest_grid_index_on_grid():
    cb = dft_codebook(ArrayConfig(16))
    for i, theta in enumerate(cb.angles):
        assert nearest_grid_index(cb, theta) == i
    assert nearest_grid_index(cb, 0.0) == 0


def test_nearest_grid_index_matches_scan():
    n, theta = 16, 0.2
    a = [cmath.exp(1j * math.pi * k * math.sin(theta)) / math.sqrt(n) for k in range(n)]
    scores = []
    for i in range(n):
        col = [cmath.exp(2j * math.pi * k * i / n) / math.sqrt(n) for k in range(n)]
        scores.append(abs(sum(c.conjugate() * x for c, x in zip(col, a))))
    expected = max(range(n), key=lambda i: (scores[i], -i))
    assert expected == 2
    assert nearest_grid_index(dft_codebook(ArrayConfig(n)), theta) == expected


@settings(max_examples=60, deadline=None)
@given(angles, angles)
def test_inner_product_symmetric_and_peaks_when_sines_match(t1, t2):
    cfg = ArrayConfig(32)
    a1, a2 = steering_vector(cfg, t1).entries, steering_vector(cfg, t2).entries
    g12, g21 = abs(np.vdot(a1, a2)), abs(np.vdot(a2, a1))
    assert abs(g12 - g21) < 1e-12
    if math.sin(t1) == math.sin(t2):
        assert abs(g12 - 1) < 1e-12
    elif abs(math.sin(t1) - math.sin(t2)) > 1e-3:
        assert g12 < 1 - 1e-9
