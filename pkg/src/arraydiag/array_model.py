"""Half-wavelength uniform linear array: steering vectors and DFT beam grid.

Element ``n`` of the array response to a plane wave from angle ``theta``
(measured from broadside) is ``exp(j*pi*n*sin(theta)) / sqrt(N)``.  With
this normalization the responses at the ``N`` spatial frequencies
``psi_i = 2*pi*i/N`` are exactly the columns of the unitary DFT matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array geometry.

    Parameters
    ----------
    n_elements : int
        Number of antenna elements ``N`` (at least 2).
    spacing_wavelengths : float
        Element spacing in wavelengths; only 0.5 is supported.
    """

    n_elements: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise DomainError(f"n_elements must be an integer >= 2, got {self.n_elements}")
        if self.spacing_wavelengths != 0.5:
            raise DomainError("only half-wavelength spacing is supported")
        object.__setattr__(self, "n_elements", int(self.n_elements))


@dataclass(frozen=True)
class SteeringVector:
    entries: np.ndarray
    angle: float


@dataclass(frozen=True)
class DftCodebook:
    """Unitary DFT beam codebook.

    ``columns[:, i]`` is the array response at spatial frequency
    ``grid[i]`` (wrapped to ``[-pi, pi)``); ``angles[i]`` is the matching
    physical angle ``arcsin(grid[i] / pi)``.
    """

    columns: np.ndarray
    grid: np.ndarray
    angles: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.columns.shape[0]


def _check_angle(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > np.pi / 2 + _ANGLE_SLACK):
        raise DomainError(f"angle must lie in [-pi/2, pi/2], got {theta}")
    return theta


def steering_matrix(cfg: ArrayConfig, angles) -> np.ndarray:
    """Stack the unit-norm responses for ``angles`` as columns (N x L)."""
    angles = np.atleast_1d(_check_angle(angles))
    n = np.arange(cfg.n_elements)[:, None]
    return np.exp(1j * np.pi * n * np.sin(angles)[None, :]) / np.sqrt(cfg.n_elements)


def steering_vector(cfg: ArrayConfig, theta: float) -> SteeringVector:
    """Unit-norm array response for a plane wave from ``theta`` radians."""
    theta = float(_check_angle(theta))
    entries = steering_matrix(cfg, theta)[:, 0]
    entries.flags.writeable = False
    return SteeringVector(entries=entries, angle=theta)


@lru_cache(maxsize=16)
def _codebook(n_elements: int) -> DftCodebook:
    n = np.arange(n_elements)
    columns = np.exp(2j * np.pi * np.outer(n, n) / n_elements) / np.sqrt(n_elements)
    grid = 2 * np.pi * n / n_elements
    grid = (grid + np.pi) % (2 * np.pi) - np.pi
    angles = np.arcsin(np.clip(grid / np.pi, -1.0, 1.0))
    for arr in (columns, grid, angles):
        arr.flags.writeable = False
    return DftCodebook(columns=columns, grid=grid, angles=angles)


def dft_codebook(cfg: ArrayConfig) -> DftCodebook:
    """Return the N x N unitary DFT codebook for ``cfg`` (cached, read-only)."""
    return _codebook(cfg.n_elements)


def nearest_grid_index(codebook: DftCodebook, theta: float) -> int:
    """Index of the codebook beam best aligned with the response at ``theta``.

    Near-ties (within 1e-12) go to the smaller index.
    """
    cfg = ArrayConfig(codebook.n_elements)
    a = steering_vector(cfg, theta).entries
    gains = np.abs(codebook.columns.conj().T @ a)
    return int(np.flatnonzero(gains >= gains.max() - 1e-12)[0])
