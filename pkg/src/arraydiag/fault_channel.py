"""Geometric multipath channel, antenna blockage injection, error channel."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .array_model import ArrayConfig, dft_codebook, steering_matrix
from .errors import DomainError


def complex_normal(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples CN(0, variance)."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


@dataclass(frozen=True)
class PathSet:
    """Complex gains and angles of arrival of the ``L`` propagation paths."""

    gains: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex)).copy()
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float)).copy()
        if gains.ndim != 1 or gains.shape != angles.shape or gains.size < 1:
            raise DomainError("gains and angles must be equal-length, non-empty 1-D sequences")
        if np.any(np.abs(angles) > np.pi / 2 + 1e-12):
            raise DomainError("path angles must lie in [-pi/2, pi/2]")
        gains.flags.writeable = False
        angles.flags.writeable = False
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "angles", angles)

    def __len__(self):
        return self.gains.size


@dataclass(frozen=True)
class FaultPattern:
    """Diagonal blockage matrix stored sparsely as ``{antenna: coefficient}``.

    A coefficient of 0 is a complete failure, ``kappa * exp(j*phi)`` with
    ``0 <= kappa <= 1`` a partial blockage.  Unlisted antennas have
    coefficient 1.
    """

    faults: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, coef in self.faults.items():
            if int(idx) != idx or idx < 0:
                raise DomainError(f"fault index must be a non-negative integer, got {idx}")
            coef = complex(coef)
            if abs(coef) > 1 + 1e-12:
                raise DomainError(f"fault amplitude must be <= 1, got {abs(coef)} at {idx}")
            clean[int(idx)] = coef
        object.__setattr__(self, "faults", MappingProxyType(dict(sorted(clean.items()))))

    @property
    def indices(self) -> frozenset:
        return frozenset(self.faults)

    def __len__(self):
        return len(self.faults)

    def diagonal(self, n_elements: int) -> np.ndarray:
        """Diagonal of B as a length-N vector."""
        b = np.ones(n_elements, dtype=complex)
        for idx, coef in self.faults.items():
            b[idx] = coef
        return b


@dataclass(frozen=True)
class ChannelPair:
    nominal: np.ndarray
    faulty: np.ndarray
    error: np.ndarray


def synthesize_channel(cfg: ArrayConfig, paths: PathSet) -> np.ndarray:
    """``sqrt(N/L) * sum_l gain_l * a(angle_l)``."""
    if len(paths) > cfg.n_elements:
        raise DomainError("more paths than antenna elements")
    steer = steering_matrix(cfg, paths.angles)
    return np.sqrt(cfg.n_elements / len(paths)) * (steer @ paths.gains)


def sample_paths(
    cfg: ArrayConfig, n_paths: int, quantized: bool, rng: np.random.Generator
) -> PathSet:
    """Draw ``n_paths`` paths with CN(0, 1) gains and distinct angles.

    Quantized angles are drawn uniformly from the DFT grid; otherwise
    ``sin(theta)`` is uniform on ``[-1, 1)``.
    """
    if not 1 <= n_paths <= cfg.n_elements:
        raise DomainError(f"n_paths must be in [1, {cfg.n_elements}], got {n_paths}")
    if quantized:
        idx = rng.choice(cfg.n_elements, size=n_paths, replace=False)
        angles = dft_codebook(cfg).angles[idx]
    else:
        angles = np.empty(n_paths)
        k = 0
        while k < n_paths:
            theta = np.arcsin(rng.uniform(-1.0, 1.0))
            if np.all(angles[:k] != theta):
                angles[k] = theta
                k += 1
    gains = complex_normal(rng, n_paths)
    return PathSet(gains=gains, angles=angles)


def sample_faults(
    n_elements: int, n_faults: int, mode: str, rng: np.random.Generator
) -> FaultPattern:
    """Pick ``n_faults`` distinct antennas and assign blockage coefficients.

    ``mode="complete"`` zeroes them; ``mode="partial"`` uses
    ``kappa * exp(j*phi)`` with ``kappa ~ U(0, 1)`` and ``phi ~ U[0, 2*pi)``.
    """
    if not 0 <= n_faults < n_elements:
        raise DomainError(f"n_faults must be in [0, {n_elements}), got {n_faults}")
    if mode not in ("complete", "partial"):
        raise DomainError(f"unknown fault mode {mode!r}")
    idx = rng.choice(n_elements, size=n_faults, replace=False)
    if mode == "complete":
        coefs = np.zeros(n_faults, dtype=complex)
    else:
        kappa = rng.uniform(0.0, 1.0, n_faults)
        phi = rng.uniform(0.0, 2 * np.pi, n_faults)
        coefs = kappa * np.exp(1j * phi)
    return FaultPattern(dict(zip(idx.tolist(), coefs.tolist())))


def apply_faults(h: np.ndarray, faults: FaultPattern) -> ChannelPair:
    """Split the faulty channel ``B h`` into ``h`` plus the sparse error."""
    h = np.asarray(h, dtype=complex)
    if faults.faults and max(faults.faults) >= h.size:
        raise DomainError("fault index exceeds channel length")
    error = np.zeros_like(h)
    for idx, coef in faults.faults.items():
        error[idx] = (coef - 1.0) * h[idx]
    return ChannelPair(nominal=h.copy(), faulty=h + error, error=error)
