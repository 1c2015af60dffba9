"""Measurement model and the two end-to-end diagnosis pipelines.

The partial-CSI pipeline measures through a combiner that nulls every
estimated path direction, so the received symbols carry only the error
channel (plus noise and leakage from AoA mismatch) and the gains are
never needed.  The difference pipeline synthesizes the fault-free
response from full channel estimates and subtracts the measured one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .array_model import ArrayConfig, dft_codebook, nearest_grid_index
from .combiner import (
    CombinerMatrix,
    combiner_dft_null,
    combiner_from_projector,
    householder_projector,
)
from .errors import DomainError
from .fault_channel import ChannelPair, PathSet, synthesize_channel
from .recovery import DiagnosisResult, RecoveryProblem, omp_solve


@dataclass(frozen=True)
class NoiseModel:
    """Per-symbol receiver noise CN(0, sigma^2) with ``sigma^2 = 10^(-snr_db/10)``.

    ``snr_db = inf`` gives a noiseless receiver.
    """

    snr_db: float

    @property
    def noise_variance(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # draw even when noiseless so downstream streams stay aligned
        z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return math.sqrt(self.noise_variance / 2.0) * z


@dataclass(frozen=True)
class ChannelKnowledge:
    """What the receiver believes about the paths.

    The partial-CSI pipeline reads ``aoa_estimates`` only; the difference
    baseline also needs ``gain_estimates``.  The error fields record how
    the estimates were produced.
    """

    aoa_estimates: np.ndarray
    gain_estimates: Optional[np.ndarray] = None
    aoa_offset_deg: float = 0.0
    aoa_error_variance: float = 0.0
    gain_error_variance: float = 0.0

    def __post_init__(self):
        aoa = np.atleast_1d(np.asarray(self.aoa_estimates, dtype=float)).copy()
        aoa.flags.writeable = False
        object.__setattr__(self, "aoa_estimates", aoa)
        if self.gain_estimates is not None:
            gains = np.atleast_1d(np.asarray(self.gain_estimates, dtype=complex)).copy()
            if gains.shape != aoa.shape:
                raise DomainError("gain and AoA estimates must have the same length")
            gains.flags.writeable = False
            object.__setattr__(self, "gain_estimates", gains)

    def paths(self) -> PathSet:
        if self.gain_estimates is None:
            raise DomainError("channel knowledge carries no gain estimates")
        return PathSet(gains=self.gain_estimates, angles=self.aoa_estimates)


def perturb_knowledge(
    truth: PathSet,
    rng: np.random.Generator,
    *,
    aoa_offset_deg: float = 0.0,
    aoa_error_variance: float = 0.0,
    gain_error_variance: float = 0.0,
) -> ChannelKnowledge:
    """Produce imperfect estimates of ``truth``.

    Every angle is shifted by the common offset ``aoa_offset_deg`` (degrees)
    plus an independent N(0, ``aoa_error_variance``) draw in radians, then
    clamped to [-pi/2, pi/2].  Gains get independent CN(0,
    ``gain_error_variance``) errors.  The number of random draws does not
    depend on the variances, so sweeping a variance under a fixed stream
    changes nothing else.
    """
    if aoa_error_variance < 0 or gain_error_variance < 0:
        raise DomainError("error variances must be non-negative")
    n_paths = len(truth)
    delta = rng.standard_normal(n_paths)
    e = rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)

    angles = truth.angles + math.radians(aoa_offset_deg) + math.sqrt(aoa_error_variance) * delta
    angles = np.clip(angles, -np.pi / 2, np.pi / 2)
    gains = truth.gains + math.sqrt(gain_error_variance / 2.0) * e
    return ChannelKnowledge(
        aoa_estimates=angles,
        gain_estimates=gains,
        aoa_offset_deg=aoa_offset_deg,
        aoa_error_variance=aoa_error_variance,
        gain_error_variance=gain_error_variance,
    )


def null_steering_combiner(
    cfg: ArrayConfig,
    knowledge: ChannelKnowledge,
    n_measurements: int,
    rng: np.random.Generator,
    quantized: bool,
) -> CombinerMatrix:
    """Combiner blind to the estimated path directions.

    Grid-aligned paths use DFT beams other than the nearest-grid beam of
    each estimate; off-grid paths use projected DFT beams.
    """
    if quantized:
        codebook = dft_codebook(cfg)
        aoa_idx = {nearest_grid_index(codebook, t) for t in knowledge.aoa_estimates}
        return combiner_dft_null(codebook, aoa_idx, n_measurements, rng)
    basis = householder_projector(cfg, knowledge.aoa_estimates)
    return combiner_from_projector(basis, n_measurements, rng)


def measure(
    combiner: CombinerMatrix,
    channel: ChannelPair,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received diagnosis symbols ``W^H (B h) + z`` for a unit probe symbol."""
    if combiner.n_elements != channel.faulty.size:
        raise DomainError(
            f"combiner has {combiner.n_elements} rows, channel has {channel.faulty.size} entries"
        )
    return combiner.sensing @ channel.faulty + noise.sample(rng, combiner.n_measurements)


def _problem(sensing, observations, sparsity, tolerance, noise_variance):
    if sparsity is None and tolerance is None:
        if noise_variance is None:
            raise DomainError("give sparsity, tolerance, or noise_variance")
        tolerance = math.sqrt(sensing.shape[0] * noise_variance)
    return RecoveryProblem(sensing, observations, sparsity, tolerance)


def diagnose_proposed(
    cfg: ArrayConfig,
    knowledge: ChannelKnowledge,
    measurements: np.ndarray,
    combiner: CombinerMatrix,
    *,
    sparsity: Optional[int] = None,
    tolerance: Optional[float] = None,
    noise_variance: Optional[float] = None,
) -> DiagnosisResult:
    """Recover the error channel from null-steered measurements.

    Only the combiner (built from ``knowledge.aoa_estimates``) enters the
    recovery; gain estimates are never read.  Without ``sparsity`` or
    ``tolerance`` the residual tolerance defaults to ``sqrt(M * noise_variance)``.
    """
    if combiner.strategy not in ("dft_null", "householder"):
        raise DomainError(f"partial-CSI diagnosis needs a null-steering combiner, got {combiner.strategy}")
    if combiner.n_elements != cfg.n_elements:
        raise DomainError("combiner does not match the array size")
    problem = _problem(combiner.sensing, measurements, sparsity, tolerance, noise_variance)
    return omp_solve(problem)


def diagnose_difference(
    cfg: ArrayConfig,
    knowledge: ChannelKnowledge,
    faulty_measurements: np.ndarray,
    combiner: CombinerMatrix,
    *,
    sparsity: Optional[int] = None,
    tolerance: Optional[float] = None,
    noise_variance: Optional[float] = None,
) -> DiagnosisResult:
    """Difference baseline: recover ``h - B h`` from ``W^H h_ref - y_hat``.

    The reference ``h_ref`` is synthesized noiselessly from the estimated
    gains and angles.
    """
    if combiner.strategy != "random_phase":
        raise DomainError(f"difference diagnosis expects a random_phase combiner, got {combiner.strategy}")
    if combiner.n_elements != cfg.n_elements:
        raise DomainError("combiner does not match the array size")
    reference = combiner.sensing @ synthesize_channel(cfg, knowledge.paths())
    y_d = reference - np.asarray(faulty_measurements, dtype=complex)
    problem = _problem(combiner.sensing, y_d, sparsity, tolerance, noise_variance)
    return omp_solve(problem)
