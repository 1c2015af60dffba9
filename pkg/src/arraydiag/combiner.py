"""Receive combining matrices for diagnostic measurements.

Three designs are available:

* ``dft_null``: DFT beams other than the beams of the (grid-aligned) paths.
  DFT orthogonality makes every selected beam blind to the paths.
* ``householder``: DFT beams pushed through the orthogonal-complement
  projector ``Q = I - D (D^H D)^-1 D^H`` of the path steering block ``D``,
  for off-grid angles.
* ``random_phase``: unit-modulus random phases, the measurement matrix of
  the difference baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import ArrayConfig, DftCodebook, dft_codebook, steering_matrix
from .errors import CapacityError, DomainError, IllConditionedError

MAX_GRAM_CONDITION = 1e12
MIN_COLUMN_NORM = 1e-8

STRATEGIES = ("dft_null", "householder", "random_phase")


@dataclass(frozen=True)
class CombinerMatrix:
    """N x M combining matrix; measurement ``m`` is ``columns[:, m].conj() @ h``.

    ``beam_indices`` lists the codebook beams used for the null-steering
    designs (empty for ``random_phase``).
    """

    columns: np.ndarray
    strategy: str
    nulled_angles: tuple = ()
    beam_indices: tuple = ()

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"unknown combiner strategy {self.strategy!r}")
        if self.columns.ndim != 2 or self.columns.shape[1] < 1:
            raise DomainError("combiner needs at least one column")

    @property
    def n_elements(self) -> int:
        return self.columns.shape[0]

    @property
    def n_measurements(self) -> int:
        return self.columns.shape[1]

    @property
    def sensing(self) -> np.ndarray:
        """``W^H``: the M x N sensing matrix seen by sparse recovery."""
        return self.columns.conj().T


@dataclass(frozen=True)
class NullSpaceBasis:
    projector: np.ndarray
    steering_block: np.ndarray
    angles: tuple = field(default=())

    @property
    def rank(self) -> int:
        return self.projector.shape[0] - self.steering_block.shape[1]


def householder_projector(cfg: ArrayConfig, angles) -> NullSpaceBasis:
    """Projector onto the orthogonal complement of the path responses.

    Raises
    ------
    IllConditionedError
        If ``D^H D`` has condition number above 1e12 (near-coincident angles).
    """
    angles = tuple(float(a) for a in np.atleast_1d(np.asarray(angles, dtype=float)))
    n = cfg.n_elements
    if len(set(angles)) != len(angles):
        raise IllConditionedError("path angles must be distinct")
    if len(angles) >= n:
        raise CapacityError(f"need fewer than {n} angles, got {len(angles)}")
    if not angles:
        return NullSpaceBasis(np.eye(n, dtype=complex), np.zeros((n, 0), dtype=complex), ())

    d = steering_matrix(cfg, angles)
    gram = d.conj().T @ d
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > MAX_GRAM_CONDITION:
        raise IllConditionedError(f"steering Gram matrix condition number {cond:.3g}")
    q = np.eye(n, dtype=complex) - d @ np.linalg.solve(gram, d.conj().T)
    q = 0.5 * (q + q.conj().T)
    return NullSpaceBasis(projector=q, steering_block=d, angles=angles)


def combiner_from_projector(
    basis: NullSpaceBasis, n_measurements: int, rng: np.random.Generator
) -> CombinerMatrix:
    """Pick ``n_measurements`` projected DFT beams at random.

    Candidate ``i`` is ``Q a_i`` with ``a_i`` the i-th DFT beam.  Beams are
    visited in a random order; those whose projection is numerically zero
    (the beam lies in the span of the path responses) are skipped.  Each
    kept column is scaled to unit norm.
    """
    n = basis.projector.shape[0]
    if not 1 <= n_measurements <= basis.rank:
        raise CapacityError(
            f"n_measurements must be in [1, {basis.rank}] for {basis.steering_block.shape[1]} "
            f"nulled paths, got {n_measurements}"
        )
    beams = basis.projector @ dft_codebook(ArrayConfig(n)).columns
    norms = np.linalg.norm(beams, axis=0)
    order = rng.permutation(n)
    picked = order[norms[order] >= MIN_COLUMN_NORM][:n_measurements]
    if picked.size < n_measurements:
        raise CapacityError("not enough beams outside the span of the path responses")
    picked = np.sort(picked)
    return CombinerMatrix(
        columns=beams[:, picked] / norms[picked],
        strategy="householder",
        nulled_angles=basis.angles,
        beam_indices=tuple(picked.tolist()),
    )


def combiner_dft_null(
    codebook: DftCodebook, aoa_indices, n_measurements: int, rng: np.random.Generator
) -> CombinerMatrix:
    """Draw ``n_measurements`` distinct DFT beams outside ``aoa_indices``."""
    n = codebook.n_elements
    aoa = sorted({int(i) for i in aoa_indices})
    allowed = np.setdiff1d(np.arange(n), aoa)
    if not 1 <= n_measurements <= allowed.size:
        raise CapacityError(
            f"n_measurements must be in [1, {allowed.size}], got {n_measurements}"
        )
    picked = np.sort(rng.choice(allowed, size=n_measurements, replace=False))
    return CombinerMatrix(
        columns=codebook.columns[:, picked].copy(),
        strategy="dft_null",
        nulled_angles=tuple(codebook.angles[aoa].tolist()),
        beam_indices=tuple(picked.tolist()),
    )


def combiner_random_phase(
    cfg: ArrayConfig, n_measurements: int, rng: np.random.Generator
) -> CombinerMatrix:
    """Unit-modulus random phase weights scaled by ``1/sqrt(N)``."""
    if n_measurements < 1:
        raise CapacityError(f"n_measurements must be >= 1, got {n_measurements}")
    phases = rng.uniform(0.0, 2 * np.pi, size=(cfg.n_elements, n_measurements))
    return CombinerMatrix(
        columns=np.exp(1j * phases) / np.sqrt(cfg.n_elements), strategy="random_phase"
    )
