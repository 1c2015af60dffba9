"""Sparse recovery of the error channel: OMP and a brute-force reference."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, DegenerateProblemError, DomainError

MAX_SUPPORTS = 10**6
_RANK_TOL = 1e-10
_MIN_IMPROVEMENT = 1e-12


@dataclass(frozen=True)
class RecoveryProblem:
    """Find a sparse ``x`` with ``observations ~= sensing @ x``.

    At least one stopping rule must be given: ``sparsity`` (number of
    atoms) or ``residual_tolerance`` (stop once the residual norm is at or
    below it).  With both, whichever triggers first wins.
    """

    sensing: np.ndarray
    observations: np.ndarray
    sparsity: Optional[int] = None
    residual_tolerance: Optional[float] = None

    def __post_init__(self):
        sensing = np.atleast_2d(np.asarray(self.sensing, dtype=complex))
        obs = np.asarray(self.observations, dtype=complex).ravel()
        m, n = sensing.shape
        if obs.size != m:
            raise DomainError(f"{obs.size} observations for a sensing matrix with {m} rows")
        if m > n:
            raise DomainError(f"sensing matrix has more rows ({m}) than columns ({n})")
        if self.sparsity is None and self.residual_tolerance is None:
            raise DomainError("set sparsity, residual_tolerance, or both")
        if self.sparsity is not None and not 0 <= self.sparsity <= n:
            raise DomainError(f"sparsity must be in [0, {n}], got {self.sparsity}")
        if self.residual_tolerance is not None and self.residual_tolerance < 0:
            raise DomainError("residual_tolerance must be non-negative")
        object.__setattr__(self, "sensing", sensing)
        object.__setattr__(self, "observations", obs)


@dataclass(frozen=True)
class DiagnosisResult:
    """Recovered error vector and its support (in selection order)."""

    estimate: np.ndarray
    support: tuple
    residual_norm: float
    iterations: int
    residual_history: tuple = field(default=(), repr=False)


def _refit(sensing: np.ndarray, obs: np.ndarray, support: list) -> np.ndarray:
    sub = sensing[:, support]
    q, r = np.linalg.qr(sub)
    diag = np.abs(np.diag(r))
    if diag.min() <= _RANK_TOL * max(diag.max(), np.finfo(float).tiny):
        raise DegenerateProblemError(f"selected columns {support} are linearly dependent")
    return np.linalg.solve(r, q.conj().T @ obs)


def omp_solve(problem: RecoveryProblem) -> DiagnosisResult:
    """Orthogonal matching pursuit with least-squares refit.

    Each iteration adds the column with the largest normalized correlation
    with the residual (near-ties to the smaller index), then refits all
    selected coefficients.  Stops after ``sparsity`` atoms, once the
    residual norm reaches ``residual_tolerance``, or when an extra atom
    no longer reduces the residual by more than 1e-12 relative (that atom
    is discarded).
    """
    a, y = problem.sensing, problem.observations
    m, n = a.shape
    col_norms = np.linalg.norm(a, axis=0)
    usable = col_norms > 0
    max_atoms = problem.sparsity if problem.sparsity is not None else m
    eps = problem.residual_tolerance

    support: list = []
    coefs = np.zeros(0, dtype=complex)
    residual = y.copy()
    rnorm = float(np.linalg.norm(residual))
    history = [rnorm]

    while len(support) < max_atoms:
        if rnorm == 0.0 or (eps is not None and rnorm <= eps):
            break
        corr = np.full(n, -np.inf)
        corr[usable] = np.abs(a[:, usable].conj().T @ residual) / col_norms[usable]
        corr[support] = -np.inf
        best = corr.max()
        if not np.isfinite(best):
            break
        pick = int(np.flatnonzero(corr >= best * (1 - 1e-12))[0])

        trial = support + [pick]
        trial_coefs = _refit(a, y, trial)
        trial_residual = y - a[:, trial] @ trial_coefs
        trial_rnorm = float(np.linalg.norm(trial_residual))
        if trial_rnorm > rnorm * (1 - _MIN_IMPROVEMENT):
            break
        support, coefs, residual, rnorm = trial, trial_coefs, trial_residual, trial_rnorm
        history.append(rnorm)

    estimate = np.zeros(n, dtype=complex)
    estimate[support] = coefs
    return DiagnosisResult(
        estimate=estimate,
        support=tuple(support),
        residual_norm=rnorm,
        iterations=len(support),
        residual_history=tuple(history),
    )


def exhaustive_solve(problem: RecoveryProblem, sparsity: int) -> DiagnosisResult:
    """Best least-squares fit over every support of size ``sparsity``.

    Supports are scanned in lexicographic order and only a strictly
    smaller residual replaces the incumbent, so ties resolve to the
    lexicographically smallest support.  Rank-deficient supports are
    skipped.
    """
    a, y = problem.sensing, problem.observations
    m, n = a.shape
    if not 0 <= sparsity <= n:
        raise DomainError(f"sparsity must be in [0, {n}], got {sparsity}")
    if math.comb(n, sparsity) > MAX_SUPPORTS:
        raise CapacityError(f"C({n}, {sparsity}) supports exceeds the budget of {MAX_SUPPORTS}")

    ynorm = float(np.linalg.norm(y))
    best_support: tuple = ()
    best_coefs = np.zeros(0, dtype=complex)
    best_rnorm = ynorm if sparsity == 0 else np.inf
    margin = 1e-12 * ynorm
    if sparsity > 0:
        for support in itertools.combinations(range(n), sparsity):
            sub = a[:, support]
            coefs, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
            if rank < sparsity:
                continue
            rnorm = float(np.linalg.norm(y - sub @ coefs))
            if rnorm < best_rnorm - margin:
                best_support, best_coefs, best_rnorm = support, coefs, rnorm

    estimate = np.zeros(n, dtype=complex)
    estimate[list(best_support)] = best_coefs
    return DiagnosisResult(
        estimate=estimate,
        support=tuple(best_support),
        residual_norm=float(best_rnorm),
        iterations=len(best_support),
    )


def extract_support(result: DiagnosisResult, sparsity: int) -> frozenset:
    """Indices of the ``sparsity`` largest-magnitude nonzero entries.

    Equal magnitudes go to the smaller index.  No padding: an estimate
    with fewer nonzeros yields a smaller set.
    """
    mags = np.abs(result.estimate)
    nonzero = np.flatnonzero(mags > 0)
    order = nonzero[np.argsort(-mags[nonzero], kind="stable")]
    return frozenset(order[:sparsity].tolist())
