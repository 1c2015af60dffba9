"""Monte Carlo estimation of the exact-support success probability.

Every trial draws its randomness from a stream keyed only by
``(master_seed, trial_index, technique)``.  The same trial therefore sees
the same paths, faults, estimation-error draws and noise at every sweep
point, which makes sweeps reproducible under any parallel schedule and
makes the partial-CSI curve exactly flat when only the gain error moves.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .array_model import ArrayConfig
from .combiner import combiner_random_phase
from .diagnosis import (
    NoiseModel,
    diagnose_difference,
    diagnose_proposed,
    measure,
    null_steering_combiner,
    perturb_knowledge,
)
from .errors import DiagnosisError, DomainError
from .fault_channel import apply_faults, sample_faults, sample_paths, synthesize_channel
from .recovery import extract_support

log = logging.getLogger(__name__)

TECHNIQUES = ("proposed", "difference")
_TECHNIQUE_KEY = {"proposed": 0, "difference": 1}
SWEEP_PARAMS = ("m_measurements", "snr_db", "aoa_offset_deg", "gain_error_var", "aoa_error_var")
FAULT_MODES = ("complete", "partial")

DEFAULT_TRIALS = 500


class ConfigError(DomainError):
    """Invalid experiment description; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class TrialParams:
    """Fully resolved parameters of one sweep point."""

    n_elements: int
    n_faults: int
    fault_mode: str
    n_paths: int
    quantized: bool
    m_measurements: int
    snr_db: float
    aoa_offset_deg: float
    gain_error_var: float
    aoa_error_var: float


@dataclass(frozen=True)
class ExperimentSpec:
    """One parameter sweep.

    Exactly one parameter (``sweep_param``) takes the values in
    ``sweep_values``; every other field is held fixed.  With
    ``csi_from_snr`` the receiver's gain estimates carry an extra error of
    variance equal to the noise variance, i.e. the channel was estimated
    at the operating SNR.
    """

    n_faults: int
    sweep_param: str
    sweep_values: tuple
    experiment_id: str = "custom"
    n_elements: int = 128
    fault_mode: str = "complete"
    n_paths: int = 1
    quantized: bool = True
    technique: str = "both"
    m_measurements: int = 35
    snr_db: float = 40.0
    aoa_offset_deg: float = 0.0
    gain_error_var: float = 0.0
    aoa_error_var: float = 0.0
    csi_from_snr: bool = False
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        self.validate()

    def validate(self):
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError("sweep", f"unknown sweep parameter {self.sweep_param!r}; choose from {SWEEP_PARAMS}")
        if not self.sweep_values:
            raise ConfigError("sweep", "needs at least one value")
        if self.technique not in TECHNIQUES + ("both",):
            raise ConfigError("technique", f"must be proposed, difference or both, got {self.technique!r}")
        if self.fault_mode not in FAULT_MODES:
            raise ConfigError("fault_mode", f"must be complete or partial, got {self.fault_mode!r}")
        if not _is_int(self.n_elements) or self.n_elements < 2:
            raise ConfigError("n_elements", f"must be an integer >= 2, got {self.n_elements!r}")
        if not _is_int(self.n_faults) or not 0 <= self.n_faults < self.n_elements:
            raise ConfigError("n_faults", f"must be an integer in [0, {self.n_elements}), got {self.n_faults!r}")
        if not _is_int(self.n_paths) or not 1 <= self.n_paths < self.n_elements:
            raise ConfigError("n_paths", f"must be an integer in [1, {self.n_elements}), got {self.n_paths!r}")
        if not _is_int(self.trials) or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        if not _is_int(self.master_seed) or self.master_seed < 0:
            raise ConfigError("master_seed", f"must be a non-negative integer, got {self.master_seed!r}")
        if not isinstance(self.quantized, bool):
            raise ConfigError("quantized", "must be true or false")
        if not isinstance(self.csi_from_snr, bool):
            raise ConfigError("csi_from_snr", "must be true or false")
        for value in self.sweep_values:
            self.params_at(value)

    def params_at(self, value) -> TrialParams:
        """Resolve the parameters of the sweep point ``value``."""
        values = {k: getattr(self, k) for k in SWEEP_PARAMS}
        values[self.sweep_param] = value
        m = values["m_measurements"]
        if not _is_int(m) or not 1 <= m <= self.n_elements - self.n_paths:
            raise ConfigError(
                "m_measurements", f"must be an integer in [1, {self.n_elements - self.n_paths}], got {m!r}"
            )
        for key in ("snr_db", "aoa_offset_deg", "gain_error_var", "aoa_error_var"):
            v = values[key]
            if not _is_real(v) or (key != "snr_db" and not math.isfinite(v)) or math.isnan(v):
                raise ConfigError(key, f"must be a real number, got {v!r}")
            if key.endswith("_var") and v < 0:
                raise ConfigError(key, f"must be non-negative, got {v!r}")
        gain_var = float(values["gain_error_var"])
        if self.csi_from_snr:
            gain_var += NoiseModel(float(values["snr_db"])).noise_variance
        return TrialParams(
            n_elements=int(self.n_elements),
            n_faults=int(self.n_faults),
            fault_mode=self.fault_mode,
            n_paths=int(self.n_paths),
            quantized=self.quantized,
            m_measurements=int(m),
            snr_db=float(values["snr_db"]),
            aoa_offset_deg=float(values["aoa_offset_deg"]),
            gain_error_var=gain_var,
            aoa_error_var=float(values["aoa_error_var"]),
        )

    @property
    def techniques(self) -> tuple:
        return TECHNIQUES if self.technique == "both" else (self.technique,)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        return d


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)


@dataclass(frozen=True)
class SweepRow:
    sweep_value: object
    technique: str
    p_success: float
    trials: int
    std_error: float
    seed: int
    params: TrialParams


@dataclass(frozen=True)
class SweepResult:
    spec: ExperimentSpec
    rows: tuple = field(default=())

    def p_success(self, technique: str) -> np.ndarray:
        return np.array([r.p_success for r in self.rows if r.technique == technique])

    def std_error(self, technique: str) -> np.ndarray:
        return np.array([r.std_error for r in self.rows if r.technique == technique])

    def values(self, technique: str) -> list:
        return [r.sweep_value for r in self.rows if r.technique == technique]


def trial_streams(master_seed: int, trial_index: int, technique: str) -> list:
    """Independent generators for paths, faults, knowledge, combiner, noise."""
    seq = np.random.SeedSequence([master_seed, trial_index, _TECHNIQUE_KEY[technique]])
    return [np.random.default_rng(s) for s in seq.spawn(5)]


def simulate_trial(params: TrialParams, technique: str, streams: list) -> bool:
    """One diagnosis attempt; True iff the detected set equals the fault set."""
    rng_paths, rng_faults, rng_knowledge, rng_combiner, rng_noise = streams
    cfg = ArrayConfig(params.n_elements)
    paths = sample_paths(cfg, params.n_paths, params.quantized, rng_paths)
    faults = sample_faults(cfg.n_elements, params.n_faults, params.fault_mode, rng_faults)
    channel = apply_faults(synthesize_channel(cfg, paths), faults)
    knowledge = perturb_knowledge(
        paths,
        rng_knowledge,
        aoa_offset_deg=params.aoa_offset_deg,
        aoa_error_variance=params.aoa_error_var,
        gain_error_variance=params.gain_error_var,
    )
    noise = NoiseModel(params.snr_db)
    m, s = params.m_measurements, params.n_faults

    if technique == "proposed":
        combiner = null_steering_combiner(cfg, knowledge, m, rng_combiner, params.quantized)
        y = measure(combiner, channel, noise, rng_noise)
        result = diagnose_proposed(cfg, knowledge, y, combiner, sparsity=s)
    elif technique == "difference":
        combiner = combiner_random_phase(cfg, m, rng_combiner)
        y = measure(combiner, channel, noise, rng_noise)
        result = diagnose_difference(cfg, knowledge, y, combiner, sparsity=s)
    else:
        raise DomainError(f"unknown technique {technique!r}")
    return extract_support(result, s) == faults.indices


def run_trial(spec: ExperimentSpec, sweep_value, trial_index: int, technique: str) -> bool:
    """Run one trial of ``spec`` at ``sweep_value``; pipeline errors count as failures."""
    params = spec.params_at(sweep_value)
    streams = trial_streams(spec.master_seed, trial_index, technique)
    try:
        return simulate_trial(params, technique, streams)
    except (DiagnosisError, np.linalg.LinAlgError) as exc:
        log.debug("trial %d (%s, %s=%r) failed: %s", trial_index, technique,
                  spec.sweep_param, sweep_value, exc)
        return False


TrialFn = Callable[[ExperimentSpec, object, int, str], bool]


def _run_block(trial_fn: TrialFn, spec: ExperimentSpec, value, technique: str,
               start: int, stop: int) -> int:
    return sum(bool(trial_fn(spec, value, i, technique)) for i in range(start, stop))


def run_sweep(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    trial_fn: TrialFn = run_trial,
    block_size: int = 100,
) -> SweepResult:
    """Estimate ``p_success`` at every sweep point for every technique.

    Work is split into blocks of trials keyed by (point, technique, block);
    results are summed per key, so the outcome does not depend on
    ``workers``.  ``trial_fn`` must be picklable when ``workers > 1``.
    """
    tasks = []
    for value in spec.sweep_values:
        for technique in spec.techniques:
            for start in range(0, spec.trials, block_size):
                tasks.append((value, technique, start, min(start + block_size, spec.trials)))

    if workers is None or workers <= 1:
        counts = [_run_block(trial_fn, spec, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, trial_fn, spec, *t) for t in tasks]
            counts = [f.result() for f in futures]

    successes: dict = {}
    for (value, technique, _, _), count in zip(tasks, counts):
        key = (value, technique)
        successes[key] = successes.get(key, 0) + count

    rows = []
    for value in sorted(spec.sweep_values):
        for technique in sorted(spec.techniques):
            p = successes[(value, technique)] / spec.trials
            rows.append(SweepRow(
                sweep_value=value,
                technique=technique,
                p_success=p,
                trials=spec.trials,
                std_error=math.sqrt(p * (1 - p) / spec.trials),
                seed=spec.master_seed,
                params=spec.params_at(value),
            ))
            log.info("%s %s=%s %s p_success=%.4f", spec.experiment_id,
                     spec.sweep_param, value, technique, p)
    return SweepResult(spec=spec, rows=tuple(rows))


def _grid(start, stop, step, ndigits=6):
    n = int(round((stop - start) / step))
    return tuple(round(start + k * step, ndigits) for k in range(n + 1))


PRESETS = ("fig1", "fig2", "fig3", "fig4")


def preset(name: str, master_seed: int = 0, trials: int = DEFAULT_TRIALS) -> tuple:
    """Sub-experiments reproducing one figure's sweep at desk scale.

    Returns a tuple of :class:`ExperimentSpec` (one per curve family).
    """
    common = dict(n_elements=128, master_seed=master_seed, trials=trials, technique="both")
    if name == "fig1":
        return tuple(
            ExperimentSpec(
                experiment_id=f"fig1-S{s}", n_faults=s, fault_mode="complete", n_paths=1,
                quantized=True, snr_db=40.0, sweep_param="m_measurements",
                sweep_values=tuple(range(5, 61, 5)), **common,
            )
            for s in (1, 3, 6)
        )
    if name == "fig2":
        return tuple(
            ExperimentSpec(
                experiment_id=f"fig2-{mode}", n_faults=6, fault_mode=mode, n_paths=1,
                quantized=True, m_measurements=35, snr_db=40.0,
                sweep_param="aoa_offset_deg", sweep_values=_grid(0.0, 2.0, 0.1), **common,
            )
            for mode in FAULT_MODES
        )
    if name == "fig3":
        return tuple(
            ExperimentSpec(
                experiment_id=f"fig3-{mode}", n_faults=6, fault_mode=mode, n_paths=3,
                quantized=False, m_measurements=35, csi_from_snr=True,
                sweep_param="snr_db", sweep_values=_grid(0.0, 40.0, 5.0), **common,
            )
            for mode in FAULT_MODES
        )
    if name == "fig4":
        base = dict(n_faults=6, fault_mode="complete", n_paths=3, quantized=False,
                    m_measurements=45, snr_db=30.0, **common)
        return (
            ExperimentSpec(experiment_id="fig4-gain", sweep_param="gain_error_var",
                           sweep_values=(0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0), **base),
            ExperimentSpec(experiment_id="fig4-aoa", sweep_param="aoa_error_var",
                           sweep_values=(0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0), **base),
        )
    raise DomainError(f"unknown preset {name!r}; choose from {PRESETS}")


def with_overrides(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(spec, **changes) if changes else spec
