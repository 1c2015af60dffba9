"""Compressed-measurement fault diagnosis for mmWave receive arrays.

Two diagnosis pipelines are provided: a partial-CSI technique that only
needs the angles of arrival (combiners steer nulls toward every path so
that only the fault-induced error channel leaks through), and the
full-CSI difference baseline that subtracts a synthesized fault-free
reference response.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    DegenerateProblemError,
    DiagnosisError,
    DomainError,
    IllConditionedError,
)
from .array_model import (
    ArrayConfig,
    DftCodebook,
    SteeringVector,
    dft_codebook,
    nearest_grid_index,
    steering_vector,
)
from .fault_channel import (
    ChannelPair,
    FaultPattern,
    PathSet,
    apply_faults,
    sample_faults,
    sample_paths,
    synthesize_channel,
)
from .combiner import (
    CombinerMatrix,
    NullSpaceBasis,
    combiner_dft_null,
    combiner_from_projector,
    combiner_random_phase,
    householder_projector,
)
from .recovery import (
    DiagnosisResult,
    RecoveryProblem,
    exhaustive_solve,
    extract_support,
    omp_solve,
)
from .diagnosis import (
    ChannelKnowledge,
    NoiseModel,
    diagnose_difference,
    diagnose_proposed,
    measure,
    perturb_knowledge,
)
from .simulator import (
    ExperimentSpec,
    SweepResult,
    preset,
    run_sweep,
    run_trial,
)
