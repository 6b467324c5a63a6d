"""Decoherent-histories quantum mechanics on finite-dimensional systems."""

from .decoherence import (
    AxiomReport,
    DecoherenceMatrix,
    DecoherenceVerdict,
    branch_records,
    build_decoherence_functional,
    check_axioms,
    coarse_grain_D,
    decide,
    linear_positivity_probs,
)
from .estimators import HistoryDecoherence, PathSumDecoherence
from .exceptions import (
    ConfigError,
    CoverageError,
    DimensionError,
    GQMError,
    IncompleteGridError,
    NotDecoherentError,
    RecordsUnavailable,
    StructuralError,
)
from .hilbert import (
    DensityState,
    Hamiltonian,
    HilbertSpace,
    ProjectionFamily,
    Projector,
    evolution_operator,
    heisenberg_projector,
    qubit_family,
    validate_family,
)
from .histories import (
    CoarseGrainingMap,
    HistoryGrid,
    class_operator,
    coarse_grain_operators,
    completeness_check,
    enumerate_histories,
)
from .pathsum import (
    LatticeModel,
    PathPartition,
    build_D_pathsum,
    operator_equivalence_oracle,
    path_amplitude,
    predicate_partition,
    region_partition,
)
from .validation import Tolerances

__version__ = "0.1.0"
