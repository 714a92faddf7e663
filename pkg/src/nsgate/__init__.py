"""Post-selected linear-optical gate simulation and sign-shift bound tools."""

from .bounds import (
    FEASIBLE_RESIDUAL,
    X2_MAX,
    BoundCurveSample,
    OptimizationResult,
    boundary_y2,
    feasible,
    maximize_boundary,
    numeric_search,
    probability_on_boundary,
    sample_region,
    scan_curve,
)
from .conditional import (
    NORM_EPS,
    ConditionalResult,
    ConditionalScheme,
    DensityMatrix,
    MeasurementOperator,
    SystemBasis,
    apply_conditional,
    completeness_defect,
    decompose_by_ancilla_count,
    kraus_operator,
)
from .fock import (
    LIFT_TOL,
    PHOTON_CAP,
    UNITARITY_TOL,
    CapacityError,
    FockSector,
    LopCircuit,
    SectorMatrix,
    enumerate_sector,
    fock_amplitude,
    haar_unitary,
    lift_to_sector,
    permanent,
    sector_index,
)
from .gate import (
    CONDITION_TOL,
    GeneralizedDesign,
    InfeasibleDesignError,
    NsDesign,
    NsReport,
    OutcomeReport,
    PartialMatrix,
    ancilla_block,
    complete_design,
    complete_to_unitary,
    generalized_design,
    klm_design,
    reduce_general_ancilla,
    verify_ns,
)

__all__ = [
    "BoundCurveSample",
    "CapacityError",
    "ConditionalResult",
    "ConditionalScheme",
    "DensityMatrix",
    "FockSector",
    "GeneralizedDesign",
    "InfeasibleDesignError",
    "LopCircuit",
    "MeasurementOperator",
    "NsDesign",
    "NsReport",
    "OptimizationResult",
    "OutcomeReport",
    "PartialMatrix",
    "SectorMatrix",
    "SystemBasis",
    "ancilla_block",
    "apply_conditional",
    "boundary_y2",
    "complete_design",
    "complete_to_unitary",
    "completeness_defect",
    "decompose_by_ancilla_count",
    "enumerate_sector",
    "feasible",
    "fock_amplitude",
    "generalized_design",
    "haar_unitary",
    "kraus_operator",
    "klm_design",
    "lift_to_sector",
    "maximize_boundary",
    "numeric_search",
    "permanent",
    "probability_on_boundary",
    "reduce_general_ancilla",
    "sample_region",
    "scan_curve",
    "sector_index",
    "verify_ns",
    "CONDITION_TOL",
    "FEASIBLE_RESIDUAL",
    "LIFT_TOL",
    "NORM_EPS",
    "PHOTON_CAP",
    "UNITARITY_TOL",
    "X2_MAX",
]

__version__ = "0.1.0"
