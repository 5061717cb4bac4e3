"""Capacities of finite-dimensional quantum channels and the c-q coincidence criterion."""

__version__ = "0.1.0"

from .capacity import (
    CapacityReport,
    EnergyConstraint,
    ParameterError,
    chi_essential_subspace,
    coherent_information,
    constrained_capacities,
    constrained_holevo,
    delta_gap,
    ea_capacity,
    holevo_capacity,
    mutual_information,
    roof_output_entropy,
)
from .channels import Channel, complementary, isometric_equivalence, pinching, restrict_input
from .config import DEFAULT_CONFIG, SolverConfig
from .criterion import (
    Status,
    check_corollary1,
    check_corollary2,
    check_lemma1,
    check_proposition1,
    check_state_criterion,
    check_theorem1,
)
from .qcore import DensityMatrix, Ensemble, chi_quantity, entropy, relative_entropy
from .structure import detect_cq, is_degradable, orthogonal_supports
from .zoo import zoo

__all__ = [
    "CapacityReport",
    "Channel",
    "DEFAULT_CONFIG",
    "DensityMatrix",
    "EnergyConstraint",
    "Ensemble",
    "ParameterError",
    "SolverConfig",
    "Status",
    "check_corollary1",
    "check_corollary2",
    "check_lemma1",
    "check_proposition1",
    "check_state_criterion",
    "check_theorem1",
    "chi_essential_subspace",
    "chi_quantity",
    "coherent_information",
    "complementary",
    "constrained_capacities",
    "constrained_holevo",
    "delta_gap",
    "detect_cq",
    "ea_capacity",
    "entropy",
    "holevo_capacity",
    "is_degradable",
    "isometric_equivalence",
    "mutual_information",
    "orthogonal_supports",
    "pinching",
    "relative_entropy",
    "restrict_input",
    "roof_output_entropy",
    "zoo",
]
