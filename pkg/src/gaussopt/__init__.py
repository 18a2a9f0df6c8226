"""Geometry and gradient-based optimization of fermionic and bosonic Gaussian states."""

__version__ = "0.1.0"

from .applications import (
    QuadraticHamiltonian,
    complexity,
    cop,
    energy,
    entanglement_entropy,
    eop_problem,
    find_ground_state,
    gaussian_eop,
    ground_state,
    hashing_bound,
    ising_chain,
    klein_gordon_chain,
)
from .errors import GaussianError
from .lie import cayley_retract, full_algebra_basis, sample_group, tangent_frame
from .optimizer import OptimizerConfig, multi_start, run
from .phase_space import GaussianState, Kind, SubsystemPartition
from .purification import build_problem, mixed_standard_form, purification_partition

__all__ = [
    "GaussianError",
    "GaussianState",
    "Kind",
    "OptimizerConfig",
    "QuadraticHamiltonian",
    "SubsystemPartition",
    "build_problem",
    "cayley_retract",
    "complexity",
    "cop",
    "energy",
    "entanglement_entropy",
    "eop_problem",
    "find_ground_state",
    "full_algebra_basis",
    "gaussian_eop",
    "ground_state",
    "hashing_bound",
    "ising_chain",
    "klein_gordon_chain",
    "mixed_standard_form",
    "multi_start",
    "purification_partition",
    "run",
    "sample_group",
    "tangent_frame",
]
