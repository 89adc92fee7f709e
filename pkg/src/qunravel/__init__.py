"""Diffusive unravelings of Lindblad master equations.

Library and CLI for the full family of collapse-model stochastic
Schroedinger equations related by the unitary noise-mixing freedom, with
exact Lindblad propagation as the oracle and verification checks for
ensemble equivalence, Born statistics, and complete positivity.
"""

from .hilbert import (SIGMA_X, SIGMA_Y, SIGMA_Z, dagger, expectation, outer,
                      trace_distance)
from .lindblad import (GKSForm, LindbladModel, choi_matrix, gks_to_lindblad,
                       lindblad_rhs, liouvillian, propagate_exact)
from .observables import (born_statistics, diffusion_matrix,
                          projective_collapse, variance, variance_drift)
from .sde import (EnsembleEstimate, IntegrationConfig, Trajectory,
                  simulate_ensemble, simulate_trajectory)
from .unraveling import (UnitaryFreedom, Unraveling, diffusion_vectors,
                         drift_vector, parse_freedom)

__version__ = "0.1.0"

__all__ = [
    "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "dagger", "expectation", "outer",
    "trace_distance", "GKSForm", "LindbladModel", "choi_matrix",
    "gks_to_lindblad", "lindblad_rhs", "liouvillian", "propagate_exact",
    "born_statistics", "diffusion_matrix", "projective_collapse", "variance",
    "variance_drift", "EnsembleEstimate", "IntegrationConfig", "Trajectory",
    "simulate_ensemble", "simulate_trajectory", "UnitaryFreedom",
    "Unraveling", "diffusion_vectors", "drift_vector", "parse_freedom",
]
