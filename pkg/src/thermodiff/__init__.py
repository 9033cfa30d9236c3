"""thermodiff: a numerical lab for 1D cross-diffusion fluid transport.

Coupled density/temperature diffusion with Soret and Dufour cross effects
in an external potential on [0, 1], with no-escape walls and either
heat-bath (Dirichlet) or isolated boundaries. Provides conservative time
evolution, closed-form and shooting-built no-flow stationary states with
residual certification, thermodynamic diagnostics (entropy, entropy
production, wall entropy rates), and the spectral stability analysis of
the non-self-adjoint linearized generator.
"""

from .errors import (ConfigError, DomainError, IncompleteSpectrumError,
                     NoBracketError, NonVanishingFlowWarning,
                     PositivityError, SingularProfileError,
                     SingularShotError, StiffnessError, ThermodiffError)
from .grid import Grid1D, divergence, face_values, gradient
from .model import (BoundaryEntropyRates, BoundarySpec, FieldState,
                    ModelParams, PotentialSpec, boundary_entropy_rates,
                    energy_current, energy_density, entropy,
                    entropy_production_rate, material_current)
from .evolution import (SnapshotDiagnostics, StepControl, Trajectory,
                        conserved_totals, evolve, rhs)
from .stationary import (StationarityResidual, StationarySolution,
                         boltzmann_profile, driven_example, from_theta,
                         potential_from_theta, rho_from_theta,
                         stationarity_residual, theta_from_potential)
from .spectral import (CouplingMatrix, ModeAnsatz, SemigroupReport,
                       Similarity, SpectrumResult, attach_agreement,
                       boundary_form_coefficient, coupling_matrix,
                       determinant_sign_changes, diagonalize, dispersion,
                       eigenvalues_fd, eigenvalues_transcendental,
                       fd_operator, fd_weights, mode_ansatz,
                       mode_determinant, richardson_eigenvalues,
                       semigroup_diagnostics)

__version__ = "0.1.0"

__all__ = [
    "BoundaryEntropyRates", "BoundarySpec", "ConfigError", "CouplingMatrix",
    "DomainError", "FieldState", "Grid1D", "IncompleteSpectrumError",
    "ModeAnsatz", "ModelParams", "NoBracketError", "NonVanishingFlowWarning",
    "PositivityError", "PotentialSpec", "SemigroupReport",
    "Similarity", "SingularProfileError", "SingularShotError",
    "SnapshotDiagnostics", "SpectrumResult", "StationarityResidual",
    "StationarySolution", "StepControl", "StiffnessError", "ThermodiffError",
    "Trajectory",
    "attach_agreement", "boltzmann_profile", "boundary_entropy_rates",
    "boundary_form_coefficient", "conserved_totals", "coupling_matrix",
    "determinant_sign_changes", "diagonalize", "dispersion", "divergence",
    "driven_example", "eigenvalues_fd", "eigenvalues_transcendental",
    "energy_current", "energy_density", "entropy", "entropy_production_rate",
    "evolve", "face_values", "fd_operator", "fd_weights", "from_theta",
    "gradient", "material_current", "mode_ansatz", "mode_determinant",
    "potential_from_theta", "rho_from_theta", "richardson_eigenvalues",
    "rhs", "semigroup_diagnostics", "stationarity_residual",
    "theta_from_potential",
]
