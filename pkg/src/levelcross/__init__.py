"""Exact and adiabatic geometric phases of a two-level crossing.

h(t) = E(t) + g sigma . y(t) is propagated exactly along a parameter path
and the resulting phase is compared with the adiabatic holonomy, from the
adiabatic regime down to paths that shrink onto the crossing.
"""
__version__ = "0.1.0"

from .errors import (ConfigError, DegeneratePointError, InvalidParameterError,
                     InvalidPathError, LevelCrossError, UndefinedPhaseError)
from .spectra import (Hamiltonian2, PolarCoords, SpectralFrame, eigenframe, eigenframe_numeric,
                      hamiltonian_at, polar_from_cartesian, rotation_u)
from .connection import (AngularVelocity, ConnectionSample, connection_analytic,
                         connection_numeric, diagonal_holonomy, solid_angle)
from .paths import (ParameterPath, circle_path, custom_path, load_path, real_plane_loop,
                    save_path)
from .propagator import (CBasisResult, EvolutionResult, IntegratorConfig, equivalence_check,
                         evolve_c_basis, evolve_effective, evolve_original)
from .phases import (GaugeFunction, PhaseReport, adiabatic_prediction, dynamical_phase,
                     gauge_transform, geometric_phase_exact, total_phase)

__all__ = [
    "__version__",
    "LevelCrossError", "InvalidParameterError", "DegeneratePointError", "InvalidPathError",
    "UndefinedPhaseError", "ConfigError",
    "Hamiltonian2", "PolarCoords", "SpectralFrame", "hamiltonian_at", "polar_from_cartesian",
    "eigenframe", "eigenframe_numeric", "rotation_u",
    "AngularVelocity", "ConnectionSample", "connection_analytic", "connection_numeric",
    "diagonal_holonomy", "solid_angle",
    "ParameterPath", "circle_path", "real_plane_loop", "custom_path", "save_path", "load_path",
    "IntegratorConfig", "EvolutionResult", "CBasisResult", "evolve_original", "evolve_effective",
    "evolve_c_basis", "equivalence_check",
    "PhaseReport", "GaugeFunction", "total_phase", "dynamical_phase", "geometric_phase_exact",
    "adiabatic_prediction", "gauge_transform",
]
