"""Thermodynamic-limit annealing dynamics of spherical mixed p-spin glasses.

Mean-field Langevin (simulated annealing) and Keldysh (quantum annealing)
two-time solvers, a finite-N Monte Carlo cross-check and residual-energy
power-law fits.
"""
__version__ = "0.1.0"

from .errors import ConfigError, FitIllPosed, MemoryCapError, NumericalBlowUp  # noqa: E402
from .model import MixtureSpec, f_eval, threshold_energy  # noqa: E402
from .schedule import Schedule, ScheduleKind, TimeGrid, quantum_coefficients, s_at  # noqa: E402
from .langevin import langevin_solve  # noqa: E402
from .keldysh import keldysh_solve  # noqa: E402
from .analysis import PowerLawFit, dt_extrapolate, fit_power_law  # noqa: E402

__all__ = [
    "ConfigError", "FitIllPosed", "MemoryCapError", "NumericalBlowUp",
    "MixtureSpec", "f_eval", "threshold_energy",
    "Schedule", "ScheduleKind", "TimeGrid", "quantum_coefficients", "s_at",
    "langevin_solve", "keldysh_solve",
    "PowerLawFit", "dt_extrapolate", "fit_power_law",
]
