"""Effective-quantum-number spectral toolkit.

Bound-state energies and level orderings of central (and weakly deformed)
quantum systems from the effective quantum number T = (n + 1/2) + phi*lambda,
with an exact radial reference solver and a quantum-dot composite-spectrum
calculator.  Units: hbar = 2m = 1 throughout.
"""

from .dots import DotSpec, dot_spec_from_config, dot_spectrum, dot_t, slab_energy
from .errors import (ConfigError, ConvergenceError, EnergyBracketError,
                     NoClassicalMotion, UnsupportedPotential)
from .oracle import (SolverConfig, anisotropic_oscillator_shift,
                     ordering_agreement, radial_solution, solve_radial, spectrum)
from .potentials import (IMPENETRABLE, DeformationSpec, HardWallCavity,
                         PowerLaw, Problem, RadialPotential,
                         TabulatedPotential, deformed_evaluate, load_potential,
                         potential_from_config, tabulated_from_csv)
from .semiclassical import (ActionResult, action, estimate_phi, solve_energy,
                            turning_points)
from .tnumber import (PhiFit, ScalingFit, SpectrumTable, StateLabel, TParams,
                      deformation_energy_shift, deformed_t, deformed_t_shift,
                      effective_t, energy_from_scaling, enumerate_levels,
                      fit_phi, fit_scaling, quadrupole_factor, virial_kinetic)

__version__ = "0.1.0"

__all__ = [
    "ActionResult", "ConfigError", "ConvergenceError", "DeformationSpec",
    "DotSpec", "EnergyBracketError", "HardWallCavity", "IMPENETRABLE",
    "NoClassicalMotion", "PhiFit", "PowerLaw", "Problem", "RadialPotential",
    "ScalingFit", "SolverConfig", "SpectrumTable", "StateLabel",
    "TParams", "TabulatedPotential", "UnsupportedPotential", "action",
    "anisotropic_oscillator_shift", "deformation_energy_shift",
    "deformed_evaluate", "deformed_t", "deformed_t_shift",
    "dot_spec_from_config", "dot_spectrum",
    "dot_t", "effective_t", "energy_from_scaling", "enumerate_levels",
    "estimate_phi", "fit_phi", "fit_scaling", "load_potential",
    "ordering_agreement", "potential_from_config", "quadrupole_factor",
    "radial_solution", "slab_energy", "solve_energy", "solve_radial",
    "spectrum", "tabulated_from_csv", "turning_points", "virial_kinetic",
]
