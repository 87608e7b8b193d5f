"""Entropy-stable 1D discontinuous Galerkin solver for the compressible Euler equations.

Weak-form DG with an entropy-correction artificial viscosity (BR-1 viscous
discretization, per-element or subcell coefficients), an entropy-conservative
flux-differencing baseline, explicit adaptive SSP time stepping, and a
diagnostics/CLI layer that turns runs into CSV artifacts.
"""

from esdg1d.errors import AdmissibilityError, ConfigError, IntegrationFailure

__version__ = "0.1.0"

__all__ = ["AdmissibilityError", "ConfigError", "IntegrationFailure", "__version__"]
