"""Renormalized r^-4 potential energies of closed surfaces and curves."""

from .closed_forms import (
    CLIFFORD_ENERGY,
    minimize_torus_energy,
    torus_energy_closed,
    torus_energy_derivative,
    torus_potential_closed,
    willmore_torus,
)
from .errors import (
    BracketError,
    DegenerateChartError,
    DomainError,
    IllConditionedFit,
    NonConvergence,
    PoleError,
    RenormError,
    SingularPointError,
    ToleranceNotMet,
)
from .geometry import Circle, Ellipse, ParamSurface, PlanarDisk, RevolutionTorus, Sphere, numeric_curvature
from .moebius import Composition, Inversion, Similarity, clifford_image, compose_surface, invariance_experiment
from .quadrature import QuadratureConfig, cutoff_potential_integral, fit_asymptotics
from .renormalization import (
    RenormConfig,
    expansion_check,
    knot_energy,
    knot_potential,
    surface_energy,
    surface_potential,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
