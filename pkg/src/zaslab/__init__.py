"""Zero area singularities in conformally flat, spherically symmetric initial data.

Profiles ``phi(r)`` define metrics ``phi**4 * delta``; the package computes
Hawking, ADM, regular and ZAS masses, capacities of spheres and singular
spheres, the weak inverse mean curvature flow of centered spheres, and
suites that check the inequalities relating them.
"""

from .errors import (ConvergenceError, DomainError, EnvelopeError, InputError,
                     InterpolationError, MismatchError, NotRegularError,
                     NumericalError, ParseError, QuadratureError, ValidationError,
                     ZaslabError)
from .geometry import (Boosted, Bumped, Flat, NegSchwarzschild, PosSchwarzschild,
                       PowerLaw, RadialProfile, Resolution, Tabulated, Weight,
                       profile_from_dict, profile_to_dict, rescale_resolution,
                       scalar_curvature, sphere_area, sphere_geometry, validate_profile)
from .elliptic import (HarmonicFunction, HarmonicProduct, capacity_surface, capacity_zas,
                       harmonic_factor_profile, solve_harmonic)
from .mass import (MassReport, adm_mass, conformal_mass_shift, hawking_mass,
                   regular_mass, zas_mass)
from .imcf import (FlowTrace, capacity_energy_bound, geroch_report, hawking_limit_vs_adm,
                   minimizing_hull_radius, weak_flow)
from .reports import SuiteReport

__version__ = "0.1.0"
