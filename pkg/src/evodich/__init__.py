"""Numerical exponential dichotomy for linear evolution families.

Submodules:

* ``linalg``     exponentials, resolvents, singular values, spectral distances
* ``evolution``  coefficient functions and propagators ``U(x, s)``
* ``witness``    periodic witness functions and Fourier resolvents
* ``shift``      the weighted shift operator and its circle scan
* ``riesz``      contour projections, dichotomy certificates, Green kernels
* ``semigroup``  spectral mapping and resolvent checks for ``exp(tA)``
* ``scenario``   YAML scenarios, JSON reports, sweeps
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .evolution import CoefficientFunction, EvolutionFamily, GrowthBound, fit_growth_bound
from .linalg import hausdorff_distance, matrix_exponential, resolvent, resolvent_norm
from .riesz import (
    GreenKernel,
    contour_projection,
    extract_pointwise,
    green_solve,
    neumann_inverse,
    verify_dichotomy,
)
from .semigroup import equivalence_report, imaginary_resolvent_scan, spectral_map_check
from .shift import WeightedShiftOperator, assemble, circle_margin
from .witness import gearhart_ratio, near_fixed_vector, resolvent_fourier, witness_quotient
