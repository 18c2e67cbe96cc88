"""
toeplitz-roots: p-th roots of quasihomogeneous Toeplitz operators.

Given the symbol e^{i p theta} phi(r) of a Toeplitz operator T on the Bergman
space of the unit disk, with phi a finite sum of terms c r^a (ln r)^b, the
package constructs the radial part psi of a degree-1 operator S with
S^p = T, through the Mellin transform of phi, a Gamma-function
factorization, Mellin convolutions of Beta terms and a calibrated constant.
"""

__version__ = "0.1.0"

from .convolve import (
    BetaTermFunction,
    beta_term,
    convolve_all,
    convolve_cube,
    convolve_jets,
    convolve_pair,
    pair_bound,
)
from .exceptions import (
    AccuracyError,
    DegenerateCalibrationError,
    PoleError,
    PositivityError,
    ProperError,
    RangeError,
    ToeplitzRootError,
    UnsupportedSymbolError,
)
from .gammafactor import BetaFactorization, GammaQuotientProduct, build_quotients, factorize
from .grid import Grid, GridFunction, TypeEnvelope, envelope_ratio, graded_grid, grid_eval
from .roots import RootOptions, RootProblem, RootResult, construct_root, psi_mellin
from .specialfun import QuadratureSpec, beta, integrate01, log_gamma
from .symbols import (
    QuasihomogeneousSymbol,
    RadialTerm,
    RadialTermSum,
    RationalMellin,
    mellin_eval,
    mellin_of_terms,
)
from .toeplitz import WeightedShift, compose_power, truncated_matrix, verify_identity

__all__ = [
    # Special functions
    "QuadratureSpec",
    "beta",
    "integrate01",
    "log_gamma",
    # Symbols
    "QuasihomogeneousSymbol",
    "RadialTerm",
    "RadialTermSum",
    "RationalMellin",
    "mellin_eval",
    "mellin_of_terms",
    # Gamma factorization
    "BetaFactorization",
    "GammaQuotientProduct",
    "build_quotients",
    "factorize",
    # Grids and convolution
    "Grid",
    "GridFunction",
    "TypeEnvelope",
    "envelope_ratio",
    "graded_grid",
    "grid_eval",
    "BetaTermFunction",
    "beta_term",
    "convolve_all",
    "convolve_cube",
    "convolve_jets",
    "convolve_pair",
    "pair_bound",
    # Roots
    "RootOptions",
    "RootProblem",
    "RootResult",
    "construct_root",
    "psi_mellin",
    # Weighted shifts
    "WeightedShift",
    "compose_power",
    "truncated_matrix",
    "verify_identity",
    # Exceptions
    "ToeplitzRootError",
    "PositivityError",
    "ProperError",
    "UnsupportedSymbolError",
    "AccuracyError",
    "DegenerateCalibrationError",
    "RangeError",
    "PoleError",
]
