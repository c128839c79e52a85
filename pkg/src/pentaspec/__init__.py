"""Spectra of penta-diagonal band operators with odd/even limit-periodic bands.

Row i of T carries c_{i-2}, a_i, b_i at columns i-2, i, i+2.  When the
odd and even subsequences of a, b, c settle to limits (r1, r2) and (s1, s2),
T is a compact perturbation of the limit operator T0, whose spectrum is the
union of two real intervals.
"""
__version__ = "0.1.0"

from ._accel import backend_name
from .coeffs import CoefficientModel, LimitProfile, limit_profile
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    HypothesisError,
    InstabilityError,
    ModelInconsistencyError,
    NumericalDomainError,
    PentaspecError,
    PivotError,
    SpectralRegionError,
)
from .operators import BandOperator, FiniteSection, apply, norm_bounds, tail_bound, truncate
from .spectra import SpectralSet, essential_spectrum, fine_spectrum_T, fine_spectrum_T0
from .recurrence import closed_form_T0, forward_iterate, minimal_solution, transfer_matrix
from .conditions import divergence_check, exponential_rate_check, no_embedded_eigenvalue, series_terms
from .eigensolve import discrete_spectrum, find_complex_eigenvalues, find_real_eigenvalues, shoot
from .oracle import section_eigenvalues, spectral_portrait
