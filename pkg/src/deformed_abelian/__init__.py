"""Deformed hyperelliptic periods: the function phi, the pairing <Q, L>,
exact forms, the cycle relation, the intersection number and the deformed
Riemann bilinear identity, checked against classical periods as xi -> inf.
"""

__version__ = "0.1.0"

from .quad import QuadratureSpec, QuadResult, QuadratureError, integrate_circle, integrate_line, integrate_segment
from .phi import PhiEvaluator, PoleProximityError, BaseStripError
from .sympoly import (
    DegeneracyError,
    Params,
    Poly,
    basis_R,
    basis_S,
    cycle_vector,
    exact_form,
    kernel_X,
    reduce_mod_exact,
    regularization_split,
    sigma,
)
from .pairing import (
    DeformedPeriods,
    DivergenceError,
    PairingResult,
    bilinear_form,
    bilinear_normalization,
    intersection_quadrature,
    intersection_residues,
    pair,
    pair_regularized,
)
from .identities import (
    CheckReport,
    ClassicalCurve,
    check_suite,
    classical_limit_scan,
    classical_period,
    classical_zeta,
)

__all__ = [name for name in dir() if not name.startswith("_")]
