"""Arbitrary-precision local decompositions of Neron-Tate and Faltings heights.

Library layout mirrors the computation: theta_engine (series and the forms
built from them), siegel (fundamental-domain machinery), weierstrass (exact
curve arithmetic), elliptic (curves over Q), local_heights (the mu/beta/alpha
decomposition and canonical heights), hyper_faltings (hyperelliptic Jacobian
heights), cli (command-line front end).
"""

from .elliptic import (
    chowla_selberg,
    faltings_elliptic,
    minimal_model_q,
    periods_agm,
    quadratic_character,
)
from .errors import (
    DomainError,
    MalformedChangeError,
    NumericError,
    OrbitCollisionError,
    PreconditionError,
    ResourceError,
    SingularModelError,
    ThetaHeightsError,
)
from .hyper_faltings import (
    FinitePlaceInput,
    bomemo_closed_form,
    faltings_jacobian,
    lockhart_invariant,
    quintic_cm_period_matrix,
)
from .local_heights import (
    HeightBreakdown,
    Place,
    alpha_arch,
    alpha_finite,
    autissier_integral,
    beta_arch,
    canonical_height_q,
    mu_arch_closed,
    mu_arch_series,
)
from .precision import DEFAULT_CTX, PrecisionContext
from .siegel import check_reduced, matrix_lemma_check, reduce_g1, theta_null_bounds
from .theta_engine import (
    SiegelMatrix,
    ThetaCharacteristic,
    j10,
    jacobi_thetas,
    modular_discriminant,
    phi_product,
    theta_char,
    theta_norm,
)
from .weierstrass import (
    ModelChange,
    WeierstrassEquation,
    apply_model_change,
    char_system,
    discriminant,
    finite_valuations,
    parse_curve_spec,
)

__all__ = [
    "PrecisionContext", "DEFAULT_CTX",
    "ThetaHeightsError", "DomainError", "SingularModelError", "MalformedChangeError",
    "OrbitCollisionError", "PreconditionError", "NumericError", "ResourceError",
    "SiegelMatrix", "ThetaCharacteristic", "theta_char", "jacobi_thetas",
    "theta_norm", "modular_discriminant", "phi_product", "j10",
    "reduce_g1", "check_reduced", "theta_null_bounds", "matrix_lemma_check",
    "WeierstrassEquation", "ModelChange", "discriminant", "apply_model_change",
    "char_system", "finite_valuations", "parse_curve_spec",
    "minimal_model_q", "periods_agm", "faltings_elliptic", "chowla_selberg",
    "quadratic_character",
    "Place", "HeightBreakdown", "mu_arch_series", "mu_arch_closed", "beta_arch",
    "alpha_arch", "alpha_finite", "canonical_height_q", "autissier_integral",
    "FinitePlaceInput", "faltings_jacobian", "lockhart_invariant",
    "bomemo_closed_form", "quintic_cm_period_matrix",
]

__version__ = "0.1.0"
