"""polyevp: polyhedral cone scalarization, lower-boundedness diagnostics,
and certified variational descent on finite metric spaces.

Everything is computed through exact rational linear programming by
default, so answers are certificates rather than approximations; a float
backend with explicit tolerances is available for large batches.
"""

from .boundedness import (
    BoundednessReport,
    HLowerResult,
    classify,
    find_kstar,
    is_H_lower_bounded,
    is_K_lower_bounded,
    is_quasi_K_lower_bounded,
    separating_epsilon_for,
)
from .evp import (
    CoradiantGapResult,
    EfficiencyMode,
    EVPCertificate,
    EVPProblem,
    FiniteMetricSpace,
    HypothesisViolatedError,
    PlainMode,
    ScaledMode,
    ScaleMismatchWarning,
    SetValuedMapTable,
    VerificationReport,
    ae_efficient,
    condition_ii_witness,
    coradiant_escape_check,
    dominates,
    lower_section,
    solve,
    verify_certificate,
)
from .geometry import (
    ConeGen,
    ConeValidation,
    DimensionMismatchError,
    InvalidConfigurationError,
    Polytope,
    VPolyhedralUnion,
    cone_contains,
    dual_cone_contains,
    scaled_H_minus_K_contains,
    scaled_H_plus_K_contains,
    triangle_property_check,
    union_disjoint_from,
    validate_cone,
    zero_notin_H_plus_K,
)
from .lp_core import (
    EXACT,
    FLOAT,
    Backend,
    LinearProgram,
    LPFormatError,
    LPResult,
    check_witness,
    float_backend,
)
from .lp_core import solve as solve_lp
from .scalarization import (
    BisectionResult,
    BracketExhaustedError,
    ExtendedReal,
    InternalConsistencyError,
    SeparationFunctional,
    attainment_check,
    evaluate,
    evaluate_bisection,
    xi,
)

__version__ = "0.1.0"
