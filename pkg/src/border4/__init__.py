"""Certifying border rank <= 4 for small complex tensors.

Exact membership tests for the fourth secant variety in the 3x3x4 and
4x4x4 formats, built from explicit polynomial families: degree-9
symmetrization minors, a degree-6 family replacing the degree-16 trace
conditions, degree-5 commutative conditions, and their lifts. Two
independent 3x3x4 routes (degree 9 + 16 and degree 9 + 6) cross-validate
each other; all verdict-producing arithmetic runs over the rationals or a
prime field.
"""

from .degree6 import (
    Degree6Family,
    FamilyValidationError,
    eval_family,
    load_deg6_family,
    membership_routeB,
    restricted_family,
    restricted_identity_check,
)
from .harness import (
    ExperimentSpec,
    ToleranceModel,
    cross_validate_334,
    float_check,
    lift_stability_audit,
    matmul_tensor,
    mode_stability_audit,
)
from .lift444 import LiftConfig, lift_eval, lift_generate_modp, membership444
from .matrix import ExactMatrix
from .modes import FLOAT64, P31, P61, RATIONAL, ModeError, prime_field
from .poly import MultiPoly, PolyRing, VarRegistry
from .report import (
    INCONCLUSIVE,
    MEMBER,
    NON_MEMBER,
    MembershipReport,
    Stage,
)
from .specialform import f_det, normalize_pair, special_membership
from .strassen import (
    strassen_dimension,
    strassen_eval,
    strassen_generate,
    symbolic_tensor,
)
from .sym9 import build_sym_matrices, membership_routeA, sym9_test, trace16_check
from .tensor import (
    Tensor3,
    read_tensor,
    sample_generic,
    sample_rank_r,
    sample_special_form,
    write_tensor,
)

__all__ = [
    "Degree6Family",
    "ExactMatrix",
    "ExperimentSpec",
    "FamilyValidationError",
    "FLOAT64",
    "INCONCLUSIVE",
    "LiftConfig",
    "MEMBER",
    "MembershipReport",
    "ModeError",
    "MultiPoly",
    "NON_MEMBER",
    "P31",
    "P61",
    "PolyRing",
    "RATIONAL",
    "Stage",
    "Tensor3",
    "ToleranceModel",
    "VarRegistry",
    "build_sym_matrices",
    "cross_validate_334",
    "eval_family",
    "f_det",
    "float_check",
    "lift_eval",
    "lift_generate_modp",
    "lift_stability_audit",
    "load_deg6_family",
    "matmul_tensor",
    "membership444",
    "membership_routeA",
    "membership_routeB",
    "mode_stability_audit",
    "normalize_pair",
    "prime_field",
    "read_tensor",
    "restricted_family",
    "restricted_identity_check",
    "sample_generic",
    "sample_rank_r",
    "sample_special_form",
    "special_membership",
    "strassen_dimension",
    "strassen_eval",
    "strassen_generate",
    "symbolic_tensor",
    "sym9_test",
    "trace16_check",
    "write_tensor",
]
