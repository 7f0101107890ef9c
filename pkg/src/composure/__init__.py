"""composure: exact interval measure, fat Cantor sets, certified bump
calculus, and decision criteria for when composition with a measurable
outer function preserves measurability."""

from .bump import (
    PathologicalFn,
    bump_total_integral,
    derivative_sup_bound,
    gap_integral,
    gap_scale,
    psi,
    psi_deriv,
    psi_or_zero,
    psi_sup,
)
from .cantor import FatCantorStage, RemovalSchedule, svc_stage
from .criteria import (
    CHECK_ORDER,
    Criterion,
    CriterionResult,
    OpenZeroSetWitness,
    SharpnessReport,
    Verdict,
    cantor_endpoint_grid,
    check_bv_jump_only,
    check_derivative_nonzero,
    check_ess_open_zeroset,
    check_inverse_ac,
    check_sf_null,
    sharpness_demo,
    uniform_grid,
    verdict,
)
from .derivhull import (
    LipschitzInverseReport,
    QuotientHull,
    SfScanReport,
    en_classify,
    lipschitz_inverse_check,
    quotient_hull,
    sf_scan,
)
from .enclosure import BoundedReal, decimal_str, sci_str
from .errors import (
    ComposureError,
    DomainError,
    IsolatedPoint,
    MetadataMissing,
    NotPiecewiseMonotone,
    PrecisionUnreachable,
    PreconditionUnmet,
    SamplerExhausted,
    ScheduleTooFat,
    SingularPartPresent,
    StubPiece,
    UnboundedSet,
)
from .essopen import (
    EssOpenWitness,
    MarkedSet,
    essential_open_witness,
    from_countable_components,
    symmetric_defect,
    verify_witness,
)
from .intervals import (
    Interval,
    IntervalSet,
    closed,
    combine,
    format_interval,
    format_interval_set,
    open_iv,
    parse_interval,
    parse_interval_set,
    point,
)
from .piecewise import (
    PiecewiseFn,
    PreimageResult,
    StepFn,
    abs_fn,
    cantor_bump_fn,
    cantor_integral_fn,
    cantor_stub_fn,
    const_fn,
    cubic_drift_fn,
    cubic_fn,
    format_fn_spec,
    heaviside_fn,
    identity_fn,
    parse_fn_spec,
    square_fn,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedReal",
    "CHECK_ORDER",
    "ComposureError",
    "Criterion",
    "CriterionResult",
    "DomainError",
    "EssOpenWitness",
    "FatCantorStage",
    "Interval",
    "IntervalSet",
    "IsolatedPoint",
    "LipschitzInverseReport",
    "MarkedSet",
    "MetadataMissing",
    "NotPiecewiseMonotone",
    "OpenZeroSetWitness",
    "PathologicalFn",
    "PiecewiseFn",
    "PreconditionUnmet",
    "PrecisionUnreachable",
    "PreimageResult",
    "QuotientHull",
    "RemovalSchedule",
    "SamplerExhausted",
    "ScheduleTooFat",
    "SfScanReport",
    "SharpnessReport",
    "SingularPartPresent",
    "StepFn",
    "StubPiece",
    "UnboundedSet",
    "Verdict",
    "abs_fn",
    "bump_total_integral",
    "cantor_bump_fn",
    "cantor_endpoint_grid",
    "cantor_integral_fn",
    "cantor_stub_fn",
    "check_bv_jump_only",
    "check_derivative_nonzero",
    "check_ess_open_zeroset",
    "check_inverse_ac",
    "check_sf_null",
    "closed",
    "combine",
    "const_fn",
    "cubic_drift_fn",
    "cubic_fn",
    "decimal_str",
    "derivative_sup_bound",
    "en_classify",
    "essential_open_witness",
    "format_fn_spec",
    "format_interval",
    "format_interval_set",
    "from_countable_components",
    "gap_integral",
    "gap_scale",
    "heaviside_fn",
    "identity_fn",
    "lipschitz_inverse_check",
    "open_iv",
    "parse_fn_spec",
    "parse_interval",
    "parse_interval_set",
    "point",
    "psi",
    "psi_deriv",
    "psi_or_zero",
    "psi_sup",
    "quotient_hull",
    "sci_str",
    "sf_scan",
    "sharpness_demo",
    "square_fn",
    "symmetric_defect",
    "uniform_grid",
    "verdict",
    "verify_witness",
]
