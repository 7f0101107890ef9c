"""Sufficient conditions under which composition preserves measurability.

Each check inspects a representable function f alone and decides whether
g composed with f is guaranteed measurable for every measurable g.  A
passing check carries a machine-checkable witness (an exact zero set, an
essential-openness decomposition, decomposition handles); a failing one
names the first hypothesis that broke.  Certified evidence from piece
metadata is kept strictly apart from sampling: a scan can support a
diagnosis but never a guarantee.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

from .cantor import RemovalSchedule, svc_stage
from .derivhull import DEFAULT_DELTAS, DEFAULT_ZERO_TOL, sf_scan
from .enclosure import BoundedReal
from .errors import ComposureError, DomainError, SingularPartPresent
from .essopen import EssOpenWitness, MarkedSet, essential_open_witness, verify_witness
from .intervals import IntervalSet
from .piecewise import PiecewiseFn, PreimageResult, StepFn


class Criterion(enum.Enum):
    """The sufficient conditions the engine knows how to certify.

    NULL_PREIMAGE is the reduction principle (only preimages of null sets
    can go wrong); it has no standalone decision procedure here and is
    exhibited through :func:`sharpness_demo` rather than :func:`verdict`.
    """

    INVERSE_AC = "InverseAC"
    NULL_PREIMAGE = "NullPreimage"
    SF_NULL = "SfNull"
    DERIVATIVE_NONZERO = "DerivativeNonzero"
    ESS_OPEN_ZEROSET = "EssOpenZeroSet"
    BV_JUMP_ONLY = "BVJumpOnly"


#: cheapest first; logical strength plays no role in the ordering
CHECK_ORDER = (
    Criterion.DERIVATIVE_NONZERO,
    Criterion.SF_NULL,
    Criterion.ESS_OPEN_ZEROSET,
    Criterion.BV_JUMP_ONLY,
    Criterion.INVERSE_AC,
)


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one criterion on one function.

    ``certified`` distinguishes exact metadata reasoning from sampled
    evidence; only certified passes can back a guarantee.  ``measure``
    is the headline exact measure when one exists (zero set, stationary
    set, or scan proxy).
    """

    criterion: Criterion
    passed: bool
    reason: str
    witness: object = None
    measure: Optional[Fraction] = None
    certified: bool = True
    notes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class OpenZeroSetWitness:
    """Witness bundle for the essentially-open-zero-set criteria.

    Holds the exact derivative-zero set, its essential-openness
    decomposition, and the split of f into a continuous part and a step
    function with countable image.  ``total_variation`` is filled in by
    the bounded-variation variant.
    """

    zero_set: IntervalSet
    opens: EssOpenWitness
    fa: PiecewiseFn
    fj: StepFn
    total_variation: object = None


@dataclass(frozen=True)
class Verdict:
    """First passing criterion with its witness, or the aggregate of failures."""

    guaranteed: bool
    criterion: Optional[Criterion]
    witness: object
    results: Tuple[CriterionResult, ...]

    def failures(self) -> Tuple[Tuple[str, str], ...]:
        """(criterion name, first failed hypothesis) per failing check."""
        return tuple(
            (r.criterion.value, r.reason) for r in self.results if not r.passed
        )

    def result_for(self, criterion: Criterion) -> Optional[CriterionResult]:
        for r in self.results:
            if r.criterion is criterion:
                return r
        return None


# -- helpers -------------------------------------------------------------------


def _as_enclosure(v) -> BoundedReal:
    if isinstance(v, BoundedReal):
        return v
    return BoundedReal.exact(Fraction(v))


def _difference_is_null(a, b) -> bool:
    d = _as_enclosure(a) - _as_enclosure(b)
    return abs(d.value) <= d.err


def uniform_grid(lo, hi, n: int) -> tuple:
    """n + 1 equally spaced rationals from lo to hi inclusive."""
    lo, hi = Fraction(lo), Fraction(hi)
    if n < 1:
        raise DomainError("grid needs at least one cell")
    if hi <= lo:
        raise DomainError("grid endpoints must satisfy lo < hi")
    step = (hi - lo) / n
    return tuple(lo + k * step for k in range(n + 1))


def cantor_endpoint_grid(stage: int, schedule: Optional[RemovalSchedule] = None) -> tuple:
    """All endpoints of the stage-n surviving components, sorted."""
    st = svc_stage(stage, schedule)
    pts = set()
    for c in st.surviving.components:
        pts.add(c.lo)
        pts.add(c.hi)
    return tuple(sorted(pts))


def _asymptotic_caveat(f: PiecewiseFn) -> Optional[str]:
    """Caveat for finite stages of a fat-removal construction.

    A finite stage always has a finite interval union for its zero set,
    so a witness exists; but when the schedule keeps positive measure in
    the limit, the limiting zero set is not essentially open and the
    finite-stage witness says nothing about the function being modeled.
    """
    if f.cantor_stage is None:
        return None
    sched = f.schedule if f.schedule is not None else RemovalSchedule.default()
    lim = sched.limit_measure()
    if lim > 0:
        return (
            "finite-stage witness only: the removal schedule keeps measure "
            "%s in the limit, where the zero set stops being essentially open"
            % lim
        )
    return None


# -- individual criteria ---------------------------------------------------------


def check_derivative_nonzero(f: PiecewiseFn) -> CriterionResult:
    """Passes when the exact derivative-zero set is null.

    No monotonicity or invertibility is required.  Raises
    MetadataMissing when a piece cannot supply its zero set.
    """
    zero = f.derivative_zero_set()
    m = zero.measure()
    if m == 0:
        return CriterionResult(
            Criterion.DERIVATIVE_NONZERO,
            True,
            "derivative-zero set is null",
            witness=zero,
            measure=m,
        )
    return CriterionResult(
        Criterion.DERIVATIVE_NONZERO,
        False,
        "derivative-zero set has measure %s" % m,
        witness=zero,
        measure=m,
    )


def check_sf_null(
    f: PiecewiseFn,
    grid=None,
    deltas=DEFAULT_DELTAS,
    zero_tol=DEFAULT_ZERO_TOL,
) -> CriterionResult:
    """Null stationary set, certified from metadata when possible.

    When the function class supplies its exact stationary set the answer
    is certified either way.  Otherwise a grid scan produces a proxy
    measure that is explicitly heuristic: it can pass the check, but a
    heuristic pass never backs a guarantee.
    """
    stationary = getattr(f, "stationary_set", None)
    exact = None
    if callable(stationary):
        try:
            exact = stationary()
        except ComposureError:
            exact = None
    if exact is not None:
        m = exact.measure()
        if m == 0:
            return CriterionResult(
                Criterion.SF_NULL,
                True,
                "stationary set is null (exact from metadata)",
                witness=exact,
                measure=m,
            )
        return CriterionResult(
            Criterion.SF_NULL,
            False,
            "stationary set has measure %s" % m,
            witness=exact,
            measure=m,
        )
    if grid is None:
        grid = uniform_grid(f.domain.lo, f.domain.hi, 64)
    try:
        report = sf_scan(f, grid, deltas, zero_tol, domain=(f.domain.lo, f.domain.hi))
    except ComposureError as exc:
        return CriterionResult(
            Criterion.SF_NULL,
            False,
            "no metadata and the scan is unavailable (%s)" % exc,
            certified=False,
        )
    proxy = report.flagged_measure_proxy
    if report.flagged:
        reason = "heuristic: scan flagged %d points, proxy measure %s" % (
            len(report.flagged),
            proxy,
        )
    else:
        reason = "heuristic: scan flagged no points (sampling cannot certify)"
    return CriterionResult(
        Criterion.SF_NULL,
        not report.flagged,
        reason,
        witness=report,
        measure=proxy,
        certified=False,
    )


def _open_zero_set_result(f: PiecewiseFn, criterion: Criterion, tv) -> CriterionResult:
    # shared core of the two essentially-open-zero-set criteria
    if f.has_singular_stub():
        raise SingularPartPresent(
            "declared singular stub: the singular part does not vanish"
        )
    fa, fs, fj = f.bv_decompose()
    if not fs.is_identically_zero():
        raise SingularPartPresent("singular part of the decomposition is nonzero")
    zero = f.derivative_zero_set()
    marked = MarkedSet.of(zero)
    opens = essential_open_witness(marked)
    if not verify_witness(marked, opens):
        return CriterionResult(
            criterion,
            False,
            "no verified essential-openness witness for the zero set",
            measure=zero.measure(),
        )
    witness = OpenZeroSetWitness(zero, opens, fa, fj, tv)
    caveat = _asymptotic_caveat(f)
    if caveat is not None:
        return CriterionResult(
            criterion,
            False,
            caveat,
            witness=witness,
            measure=zero.measure(),
            notes=("the stage-level witness itself verifies",),
        )
    return CriterionResult(
        criterion,
        True,
        "zero set is essentially open and the singular part vanishes",
        witness=witness,
        measure=zero.measure(),
    )


def check_ess_open_zeroset(f: PiecewiseFn) -> CriterionResult:
    """Continuous-plus-step split with an essentially open zero set.

    f must decompose with vanishing singular part (the jump part is a
    step function, hence has countable image); the exact derivative-zero
    set, constant stretches included, must admit a witness that
    verifies.  Raises SingularPartPresent when the singular part is
    nonzero, which the verdict routes to a failure for this criterion.
    """
    return _open_zero_set_result(f, Criterion.ESS_OPEN_ZEROSET, None)


def check_bv_jump_only(f: PiecewiseFn) -> CriterionResult:
    """Bounded variation on an interval with only jump discontinuities.

    The domain is an interval by construction; bounded variation is
    confirmed by computing the total variation, and the rest coincides
    with the essentially-open-zero-set check: no singular part, zero set
    essentially open.
    """
    tv = f.total_variation()
    return _open_zero_set_result(f, Criterion.BV_JUMP_ONLY, tv)


def check_inverse_ac(f: PiecewiseFn) -> CriterionResult:
    """Strictly increasing with a null derivative-zero set.

    Both facts must come from piece metadata: the monotonicity
    certificate from branch directions and jump signs, the zero set
    exactly.  Together they make the inverse absolutely continuous.
    """
    zero = f.derivative_zero_set()
    m = zero.measure()
    if not f.strictly_increasing_certified():
        return CriterionResult(
            Criterion.INVERSE_AC,
            False,
            "not certified strictly increasing from piece metadata",
            witness=zero,
            measure=m,
        )
    if m != 0:
        return CriterionResult(
            Criterion.INVERSE_AC,
            False,
            "derivative-zero set has measure %s" % m,
            witness=zero,
            measure=m,
        )
    return CriterionResult(
        Criterion.INVERSE_AC,
        True,
        "strictly increasing with a null derivative-zero set",
        witness=zero,
        measure=m,
    )


_CHECKS: Dict[Criterion, Callable[[PiecewiseFn], CriterionResult]] = {
    Criterion.DERIVATIVE_NONZERO: check_derivative_nonzero,
    Criterion.SF_NULL: check_sf_null,
    Criterion.ESS_OPEN_ZEROSET: check_ess_open_zeroset,
    Criterion.BV_JUMP_ONLY: check_bv_jump_only,
    Criterion.INVERSE_AC: check_inverse_ac,
}


# -- verdict ---------------------------------------------------------------------


def _random_domain_points(f: PiecewiseFn, count: int, seed: int):
    rng = random.Random(seed)
    lo, hi = f.domain.lo, f.domain.hi
    width = hi - lo
    scale = 2**32
    return [lo + width * Fraction(rng.randrange(scale + 1), scale) for _ in range(count)]


def _reverify(f: PiecewiseFn, res: CriterionResult, seed: int) -> bool:
    """Re-check a passing witness from scratch.

    Zero and stationary sets are re-measured exactly; essential-openness
    witnesses go through verify_witness again; decomposition handles are
    re-evaluated against f at 100 deterministic sample points.
    """
    w = res.witness
    if isinstance(w, IntervalSet):
        return w.measure() == 0
    if isinstance(w, OpenZeroSetWitness):
        marked = MarkedSet.of(w.zero_set)
        if not verify_witness(marked, w.opens):
            return False
        for x in _random_domain_points(f, 100, seed):
            lhs = _as_enclosure(f.evaluate(x))
            rhs = _as_enclosure(w.fa.evaluate(x)) + _as_enclosure(w.fj.evaluate(x))
            if not _difference_is_null(lhs, rhs):
                return False
        return True
    return False


def verdict(f: PiecewiseFn, *, all_criteria: bool = False, seed: int = 0) -> Verdict:
    """Try the criteria in fixed cost order and return the first guarantee.

    A criterion backs a guarantee only when its result is both passing
    and certified, and its witness survives re-verification.  Checks
    that raise report the exception as their failed hypothesis.  With
    ``all_criteria`` every check still runs and is reported, but the
    selected criterion stays the first passing one in order.
    """
    results = []
    winner: Optional[CriterionResult] = None
    for crit in CHECK_ORDER:
        if winner is not None and not all_criteria:
            break
        try:
            res = _CHECKS[crit](f)
        except ComposureError as exc:
            res = CriterionResult(
                crit, False, "%s: %s" % (type(exc).__name__, exc)
            )
        if winner is None and res.passed and res.certified:
            if _reverify(f, res, seed):
                winner = res
            else:
                res = replace(
                    res, passed=False, reason="witness failed re-verification"
                )
        results.append(res)
    if winner is not None:
        return Verdict(True, winner.criterion, winner.witness, tuple(results))
    return Verdict(False, None, None, tuple(results))


# -- sharpness -------------------------------------------------------------------


@dataclass(frozen=True)
class SharpnessReport:
    """f^{-1}(N) for a marked target, with both measures side by side.

    The interesting instances are the ones where a null target pulls
    back to positive measure: the effect the criteria are built to rule
    out, and the reason the whole question reduces to null-set
    preimages.
    """

    target: MarkedSet
    target_measure: Fraction
    preimage: PreimageResult
    preimage_measure: Fraction
    notes: Tuple[str, ...] = ()

    @property
    def fat_preimage(self) -> bool:
        return self.target_measure == 0 and self.preimage_measure > 0


def sharpness_demo(f: PiecewiseFn, n: MarkedSet) -> SharpnessReport:
    """Compute the exact preimage of a marked set and report its structure.

    Raises NotPiecewiseMonotone when a piece admits no monotone
    decomposition.  Inexact inversions are reported through the
    preimage's own notes; the preimage measure is then an outer bound.
    """
    target_set = n.effective()
    pre = f.preimage(target_set)
    notes = list(pre.notes)
    if not pre.exact and "preimage endpoints are outer brackets" not in notes:
        notes.append("preimage endpoints are outer brackets")
    return SharpnessReport(
        n,
        target_set.measure(),
        pre,
        pre.points.measure(),
        tuple(notes),
    )
