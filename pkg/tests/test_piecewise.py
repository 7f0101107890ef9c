"""Tests for piecewise BV functions: evaluation, decomposition, inversion."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from composure import (
    BoundedReal,
    DomainError,
    Interval,
    IntervalSet,
    MetadataMissing,
    NotPiecewiseMonotone,
    PiecewiseFn,
    StepFn,
    StubPiece,
    abs_fn,
    cantor_bump_fn,
    cantor_integral_fn,
    cantor_stub_fn,
    closed,
    const_fn,
    cubic_drift_fn,
    cubic_fn,
    format_fn_spec,
    heaviside_fn,
    identity_fn,
    open_iv,
    parse_fn_spec,
    point,
    square_fn,
    svc_stage,
)
from composure.piecewise import AffinePiece, ConstPiece, PolyPiece, PowerPiece

F = Fraction

UNIT = Interval(F(0), F(1), True, True)


def spans(*bounds):
    """Left-closed spans tiling [bounds[0], bounds[-1]], last one closed."""
    out = []
    for i, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        last = i == len(bounds) - 2
        out.append(Interval(F(lo), F(hi), True, last))
    return tuple(out)


# --- construction validation ------------------------------------------------

class TestConstruction:
    def test_domain_must_be_closed_bounded(self):
        with pytest.raises(DomainError):
            PiecewiseFn(Interval(F(0), F(1), True, False), spans(0, 1), (ConstPiece(F(0)),))
        with pytest.raises(DomainError):
            PiecewiseFn(
                Interval(F(0), float("inf"), True, False),
                (Interval(F(0), float("inf"), True, False),),
                (ConstPiece(F(0)),),
            )

    def test_span_piece_count_mismatch(self):
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, spans(0, F(1, 2), 1), (ConstPiece(F(0)),))

    def test_spans_must_tile_exactly(self):
        # gap between spans
        bad = (Interval(F(0), F(1, 4), True, False), Interval(F(1, 2), F(1), True, True))
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, bad, (ConstPiece(F(0)), ConstPiece(F(1))))
        # overlap
        bad = (Interval(F(0), F(3, 4), True, True), Interval(F(1, 2), F(1), True, True))
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, bad, (ConstPiece(F(0)), ConstPiece(F(1))))
        # protrudes past the domain
        bad = (Interval(F(0), F(3, 2), True, True),)
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, bad, (ConstPiece(F(0)),))

    def test_breakpoint_owned_exactly_once(self):
        # both spans closed at 1/2
        bad = (Interval(F(0), F(1, 2), True, True), Interval(F(1, 2), F(1), True, True))
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, bad, (ConstPiece(F(0)), ConstPiece(F(1))))
        # neither span covers 1/2
        bad = (Interval(F(0), F(1, 2), True, False), Interval(F(1, 2), F(1), False, True))
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, bad, (ConstPiece(F(0)), ConstPiece(F(1))))

    def test_assigned_point_validation(self):
        pieces = (ConstPiece(F(0)),)
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, spans(0, 1), pieces, assigned=((F(2), F(1)),))
        with pytest.raises(DomainError):
            PiecewiseFn(
                UNIT, spans(0, 1), pieces, assigned=((F(1, 2), F(1)), (F(1, 2), F(2)))
            )

    def test_assigned_point_inside_stub_rejected(self):
        stub = cantor_stub_fn()
        piece = stub.pieces[0]
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, spans(0, 1), (piece,), assigned=((F(1, 2), F(0)),))

    def test_stub_endpoints_must_match_span(self):
        stub = cantor_stub_fn()
        piece = stub.pieces[0]
        half = Interval(F(0), F(1, 2), True, False)
        rest = Interval(F(1, 2), F(1), True, True)
        with pytest.raises(DomainError):
            PiecewiseFn(UNIT, (half, rest), (piece, ConstPiece(F(1))))

    def test_enclosure_jump_straddling_zero_is_continuous(self):
        a = ConstPiece(BoundedReal(F(1), F(1, 10**6)))
        b = ConstPiece(BoundedReal(F(1), F(1, 10**6)))
        f = PiecewiseFn(UNIT, spans(0, F(1, 2), 1), (a, b))
        assert f.jump_at(F(1, 2)) == (F(0), F(0))
        assert f.jump_part().is_zero()

    def test_enclosure_jump_definitely_nonzero_rejected(self):
        a = ConstPiece(BoundedReal(F(1), F(1, 10**6)))
        c = ConstPiece(BoundedReal(F(2), F(1, 10**6)))
        f = PiecewiseFn(UNIT, spans(0, F(1, 2), 1), (a, c))
        with pytest.raises(DomainError):
            f.jump_at(F(1, 2))


# --- evaluation and limits --------------------------------------------------

class TestEvaluate:
    def test_shorthand_values(self):
        assert identity_fn().evaluate(F(1, 3)) == F(1, 3)
        assert cubic_fn().evaluate(F(-1, 2)) == F(-1, 8)
        assert cubic_drift_fn().evaluate(F(1, 2)) == F(5, 8)
        assert square_fn().evaluate(F(3, 4)) == F(9, 16)
        assert abs_fn().evaluate(F(-1, 3)) == F(1, 3)
        assert heaviside_fn().evaluate(F(1, 4)) == 0
        assert heaviside_fn().evaluate(F(1, 2)) == 1

    def test_outside_domain_rejected(self):
        with pytest.raises(DomainError):
            identity_fn().evaluate(F(2))

    def test_assigned_point_overrides(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3")
        assert f.evaluate(F(1, 2)) == 3
        assert f.evaluate(F(1, 4)) == 0

    def test_limits_at_breakpoint(self):
        h = heaviside_fn()
        assert h.limit_left(F(1, 2)) == 0
        assert h.limit_right(F(1, 2)) == 1

    def test_limits_none_at_domain_ends(self):
        h = heaviside_fn()
        assert h.limit_left(F(0)) is None
        assert h.limit_right(F(1)) is None

    def test_limits_ignore_assigned_spike(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3")
        assert f.limit_left(F(1, 2)) == 0
        assert f.limit_right(F(1, 2)) == 0

    def test_piece_at_and_breakpoints(self):
        h = heaviside_fn()
        assert h.breakpoints == (F(1, 2),)
        assert isinstance(h.piece_at(F(1, 4)), ConstPiece)

    def test_power_piece(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] power 3 2 1/2 1")
        # c + s*(x - x0)^k = 1 + 2*(x - 1/2)^3
        assert f.evaluate(F(1, 2)) == 1
        assert f.evaluate(F(1)) == 1 + 2 * F(1, 8)
        assert f.evaluate(F(0)) == 1 - 2 * F(1, 8)


# --- jumps and step functions -----------------------------------------------

class TestStepFn:
    def test_running_sum_conventions(self):
        s = StepFn(((F(1, 2), F(3), F(-3)),))
        assert s.evaluate(F(1, 4)) == 0
        assert s.evaluate(F(1, 2)) == 3  # minus-jump counts at the point
        assert s.evaluate(F(3, 4)) == 0  # plus-jump counts after it

    def test_duplicate_points_rejected(self):
        with pytest.raises(DomainError):
            StepFn(((F(1, 2), F(1), F(0)), (F(1, 2), F(2), F(1))))

    def test_zero_jumps_dropped(self):
        s = StepFn(((F(1, 4), F(0), F(0)),))
        assert s.is_zero()
        assert s.points() == ()

    def test_total_variation(self):
        s = StepFn(((F(1, 4), F(1), F(-1)), (F(1, 2), F(0), F(2))))
        assert s.total_variation() == 4

    def test_spike_jump(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3")
        assert f.jump_at(F(1, 2)) == (F(3), F(-3))
        assert f.jump_part().jumps == ((F(1, 2), F(3), F(-3)),)

    def test_jump_at_smooth_point(self):
        assert cubic_fn().jump_at(F(1, 3)) == (F(0), F(0))


# --- BV decomposition -------------------------------------------------------

class TestBvDecompose:
    def test_heaviside(self):
        fa, fs, fj = heaviside_fn().bv_decompose()
        assert fa.is_identically_zero()
        assert fs.is_identically_zero()
        assert fj.jumps == ((F(1, 2), F(1), F(0)),)

    def test_continuous_fn_has_zero_jump_part(self):
        fa, fs, fj = cubic_fn().bv_decompose()
        assert fj.is_zero()
        assert fs.is_identically_zero()
        assert fa.evaluate(F(1, 2)) == F(1, 8)

    def test_affine_plus_staircase(self):
        f = parse_fn_spec(
            "piecewise [0,1]: [0,1/3) affine 1 0; [1/3,2/3) affine 1 1; [2/3,1] affine 1 2"
        )
        fa, fs, fj = f.bv_decompose()
        assert fs.is_identically_zero()
        assert fj.points() == (F(1, 3), F(2, 3))
        # identity at a spread of points, including the breakpoints
        for x in (F(0), F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(9, 10), F(1)):
            assert f.evaluate(x) == fa.evaluate(x) + fs.evaluate(x) + fj.evaluate(x)
        # the continuous part has no jumps of its own
        assert fa.jump_part().is_zero()

    def test_spike_decomposition(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3")
        fa, fs, fj = f.bv_decompose()
        assert fa.is_identically_zero()
        assert fj.evaluate(F(1, 2)) == 3
        assert fj.evaluate(F(3, 4)) == 0
        assert f.total_variation() == 6

    def test_stub_owns_singular_part(self):
        f = cantor_stub_fn()
        fa, fs, fj = f.bv_decompose()
        assert fs.has_singular_stub()
        assert fj.is_zero()
        assert fa.is_identically_zero()


# --- total variation ----------------------------------------------------------

class TestTotalVariation:
    def test_reference_values(self):
        assert identity_fn().total_variation() == 1
        assert abs_fn().total_variation() == 2
        assert heaviside_fn().total_variation() == 1
        assert cubic_fn().total_variation() == 2
        assert cantor_stub_fn().total_variation() == 1

    def test_bump_variation_positive(self):
        tv = cantor_bump_fn(1).total_variation()
        assert tv.definitely_positive()
        # one bump of height 2^-4 * e^-1 rises and falls once
        assert tv.contains(2 * F(1, 16) * F("0.36787944117144232159552377016146086745"))


# --- preimages ----------------------------------------------------------------

class TestPreimage:
    def test_affine_exact(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] affine 2 0")
        r = f.preimage(IntervalSet.of(closed(0, 1)))
        assert r.exact
        assert r.points == IntervalSet.of(closed(0, F(1, 2)))

    def test_poly_square_exact(self):
        f = parse_fn_spec("piecewise [-1,1]: [-1,1] poly 0 0 1")
        r = f.preimage(IntervalSet.of(closed(0, F(1, 4))))
        assert r.exact
        assert r.points == IntervalSet.of(closed(F(-1, 2), F(1, 2)))

    def test_power_rational_root_exact(self):
        r = square_fn().preimage(IntervalSet.of(closed(0, F(1, 4))))
        assert r.exact
        assert r.points == IntervalSet.of(closed(0, F(1, 2)))

    def test_heaviside_level_set(self):
        r = heaviside_fn().preimage(IntervalSet.of(point(F(1))))
        assert r.exact
        assert r.points == IntervalSet.of(closed(F(1, 2), 1))
        r0 = heaviside_fn().preimage(IntervalSet.of(point(F(1, 2))))
        assert r0.points.is_empty

    def test_irrational_endpoint_bracketed(self):
        r = cubic_fn().preimage(IntervalSet.of(point(F(1, 3))))
        assert not r.exact
        assert "certified bracket" in " ".join(r.notes)
        assert r.points.measure() < F(1, 2**60)
        # the bracket must still contain the true cube root of 1/3
        lo = r.points.components[0].lo
        hi = r.points.components[0].hi
        assert lo**3 <= F(1, 3) <= hi**3

    def test_respects_unions(self):
        f = cubic_fn()
        t1 = IntervalSet.of(point(F(1, 8)))
        t2 = IntervalSet.of(closed(F(1, 2), F(1)))
        ru = f.preimage(t1.union(t2))
        r1, r2 = f.preimage(t1), f.preimage(t2)
        assert ru.points == r1.points.union(r2.points)

    def test_empty_target(self):
        r = cubic_fn().preimage(IntervalSet.empty())
        assert r.exact
        assert r.points.is_empty

    def test_monotonicity_required(self):
        f = parse_fn_spec("piecewise [-1,1]: [-1,1] poly 0 -1 0 1")  # x^3 - x
        with pytest.raises(NotPiecewiseMonotone):
            f.preimage(IntervalSet.of(point(F(0))))

    def test_stub_cannot_be_inverted(self):
        with pytest.raises(StubPiece):
            cantor_stub_fn().preimage(IntervalSet.of(point(F(1, 2))))

    def test_plateau_preimage_is_fat(self):
        f = cantor_integral_fn(1)
        r = f.preimage(IntervalSet.of(point(F(0))))
        assert r.points.measure() >= F(3, 8)
        assert r.points.contains(F(1, 4))


# --- derivative sets ----------------------------------------------------------

class TestDerivativeSets:
    def test_abs(self):
        assert abs_fn().derivative_zero_set().is_empty
        assert abs_fn().stationary_set() == IntervalSet.of(point(F(0)))

    def test_heaviside(self):
        h = heaviside_fn()
        dz = h.derivative_zero_set()
        assert dz == IntervalSet.of(
            Interval(F(0), F(1, 2), True, False), Interval(F(1, 2), F(1), False, True)
        )
        # the upward jump straddles zero slope on its sides
        assert h.stationary_set() == IntervalSet.of(closed(0, 1))

    def test_steep_functions_empty(self):
        assert cubic_drift_fn().derivative_zero_set().is_empty
        assert cubic_drift_fn().stationary_set().is_empty
        assert identity_fn().derivative_zero_set().is_empty

    def test_cubic_origin(self):
        assert cubic_fn().derivative_zero_set() == IntervalSet.of(point(F(0)))
        assert cubic_fn().stationary_set() == IntervalSet.of(point(F(0)))

    def test_cantor_bump_measures(self):
        f = cantor_bump_fn(2)
        dz = f.derivative_zero_set()
        stat = f.stationary_set()
        assert dz.measure() == F(5, 8)
        assert stat.measure() == F(5, 8)
        assert svc_stage(2).surviving.is_subset(dz)
        # gap centers are stationary points of the bump, off-center gap
        # points have nonzero slope
        assert stat.contains(F(1, 2))
        assert not dz.contains(F(7, 16))

    def test_spike_not_in_derivative_zero_set(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3")
        assert not f.derivative_zero_set().contains(F(1, 2))
        assert f.derivative_zero_set().measure() == 1

    def test_irrational_critical_points_raise(self):
        f = parse_fn_spec("piecewise [-1,1]: [-1,1] poly 0 -1 0 1")
        with pytest.raises(MetadataMissing):
            f.derivative_zero_set()


# --- slope metadata -----------------------------------------------------------

class TestSlopeMetadata:
    def test_affine_exact_bound(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] affine 2 1")
        assert f.min_slope_lower_bound(F(0), F(1)) == 2

    def test_window_restriction(self):
        assert cubic_fn().min_slope_lower_bound(F(1, 2), F(1)) == F(3, 4)
        assert cubic_fn().min_slope_lower_bound(F(-1), F(1)) == 0

    def test_downward_jump_gives_none(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1/2) const 1; [1/2,1] const 0")
        assert f.min_slope_lower_bound(F(0), F(1)) is None

    def test_stub_gives_none(self):
        assert cantor_stub_fn().min_slope_lower_bound(F(0), F(1)) is None

    def test_upward_jump_keeps_slope_floor(self):
        assert heaviside_fn().min_slope_lower_bound(F(0), F(1)) == 0

    def test_strictly_increasing_certified(self):
        assert identity_fn().strictly_increasing_certified()
        assert cubic_fn().strictly_increasing_certified()
        assert cubic_drift_fn().strictly_increasing_certified()
        assert square_fn().strictly_increasing_certified()
        assert not abs_fn().strictly_increasing_certified()
        assert not heaviside_fn().strictly_increasing_certified()
        assert not const_fn(F(2)).strictly_increasing_certified()
        assert not cantor_stub_fn().strictly_increasing_certified()


# --- mini-language ------------------------------------------------------------

class TestFnSpecs:
    ROUND_TRIPS = (
        "identity",
        "cubic",
        "cubic-drift",
        "square",
        "abs",
        "heaviside",
        "cantor-stub",
        "const 3/2 on [0,2]",
        "cantor-bump 2",
        "cantor-bump 2 1/8 1/8",
        "cantor-integral 1",
        "piecewise [0,1]: [0,1/2) affine 2 0; [1/2,1] power 3 1 1/2 1",
        "piecewise [-1,1]: [-1,0) poly 0 0 1; [0,1] const 0 @1/2=3",
    )

    @pytest.mark.parametrize("text", ROUND_TRIPS)
    def test_round_trip(self, text):
        f = parse_fn_spec(text)
        out = format_fn_spec(f)
        assert parse_fn_spec(out) == f

    def test_labels_survive(self):
        assert format_fn_spec(parse_fn_spec("cubic")) == "cubic"
        assert format_fn_spec(cantor_bump_fn(2)) == "cantor-bump 2"

    def test_parse_errors(self):
        bad = (
            "piecewise [0,1]: [0,2] const 0",
            "piecewise [0,1]: [0,1/2) const 0",
            "piecewise: const 0",
            "cubic on [0,2]",
            "piecewise [0,1]: [0,1] bogus 1",
            "piecewise [0,1]: [0,1] const",
            "",
        )
        for text in bad:
            with pytest.raises(DomainError):
                parse_fn_spec(text)

    def test_format_rejects_enclosure_assignment(self):
        f = PiecewiseFn(
            UNIT,
            spans(0, 1),
            (ConstPiece(F(0)),),
            assigned=((F(1, 2), BoundedReal(F(1, 3), F(1, 10**9))),),
        )
        with pytest.raises(DomainError):
            format_fn_spec(f)

    def test_schedule_shorthand_matches_constructor(self):
        from composure import RemovalSchedule

        f = parse_fn_spec("cantor-bump 2 1/8 1/8")
        g = cantor_bump_fn(2, RemovalSchedule.geometric(F(1, 8), F(1, 8)))
        assert f == g


# --- decomposition identity under random sampling ------------------------------

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@st.composite
def random_piecewise(draw):
    cuts = sorted(draw(st.sets(
        st.fractions(min_value=F(1, 8), max_value=F(7, 8), max_denominator=16),
        max_size=4,
    )))
    bounds = [F(0)] + list(cuts) + [F(1)]
    pieces = []
    for _ in range(len(bounds) - 1):
        kind = draw(st.sampled_from(("const", "affine", "poly")))
        if kind == "const":
            pieces.append(ConstPiece(draw(coeff)))
        elif kind == "affine":
            pieces.append(AffinePiece(draw(coeff), draw(coeff)))
        else:
            pieces.append(PolyPiece((draw(coeff), draw(coeff), draw(coeff))))
    return PiecewiseFn(UNIT, spans(*bounds), tuple(pieces))


@settings(max_examples=80, deadline=None)
@given(random_piecewise(), st.lists(
    st.fractions(min_value=0, max_value=1, max_denominator=64), max_size=8
))
def test_decomposition_identity(f, xs):
    fa, fs, fj = f.bv_decompose()
    assert fs.is_identically_zero()
    assert fa.jump_part().is_zero()
    for x in list(xs) + list(f.breakpoints) + [F(0), F(1)]:
        assert f.evaluate(x) == fa.evaluate(x) + fs.evaluate(x) + fj.evaluate(x)


@settings(max_examples=60, deadline=None)
@given(random_piecewise())
def test_variation_dominates_endpoint_spread(f):
    tv = f.total_variation()
    spread = abs(f.evaluate(F(1)) - f.evaluate(F(0)))
    if isinstance(tv, BoundedReal):
        assert tv.upper() >= spread
    else:
        assert tv >= spread
