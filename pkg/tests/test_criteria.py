"""Tests for the guarantee criteria and the combined verdict."""

from fractions import Fraction

import pytest

from composure import (
    CHECK_ORDER,
    Criterion,
    IntervalSet,
    MarkedSet,
    RemovalSchedule,
    abs_fn,
    cantor_bump_fn,
    cantor_endpoint_grid,
    cantor_integral_fn,
    cantor_stub_fn,
    check_bv_jump_only,
    check_derivative_nonzero,
    check_ess_open_zeroset,
    check_inverse_ac,
    check_sf_null,
    closed,
    const_fn,
    cubic_drift_fn,
    cubic_fn,
    heaviside_fn,
    identity_fn,
    open_iv,
    parse_fn_spec,
    point,
    sharpness_demo,
    square_fn,
    uniform_grid,
    verdict,
)
from composure import criteria
from composure.criteria import CriterionResult

F = Fraction

MIXED_STEEP = "piecewise [0,1]: [0,1/2) poly 0 0 0 1; [1/2,1] affine -1 1"


# --- grids --------------------------------------------------------------------

class TestGrids:
    def test_uniform_grid(self):
        g = uniform_grid(F(-1), F(1), 4)
        assert g == (F(-1), F(-1, 2), F(0), F(1, 2), F(1))
        assert len(uniform_grid(F(0), F(1), 255)) == 256

    def test_uniform_grid_validation(self):
        with pytest.raises(Exception):
            uniform_grid(F(1), F(0), 4)

    def test_cantor_endpoint_grid(self):
        assert cantor_endpoint_grid(1) == (F(0), F(3, 8), F(5, 8), F(1))
        g2 = cantor_endpoint_grid(2)
        assert len(g2) == 8
        assert F(5, 32) in g2

    def test_cantor_endpoint_grid_custom_schedule(self):
        sched = RemovalSchedule.geometric(F(1, 8), F(1, 8))
        assert F(7, 16) in cantor_endpoint_grid(1, sched)


# --- individual criteria --------------------------------------------------------

class TestDerivativeNonzero:
    def test_cubic_passes_with_null_zero_set(self):
        r = check_derivative_nonzero(cubic_fn())
        assert r.passed and r.certified
        assert r.measure == 0
        assert r.witness == IntervalSet.of(point(F(0)))

    def test_const_fails_with_full_measure(self):
        r = check_derivative_nonzero(const_fn(F(3)))
        assert not r.passed
        assert r.measure == 1

    def test_mixed_steep_pieces_pass(self):
        # x^3 then a slope -1 ramp: the only derivative zero is the origin
        r = check_derivative_nonzero(parse_fn_spec(MIXED_STEEP))
        assert r.passed
        assert r.witness == IntervalSet.of(point(F(0)))

    def test_bump_stage_fails_with_exact_measure(self):
        r = check_derivative_nonzero(cantor_bump_fn(3))
        assert not r.passed
        assert r.measure == F(9, 16)


class TestSfNull:
    def test_drift_certified_empty(self):
        r = check_sf_null(cubic_drift_fn())
        assert r.passed and r.certified
        assert r.measure == 0
        assert "metadata" in r.reason

    def test_corner_point_is_null(self):
        r = check_sf_null(abs_fn())
        assert r.passed and r.certified
        assert r.witness == IntervalSet.of(point(F(0)))

    def test_bump_stage_fails(self):
        r = check_sf_null(cantor_bump_fn(2))
        assert not r.passed
        assert r.measure == F(5, 8)

    def test_heuristic_fallback_is_uncertified(self):
        # irrational critical points defeat the exact stationary set, so
        # the check falls back to the sampled hull scan
        f = parse_fn_spec("piecewise [-1,1]: [-1,1] poly 0 -1 0 1")
        r = check_sf_null(f, grid=uniform_grid(F(-1), F(1), 16))
        assert not r.certified
        assert r.reason.startswith("heuristic")

    def test_heuristic_pass_never_backs_a_guarantee(self):
        # the scan misses the two irrational stationary points of x^3 - x,
        # so the check passes, but uncertified evidence must not win
        f = parse_fn_spec("piecewise [-1,1]: [-1,1] poly 0 -1 0 1")
        r = check_sf_null(f, grid=uniform_grid(F(-1), F(1), 16))
        assert r.passed and not r.certified
        v = verdict(f, all_criteria=True)
        assert not v.guaranteed
        assert v.result_for(Criterion.SF_NULL).passed


class TestEssOpenZeroset:
    def test_const_full_zero_set(self):
        r = check_ess_open_zeroset(const_fn(F(3)))
        assert r.passed
        w = r.witness
        assert w.zero_set == IntervalSet.of(closed(0, 1))
        assert w.opens.U == IntervalSet.of(open_iv(0, 1))
        assert w.opens.V.is_empty
        assert w.opens.W == IntervalSet.of(point(F(0)), point(F(1)))
        assert w.fj.is_zero()

    def test_heaviside_passes(self):
        r = check_ess_open_zeroset(heaviside_fn())
        assert r.passed
        assert r.measure == 1
        assert r.witness.fj is not None

    def test_stub_routed_as_singular(self):
        from composure import SingularPartPresent

        with pytest.raises(SingularPartPresent):
            check_ess_open_zeroset(cantor_stub_fn())

    def test_finite_stage_caveat_fails_bump(self):
        r = check_ess_open_zeroset(cantor_bump_fn(3))
        assert not r.passed
        assert r.measure == F(9, 16)
        assert "finite-stage witness only" in r.reason
        assert any("stage-level witness" in n for n in r.notes)

    def test_caveat_scales_with_schedule(self):
        sched = RemovalSchedule.geometric(F(1, 8), F(1, 8))
        r = check_ess_open_zeroset(cantor_bump_fn(2, sched))
        assert not r.passed
        assert "5/6" in r.reason


class TestBvJumpOnly:
    def test_heaviside_passes_with_variation(self):
        r = check_bv_jump_only(heaviside_fn())
        assert r.passed
        assert r.witness.total_variation == 1
        assert r.witness.fj.jumps == ((F(1, 2), F(1), F(0)),)

    def test_spike_passes(self):
        r = check_bv_jump_only(parse_fn_spec("piecewise [0,1]: [0,1] const 0 @1/2=3"))
        assert r.passed
        assert r.witness.total_variation == 6

    def test_stub_routed_as_singular(self):
        from composure import SingularPartPresent

        with pytest.raises(SingularPartPresent):
            check_bv_jump_only(cantor_stub_fn())


class TestInverseAc:
    def test_strictly_increasing_with_null_zero_set(self):
        assert check_inverse_ac(cubic_fn()).passed
        assert check_inverse_ac(square_fn()).passed
        assert check_inverse_ac(identity_fn()).passed

    def test_jump_fails_certification(self):
        r = check_inverse_ac(heaviside_fn())
        assert not r.passed
        assert "strictly increasing" in r.reason

    def test_plateau_fails(self):
        assert not check_inverse_ac(cantor_integral_fn(1)).passed


# --- the verdict ------------------------------------------------------------

class TestVerdict:
    def test_first_win_stops_by_default(self):
        v = verdict(cubic_fn())
        assert v.guaranteed
        assert v.criterion == Criterion.DERIVATIVE_NONZERO
        assert len(v.results) == 1
        assert v.witness is v.results[0].witness

    def test_all_criteria_reports_everything(self):
        v = verdict(cubic_fn(), all_criteria=True)
        assert v.guaranteed
        assert v.criterion == Criterion.DERIVATIVE_NONZERO
        assert len(v.results) == len(CHECK_ORDER)
        assert v.result_for(Criterion.INVERSE_AC).passed

    def test_const_wins_on_essential_openness(self):
        v = verdict(const_fn(F(3)))
        assert v.guaranteed
        assert v.criterion == Criterion.ESS_OPEN_ZEROSET
        assert [r.criterion for r in v.results] == [
            Criterion.DERIVATIVE_NONZERO,
            Criterion.SF_NULL,
            Criterion.ESS_OPEN_ZEROSET,
        ]

    def test_heaviside_guaranteed(self):
        v = verdict(heaviside_fn())
        assert v.guaranteed
        assert v.criterion == Criterion.ESS_OPEN_ZEROSET

    def test_bump_stage_no_guarantee(self):
        v = verdict(cantor_bump_fn(3), all_criteria=True)
        assert not v.guaranteed
        assert v.criterion is None
        assert v.witness is None
        assert len(v.failures()) == len(CHECK_ORDER)
        assert v.result_for(Criterion.DERIVATIVE_NONZERO).measure == F(9, 16)
        assert v.result_for(Criterion.SF_NULL).measure == F(9, 16)

    def test_stub_no_guarantee_with_exception_reasons(self):
        v = verdict(cantor_stub_fn(), all_criteria=True)
        assert not v.guaranteed
        reasons = {r.criterion: r.reason for r in v.results}
        assert reasons[Criterion.ESS_OPEN_ZEROSET].startswith("SingularPartPresent")
        assert reasons[Criterion.DERIVATIVE_NONZERO].startswith("MetadataMissing")

    def test_deterministic_across_runs(self):
        for f in (cubic_fn(), heaviside_fn(), cantor_bump_fn(2), cantor_stub_fn()):
            a = verdict(f, all_criteria=True)
            b = verdict(f, all_criteria=True)
            assert a.guaranteed == b.guaranteed
            assert a.criterion == b.criterion
            assert [
                (r.criterion, r.passed, r.reason, r.measure) for r in a.results
            ] == [(r.criterion, r.passed, r.reason, r.measure) for r in b.results]

    def test_result_for_missing_criterion(self):
        v = verdict(cubic_fn())
        assert v.result_for(Criterion.BV_JUMP_ONLY) is None

    def test_tampered_witness_rejected(self, monkeypatch):
        # a check that returns a fat "null" witness must be caught by the
        # re-verification pass and demoted to a failure
        def bogus(f):
            return CriterionResult(
                criterion=Criterion.DERIVATIVE_NONZERO,
                passed=True,
                reason="forged",
                witness=IntervalSet.of(closed(0, 1)),
                measure=F(0),
                certified=True,
            )

        monkeypatch.setitem(criteria._CHECKS, Criterion.DERIVATIVE_NONZERO, bogus)
        v = verdict(cubic_fn(), all_criteria=True)
        demoted = v.result_for(Criterion.DERIVATIVE_NONZERO)
        assert not demoted.passed
        assert "re-verification" in demoted.reason
        # the genuine later criteria still rescue the verdict
        assert v.guaranteed
        assert v.criterion != Criterion.DERIVATIVE_NONZERO


class TestOrderingInvariants:
    POOL = (
        identity_fn(),
        cubic_fn(),
        cubic_drift_fn(),
        abs_fn(),
        parse_fn_spec(MIXED_STEEP),
        square_fn(),
    )

    def test_derivative_nonzero_implies_sf_null(self):
        # soundness ordering: a pass of the strongest pointwise criterion
        # forces a certified pass of the stationary-set criterion
        for f in self.POOL:
            if check_derivative_nonzero(f).passed:
                r = check_sf_null(f)
                assert r.passed and r.certified, f.label

    def test_adding_a_stub_never_improves_the_verdict(self):
        base = "piecewise [0,1]: [0,1/2) affine 1 0; [1/2,1] affine 1 0"
        stubbed = (
            "piecewise [0,1]: [0,1/2) affine 1 0; "
            "[1/2,1] stub cantor-function 1/2 0 1 1 1"
        )
        assert verdict(parse_fn_spec(base)).guaranteed
        assert not verdict(parse_fn_spec(stubbed)).guaranteed


# --- sharpness ----------------------------------------------------------------

class TestSharpness:
    def test_jump_preimage_is_fat(self):
        rep = sharpness_demo(heaviside_fn(), MarkedSet.of(IntervalSet.of(point(F(1)))))
        assert rep.target_measure == 0
        assert rep.preimage_measure == F(1, 2)
        assert rep.fat_preimage
        assert rep.preimage.points == IntervalSet.of(closed(F(1, 2), 1))
        assert rep.preimage.exact

    def test_steep_preimage_is_thin(self):
        f = parse_fn_spec("piecewise [0,1]: [0,1] affine 2 0")
        rep = sharpness_demo(f, MarkedSet.of(IntervalSet.of(point(F(0)))))
        assert rep.target_measure == 0
        assert rep.preimage_measure == 0
        assert not rep.fat_preimage

    def test_plateau_preimage_is_fat(self):
        rep = sharpness_demo(
            cantor_integral_fn(1), MarkedSet.of(IntervalSet.of(point(F(0))))
        )
        assert rep.target_measure == 0
        assert rep.preimage_measure >= F(3, 8)
        assert rep.fat_preimage
