"""Tests for difference-quotient hulls and the slope stratification."""

from fractions import Fraction

import pytest

from composure import (
    DomainError,
    IsolatedPoint,
    PreconditionUnmet,
    SamplerExhausted,
    abs_fn,
    cantor_integral_fn,
    const_fn,
    cubic_drift_fn,
    cubic_fn,
    en_classify,
    heaviside_fn,
    lipschitz_inverse_check,
    quotient_hull,
    sf_scan,
    square_fn,
    uniform_grid,
)
from composure import derivhull

F = Fraction
INF = float("inf")

DELTAS = tuple(F(1, 2**k) for k in range(3, 12))


def affine(x):
    return 2 * x + F(1, 3)


# --- quotient_hull ----------------------------------------------------------

class TestQuotientHull:
    def test_affine_hull_is_singleton(self):
        hulls = quotient_hull(affine, F(1, 7), DELTAS, domain=(F(0), F(1)))
        for h in hulls:
            assert h.lo_edge() == h.hi_edge() == 2
            assert h.width() == 0
            assert not h.touches_zero()

    def test_abs_corner_hull(self):
        hulls = quotient_hull(abs_fn(), F(0), DELTAS)
        for h in hulls:
            assert h.lo_edge() == -1
            assert h.hi_edge() == 1
            assert h.touches_zero()

    def test_square_vertex_shrinks_with_delta(self):
        # quotients of x^2 at 0 are the sampled offsets themselves
        hulls = quotient_hull(lambda x: x * x, F(0), DELTAS, domain=(F(-1), F(1)))
        for h in hulls:
            assert h.width() <= 2 * h.delta
            assert h.touches_zero()
        assert hulls[-1].width() < hulls[0].width()

    def test_hulls_nested(self):
        cases = [
            (cubic_fn(), F(1, 3)),
            (cubic_drift_fn(), F(0)),
            (abs_fn(), F(1, 5)),
            (heaviside_fn(), F(1, 2)),
        ]
        for fn, x in cases:
            hulls = quotient_hull(fn, x, DELTAS)
            for coarse, fine in zip(hulls, hulls[1:]):
                assert coarse.contains_subset(fine)

    def test_jump_hull_overflows(self):
        hulls = quotient_hull(heaviside_fn(), F(1, 2), DELTAS)
        h = hulls[-1]
        assert h.lo_edge() == 0
        assert h.hi_edge() == INF
        assert h.width() == INF
        assert h.touches_zero()

    def test_domain_clips_samples(self):
        # at the left endpoint only right offsets are admissible
        hulls = quotient_hull(abs_fn(), F(-1), DELTAS)
        for h in hulls:
            assert h.lo_edge() == h.hi_edge() == -1

    def test_deltas_validation(self):
        with pytest.raises(DomainError):
            quotient_hull(affine, F(0), (), domain=(F(0), F(1)))
        with pytest.raises(DomainError):
            quotient_hull(affine, F(0), (F(1, 4), F(1, 2)), domain=(F(0), F(1)))
        with pytest.raises(DomainError):
            quotient_hull(affine, F(0), (F(1, 4), F(0)), domain=(F(0), F(1)))

    def test_x_outside_domain(self):
        with pytest.raises(DomainError):
            quotient_hull(affine, F(2), DELTAS, domain=(F(0), F(1)))

    def test_isolated_point(self):
        with pytest.raises(IsolatedPoint):
            quotient_hull(affine, F(0), DELTAS, domain=(F(0), F(0)))

    def test_sampler_exhausted(self):
        def spiky(x):
            if x != F(1, 2):
                raise DomainError("only defined at 1/2")
            return F(0)

        with pytest.raises(SamplerExhausted):
            quotient_hull(spiky, F(1, 2), DELTAS, domain=(F(0), F(1)))

    def test_sample_counts_grow_with_delta(self):
        hulls = quotient_hull(affine, F(1, 2), DELTAS, domain=(F(0), F(1)))
        for coarse, fine in zip(hulls, hulls[1:]):
            assert coarse.samples >= fine.samples


# --- en_classify ------------------------------------------------------------

class TestEnClassify:
    def test_drift_everywhere_first_stratum(self):
        f = cubic_drift_fn()
        for x in (F(-1), F(-1, 2), F(0), F(1, 3), F(1)):
            assert en_classify(f, x, 1)

    def test_metadata_certifies_without_sampling(self, monkeypatch):
        # window [1/2, 1] has slope >= 3/4 > 1/4, so metadata alone decides
        f = cubic_fn()

        def boom(*a, **k):
            raise AssertionError("sampled despite a conclusive metadata bound")

        monkeypatch.setattr(derivhull, "quotient_hull", boom)
        assert en_classify(f, F(3, 4), 4)

    def test_sampled_fallback_decides(self, monkeypatch):
        # full-window metadata bound is exactly 1, inconclusive for n = 1
        f = cubic_drift_fn()
        calls = []
        real = derivhull.quotient_hull

        def counting(*a, **k):
            calls.append(a)
            return real(*a, **k)

        monkeypatch.setattr(derivhull, "quotient_hull", counting)
        assert en_classify(f, F(0), 1)
        assert calls

    def test_flat_functions_fail(self):
        assert not en_classify(const_fn(F(3)), F(1, 2), 2)
        assert not en_classify(abs_fn(), F(0), 2)

    def test_stratum_index_validation(self):
        with pytest.raises(DomainError):
            en_classify(cubic_fn(), F(0), 0)

    def test_plateau_point_fails(self):
        f = cantor_integral_fn(1)
        assert not en_classify(f, F(1, 8), 8)


# --- sf_scan ----------------------------------------------------------------

class TestSfScan:
    def test_certified_via_exact_stationary_set(self):
        rep = sf_scan(cubic_fn(), uniform_grid(F(-1), F(1), 8))
        assert rep.certified
        assert rep.flagged_measure_proxy == 0
        assert "exact stationary set" in rep.note
        assert F(0) in rep.flagged

    def test_heuristic_fallback_for_bare_callables(self):
        rep = sf_scan(lambda x: x**3, uniform_grid(F(-1), F(1), 8), domain=(F(-1), F(1)))
        assert not rep.certified
        assert "upper bound" in rep.note
        assert F(0) in rep.flagged
        assert rep.flagged_measure_proxy > 0

    def test_everything_flagged_for_const(self):
        grid = uniform_grid(F(0), F(1), 4)
        rep = sf_scan(lambda x: F(7), grid, domain=(F(0), F(1)))
        assert rep.flagged == grid
        # half-gap cover around each of the five points
        assert rep.flagged_measure_proxy == F(5, 4)
        assert rep.flagged_cover.contains(F(1, 2))

    def test_steep_points_not_flagged(self):
        rep = sf_scan(cubic_drift_fn(), uniform_grid(F(-1), F(1), 8))
        assert rep.flagged == ()
        assert rep.flagged_cover.is_empty

    def test_plateaus_flagged(self):
        f = cantor_integral_fn(1)
        rep = sf_scan(f, (F(0), F(3, 16), F(1, 2), F(13, 16), F(1)))
        assert rep.certified
        assert F(3, 16) in rep.flagged
        # flagging is conservative (enclosure noise can flag the steep gap
        # center), but the certified measure comes from the exact set,
        # which excludes the gap interior
        assert rep.flagged_measure_proxy == F(3, 4)
        assert not f.stationary_set().contains(F(1, 2))

    def test_hulls_align_with_grid(self):
        grid = uniform_grid(F(0), F(1), 4)
        rep = sf_scan(lambda x: 2 * x, grid, domain=(F(0), F(1)))
        assert len(rep.hulls) == len(grid)
        assert all(h is not None for h in rep.hulls)


# --- lipschitz_inverse_check ------------------------------------------------

class TestLipschitzInverse:
    def test_happy_path_on_steep_window(self):
        pts = [F(2, 3) + F(i, 100) for i in range(0, 30)]
        rep = lipschitz_inverse_check(cubic_fn(), pts, 1, domain=(F(2, 3), F(1)))
        assert rep.holds
        assert rep.violations == ()
        assert rep.unresolved == ()
        assert rep.pairs_checked == 30 * 29 // 2

    def test_spacing_precondition(self):
        with pytest.raises(PreconditionUnmet):
            lipschitz_inverse_check(cubic_drift_fn(), [F(0), F(1, 2)], 2)

    def test_membership_precondition(self):
        # plateau points are not in any stratum
        f = cantor_integral_fn(1)
        with pytest.raises(PreconditionUnmet):
            lipschitz_inverse_check(f, [F(1, 16), F(2, 16)], 8)

    def test_violations_without_membership_gate(self):
        f = const_fn(F(0), domain=None)
        pts = [F(0), F(1, 4), F(1, 2)]
        rep = lipschitz_inverse_check(f, pts, 1, check_membership=False)
        assert not rep.holds
        assert len(rep.violations) == 3
        assert rep.pairs_checked == 3

    def test_k_validation(self):
        with pytest.raises(DomainError):
            lipschitz_inverse_check(cubic_fn(), [F(0)], 0)
