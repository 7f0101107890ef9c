"""Difference-quotient hulls, stationary-point scans, and slope strata.

The hull at scale delta is the convex hull (here: min/max with evaluation
error) of sampled quotients (f(y) - f(x)) / (y - x) over 0 < |y - x| < delta.
Shrinking delta gives a nested outer approximation of the generalized
derivative set at x.  Sampling alone cannot certify a hull for arbitrary
functions; functions that carry slope metadata (see the piecewise module)
get certified classifications, everything else is labeled heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .enclosure import BoundedReal
from .errors import (
    ComposureError,
    DomainError,
    IsolatedPoint,
    PreconditionUnmet,
    SamplerExhausted,
)
from .intervals import Interval, IntervalSet

_INF = math.inf

DEFAULT_DELTAS = tuple(Fraction(1, 2**k) for k in range(3, 21))
DEFAULT_ZERO_TOL = Fraction(1, 10**9)
DEFAULT_SAMPLES_PER_SIDE = 64
DEFAULT_OVERFLOW = Fraction(10**12)


def _as_bounded(v) -> BoundedReal:
    if isinstance(v, BoundedReal):
        return v
    return BoundedReal.exact(v)


def _evaluator(fn) -> Callable[[Fraction], BoundedReal]:
    if hasattr(fn, "value") and callable(fn.value):
        return lambda x: _as_bounded(fn.value(x))
    if hasattr(fn, "evaluate") and callable(fn.evaluate):
        return lambda x: _as_bounded(fn.evaluate(x))
    if callable(fn):
        return lambda x: _as_bounded(fn(x))
    raise DomainError("not an evaluable function: %r" % (fn,))


def _fn_domain(fn, override) -> Tuple:
    if override is not None:
        dom = override
    else:
        dom = getattr(fn, "domain", None)
    if dom is None:
        return (-_INF, _INF)
    if isinstance(dom, Interval):
        return (dom.lo, dom.hi)
    lo, hi = dom
    lo = lo if isinstance(lo, float) else Fraction(lo)
    hi = hi if isinstance(hi, float) else Fraction(hi)
    return (lo, hi)


@dataclass(frozen=True)
class QuotientHull:
    """Convex hull of sampled difference quotients at one scale.

    ``lo`` / ``hi`` are BoundedReal quotient enclosures, or the floats
    -inf / +inf when a quotient escaped the overflow threshold (the hull is
    taken in the extended reals).  ``samples`` counts quotients used.
    """

    delta: Fraction
    lo: object
    hi: object
    samples: int

    def lo_edge(self):
        """Outer lower edge (Fraction or -inf), evaluation error included."""
        if isinstance(self.lo, float):
            return self.lo
        return self.lo.lower()

    def hi_edge(self):
        if isinstance(self.hi, float):
            return self.hi
        return self.hi.upper()

    def width(self):
        lo, hi = self.lo_edge(), self.hi_edge()
        if isinstance(lo, float) or isinstance(hi, float):
            return _INF
        return hi - lo

    def touches_zero(self, zero_tol=DEFAULT_ZERO_TOL) -> bool:
        """True when the widened hull intersects [-zero_tol, zero_tol]."""
        zero_tol = Fraction(zero_tol)
        lo, hi = self.lo_edge(), self.hi_edge()
        lo_ok = lo <= zero_tol if not isinstance(lo, float) else lo < 0
        hi_ok = hi >= -zero_tol if not isinstance(hi, float) else hi > 0
        return lo_ok and hi_ok

    def contains_subset(self, other: "QuotientHull") -> bool:
        """Whether other's hull lies inside this one (edge comparison)."""
        slo, shi = self.lo_edge(), self.hi_edge()
        olo, ohi = other.lo_edge(), other.hi_edge()
        return slo <= olo and ohi <= shi


def _sample_offsets(deltas: Sequence[Fraction], per_side: int):
    """Shared offset pool: dyadic subdivisions of every ladder scale.

    The pool for a finer delta is a subset of the pool for a coarser one,
    which makes the resulting hulls nested by construction.
    """
    offs = set()
    for d in deltas:
        for j in range(1, per_side + 1):
            offs.add(d / 2**j)
    return sorted(offs, reverse=True)


def quotient_hull(
    fn,
    x,
    deltas: Sequence = DEFAULT_DELTAS,
    *,
    domain=None,
    samples_per_side: int = DEFAULT_SAMPLES_PER_SIDE,
    overflow=DEFAULT_OVERFLOW,
) -> List[QuotientHull]:
    """Quotient hulls at every ladder scale, coarsest first.

    deltas must be strictly decreasing and positive.  Raises IsolatedPoint
    when the domain admits no sample y with 0 < |y - x| < max(deltas),
    SamplerExhausted when every candidate evaluation failed.
    """
    x = Fraction(x)
    deltas = [Fraction(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas):
        raise DomainError("deltas must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    overflow = Fraction(overflow)

    ev = _evaluator(fn)
    dom_lo, dom_hi = _fn_domain(fn, domain)
    if not (dom_lo <= x <= dom_hi):
        raise DomainError("x = %s outside the function domain" % x)

    fx = ev(x)
    quotients = []  # (offset magnitude, BoundedReal quotient)
    attempted = 0
    for off in _sample_offsets(deltas, samples_per_side):
        for y in (x - off, x + off):
            if not (dom_lo <= y <= dom_hi):
                continue
            attempted += 1
            try:
                fy = ev(y)
            except ComposureError:
                continue
            diff = fy - fx
            q = BoundedReal(diff.value / (y - x), diff.err / abs(y - x))
            quotients.append((off, q))

    if attempted == 0:
        raise IsolatedPoint("no admissible sample point near %s" % x)
    if not quotients:
        raise SamplerExhausted("all %d candidate evaluations failed" % attempted)

    hulls = []
    for d in deltas:
        inside = [q for off, q in quotients if off < d]
        if not inside:
            raise IsolatedPoint("no admissible sample inside delta = %s" % d)
        lo = min(inside, key=lambda q: q.lower())
        hi = max(inside, key=lambda q: q.upper())
        lo_out = -_INF if lo.lower() < -overflow else lo
        hi_out = _INF if hi.upper() > overflow else hi
        hulls.append(QuotientHull(d, lo_out, hi_out, len(inside)))
    return hulls


# -- stationary-set scan -----------------------------------------------------


@dataclass(frozen=True)
class SfScanReport:
    """Grid scan for points whose finest hull reaches zero.

    flagged_measure_proxy covers each flagged point by its half-gap to the
    neighboring grid points and measures that union exactly.  It is an
    upper-bound heuristic unless ``certified`` says the function class
    supplied its exact stationary set.
    """

    grid: tuple
    flagged: tuple
    flagged_measure_proxy: Fraction
    zero_tol: Fraction
    certified: bool = False
    note: str = ""
    hulls: tuple = field(default=(), repr=False)

    @property
    def flagged_cover(self) -> IntervalSet:
        return _cover(self.grid, self.flagged)


def _cover(grid: tuple, flagged: tuple) -> IntervalSet:
    if not flagged:
        return IntervalSet.empty()
    pts = sorted(grid)
    radii = {}
    for i, g in enumerate(pts):
        left = (g - pts[i - 1]) / 2 if i else None
        right = (pts[i + 1] - g) / 2 if i + 1 < len(pts) else None
        r = min(r for r in (left, right) if r is not None) if len(pts) > 1 else Fraction(1, 2)
        radii[g] = r
    return IntervalSet(
        [Interval(g - radii[g], g + radii[g], True, True) for g in flagged]
    )


def sf_scan(
    fn,
    grid: Sequence,
    deltas: Sequence = DEFAULT_DELTAS,
    zero_tol=DEFAULT_ZERO_TOL,
    *,
    domain=None,
    samples_per_side: int = DEFAULT_SAMPLES_PER_SIDE,
) -> SfScanReport:
    """Flag grid points whose finest widened hull intersects [-tol, tol].

    Points where the hull computation degenerates (IsolatedPoint) are
    flagged conservatively: stationarity cannot be excluded there.
    """
    grid = tuple(Fraction(g) for g in grid)
    zero_tol = Fraction(zero_tol)
    flagged = []
    finest = []
    for g in grid:
        try:
            hulls = quotient_hull(
                fn, g, deltas, domain=domain, samples_per_side=samples_per_side
            )
        except (IsolatedPoint, SamplerExhausted):
            flagged.append(g)
            finest.append(None)
            continue
        h = hulls[-1]
        finest.append(h)
        if h.touches_zero(zero_tol):
            flagged.append(g)

    certified = False
    note = "proxy measure is a grid-cover upper bound, not certified"
    # the stationary set is the right certified object: it includes points
    # where the hull straddles zero across a corner or jump, which a plain
    # derivative zero set misses
    stationary = getattr(fn, "stationary_set", None)
    if callable(stationary):
        try:
            exact = stationary()
        except ComposureError:
            exact = None
        if exact is not None:
            certified = True
            note = "function class supplied an exact stationary set"
            proxy = exact.measure()
            return SfScanReport(
                grid, tuple(flagged), proxy, zero_tol, certified, note, tuple(finest)
            )
    proxy = _cover(grid, tuple(flagged)).measure()
    return SfScanReport(
        grid, tuple(flagged), proxy, zero_tol, certified, note, tuple(finest)
    )


# -- slope strata ------------------------------------------------------------


def en_classify(
    fn,
    x,
    n: int,
    *,
    domain=None,
    samples_per_side: int = DEFAULT_SAMPLES_PER_SIDE,
) -> bool:
    """Whether every sampled quotient within 1/n of x strictly exceeds 1/n.

    When the function exposes ``min_slope_lower_bound(lo, hi)`` (the
    piecewise class does), a bound above the threshold certifies
    membership outright; an inconclusive bound falls back to the
    sampled check with enclosure margins.
    """
    x = Fraction(x)
    if n < 1:
        raise DomainError("stratum index must be >= 1")
    radius = Fraction(1, n)
    thresh = Fraction(1, n)

    min_slope = getattr(fn, "min_slope_lower_bound", None)
    if callable(min_slope):
        dom_lo, dom_hi = _fn_domain(fn, domain)
        lo = max(x - radius, dom_lo)
        hi = min(x + radius, dom_hi)
        try:
            bound = min_slope(lo, hi)
        except ComposureError:
            bound = None
        # the metadata bound can prove membership outright; when it is
        # inconclusive the sampled check below still decides
        if bound is not None and Fraction(bound) > thresh:
            return True

    deltas = [radius]
    try:
        hull = quotient_hull(
            fn, x, deltas, domain=domain, samples_per_side=samples_per_side
        )[0]
    except IsolatedPoint as exc:
        raise SamplerExhausted(str(exc)) from exc
    lo = hull.lo_edge()
    if isinstance(lo, float):
        return lo > 0  # -inf fails, +inf cannot occur as a lower edge
    return lo > thresh


@dataclass(frozen=True)
class LipschitzInverseReport:
    """Pairwise check of |x - y| < k |f(x) - f(y)| on a point cloud."""

    k: int
    pairs_checked: int
    violations: tuple
    unresolved: tuple

    @property
    def holds(self) -> bool:
        return not self.violations and not self.unresolved


def lipschitz_inverse_check(
    fn,
    points: Sequence,
    k: int,
    *,
    domain=None,
    check_membership: bool = True,
) -> LipschitzInverseReport:
    """Verify the inverse-Lipschitz inequality on every pair of points.

    Precondition: pairwise spacing < 1/k (PreconditionUnmet otherwise) and,
    when check_membership is set, every point passes en_classify(fn, x, k).
    A pair is a violation when k * |f(x) - f(y)| is certifiably <= |x - y|,
    unresolved when the enclosure cannot decide.
    """
    pts = [Fraction(p) for p in points]
    if k < 1:
        raise DomainError("k must be >= 1")
    spacing = Fraction(1, k)
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            if abs(a - b) >= spacing:
                raise PreconditionUnmet(
                    "points %s and %s are %s apart, not < 1/%d"
                    % (a, b, abs(a - b), k)
                )
    if check_membership:
        for p in pts:
            if not en_classify(fn, p, k, domain=domain):
                raise PreconditionUnmet(
                    "point %s fails the slope-stratum check for n = %d" % (p, k)
                )

    ev = _evaluator(fn)
    values = [ev(p) for p in pts]
    violations = []
    unresolved = []
    checked = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                continue
            checked += 1
            gap = abs(pts[i] - pts[j])
            dv = abs(values[i] - values[j])
            if k * dv.lower() > gap:
                continue
            if k * dv.upper() <= gap:
                violations.append((pts[i], pts[j]))
            else:
                unresolved.append((pts[i], pts[j]))
    return LipschitzInverseReport(k, checked, tuple(violations), tuple(unresolved))
