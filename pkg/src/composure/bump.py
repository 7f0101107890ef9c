"""Certified calculus for the flat-ended bump and its Cantor-gap train.

The base bump is psi(x) = exp(-1/(1 - x^2)) on (-1, 1), extended by zero.
On each removed gap (a, b) of a fat Cantor stage we place the scaled copy

    h(x) = 2**(-1/(b-a)) * psi((2x - a - b) / (b - a)),

which vanishes to all orders at the gap endpoints, and integrate it from 0
to get a strictly increasing smooth function f that is flat on the
surviving set.  Everything here returns :class:`BoundedReal` enclosures:
exact rational scaling identities where possible, certified Simpson
quadrature with a proven fourth-derivative bound for the rest.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from fractions import Fraction
from typing import Dict

from .cantor import FatCantorStage, svc_stage
from .enclosure import (
    DEFAULT_PREC,
    BoundedReal,
    exp_enclosure,
    pow2_enclosure,
    sci_str,
)
from .errors import DomainError, PrecisionUnreachable
from .intervals import Interval

# -- the base bump ----------------------------------------------------------


def psi(x, prec: int = DEFAULT_PREC) -> BoundedReal:
    """Certified enclosure of exp(-1/(1 - x**2)) for |x| < 1."""
    x = Fraction(x)
    if abs(x) >= 1:
        raise DomainError("psi is defined on (-1, 1); use psi_or_zero outside")
    w = 1 - x * x
    lo, hi = exp_enclosure(Fraction(-1, 1) / w, prec)
    return BoundedReal.from_bounds(lo, hi)


def psi_or_zero(x, prec: int = DEFAULT_PREC) -> BoundedReal:
    """Total extension: exact 0 for |x| >= 1."""
    x = Fraction(x)
    if abs(x) >= 1:
        return BoundedReal.exact(0)
    return psi(x, prec)


# -- derivative polynomials -------------------------------------------------
#
# With w = 1 - x^2, the n-th derivative of psi is psi * P_n / w^(2n) where
# P_0 = 1 and P_{n+1} = w^2 P_n' + (4 n x w - 2 x) P_n.  Polynomials are
# dicts {power: rational coefficient}.


def _poly_add(p, q):
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, Fraction(0)) + c
        if out[e] == 0:
            del out[e]
    return out


def _poly_mul(p, q):
    out: Dict[int, Fraction] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = e1 + e2
            out[e] = out.get(e, Fraction(0)) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def _poly_diff(p):
    return {e - 1: c * e for e, c in p.items() if e > 0}


def _poly_eval(p, x: Fraction) -> Fraction:
    return sum((c * x**e for e, c in p.items()), Fraction(0))


_W = {0: Fraction(1), 2: Fraction(-1)}
_W2 = _poly_mul(_W, _W)
_PSI_POLYS = [{0: Fraction(1)}]


def psi_poly(n: int):
    """P_n in psi^(n) = psi * P_n / (1 - x^2)^(2n)."""
    if n < 0:
        raise DomainError("derivative order must be >= 0")
    while len(_PSI_POLYS) <= n:
        k = len(_PSI_POLYS) - 1
        p = _PSI_POLYS[-1]
        bracket = _poly_add(_poly_mul({1: Fraction(4 * k)}, _W), {1: Fraction(-2)})
        _PSI_POLYS.append(_poly_add(_poly_mul(_W2, _poly_diff(p)), _poly_mul(bracket, p)))
    return dict(_PSI_POLYS[n])


def psi_deriv(n: int, x, prec: int = DEFAULT_PREC) -> BoundedReal:
    """Certified enclosure of the n-th derivative of psi at |x| < 1."""
    x = Fraction(x)
    if abs(x) >= 1:
        raise DomainError("psi derivatives evaluated inside (-1, 1) only")
    w = 1 - x * x
    p = _poly_eval(psi_poly(n), x) / w ** (2 * n)
    base = psi(x, prec)
    return base * BoundedReal.exact(p)


# -- certified sup of |psi^(n)| --------------------------------------------
#
# |psi^(n)(x)| = G(1/w) * |P_n(x)| with G(u) = u^(2n) e^(-u), which rises to
# its single maximum at u = 2n and decays afterwards.  Branch-and-bound over
# x in [0, 1) (the absolute value is even) with that unimodal bound for G
# and a coefficient bound for |P_n| gives certified sup enclosures.

_PSI_SUP_CACHE: Dict[int, BoundedReal] = {}
PSI_SUP_MAX_ORDER = 4


def _g_hi(u: Fraction, n: int, prec: int) -> Fraction:
    _, ehi = exp_enclosure(-u, prec)
    return u ** (2 * n) * ehi


def _seg_upper(a: Fraction, b: Fraction, n: int, prec: int) -> Fraction:
    """Upper bound of |psi^(n)| over [a, b] subset of [0, 1]."""
    poly = psi_poly(n)
    # interval evaluation of P_n: x**e is increasing on [a, b] since a >= 0,
    # so each term's range is known from the endpoints; this converges to
    # |P_n(x)| as the segment shrinks, unlike a coefficient-sum bound
    p_lo = Fraction(0)
    p_hi = Fraction(0)
    for e, c in poly.items():
        t1, t2 = c * a**e, c * b**e
        if t1 > t2:
            t1, t2 = t2, t1
        p_lo += t1
        p_hi += t2
    pbound = max(abs(p_lo), abs(p_hi))
    peak = Fraction(2 * n)
    u_lo = 1 / (1 - a * a) if a < 1 else None
    if u_lo is None:
        return Fraction(0)
    if b < 1:
        u_hi = 1 / (1 - b * b)
        if u_lo <= peak <= u_hi:
            g = _g_hi(peak, n, prec) if n else Fraction(1)
        else:
            g = max(_g_hi(u_lo, n, prec), _g_hi(u_hi, n, prec))
    else:
        # u ranges over [u_lo, infinity); G tends to 0 there
        g = _g_hi(u_lo if u_lo > peak else peak, n, prec)
    return g * pbound


def _abs_deriv_lower(x: Fraction, n: int, prec: int) -> Fraction:
    w = 1 - x * x
    elo, _ = exp_enclosure(-1 / w, prec)
    return elo * abs(_poly_eval(psi_poly(n), x)) / w ** (2 * n)


def psi_sup(n: int, rel_tol=Fraction(1, 10**3), prec: int = 64) -> BoundedReal:
    """Certified enclosure of M_n = sup over (-1,1) of |psi^(n)|, n <= 4.

    The enclosure is always sound; rel_tol only controls how tight it is.
    The cache keeps the tightest enclosure computed so far.
    """
    if n < 0 or n > PSI_SUP_MAX_ORDER:
        raise DomainError("certified sup supported for orders 0..%d" % PSI_SUP_MAX_ORDER)
    cached = _PSI_SUP_CACHE.get(n)
    if cached is not None and (cached.value == 0 or cached.err * 2 <= rel_tol * cached.value):
        return cached
    if n == 0:
        # psi peaks at x = 0 (exponent -1/(1-x^2) is maximal there)
        out = BoundedReal.from_bounds(*exp_enclosure(Fraction(-1), prec))
        _PSI_SUP_CACHE[0] = out
        return out

    best_lo = Fraction(0)
    heap = []
    counter = 0

    def push(a: Fraction, b: Fraction):
        nonlocal counter
        up = _seg_upper(a, b, n, prec)
        heapq.heappush(heap, (-up, counter, a, b))
        counter += 1

    push(Fraction(0), Fraction(1))
    for _ in range(300000):
        neg_up, _, a, b = heapq.heappop(heap)
        up = -neg_up
        if up <= best_lo * (1 + rel_tol):
            heapq.heappush(heap, (neg_up, -1, a, b))
            break
        m = (a + b) / 2
        if m < 1:
            best_lo = max(best_lo, _abs_deriv_lower(m, n, prec))
        push(a, m)
        push(m, b)
    else:
        raise PrecisionUnreachable("sup refinement for order %d did not converge" % n)

    global_up = -heap[0][0]
    out = BoundedReal.from_bounds(best_lo, max(global_up, best_lo))
    if cached is None or out.err < cached.err:
        _PSI_SUP_CACHE[n] = out
    return out


# -- certified quadrature of psi --------------------------------------------


class PsiTable:
    """Cumulative integral of psi over [-1, 1] by certified Simpson panels.

    ``units`` equal-width Simpson panels; per-panel remainder is bounded by
    width^5 * M4 / 2880.  Partial panels at query time get a fresh 3-point
    Simpson with the same bound, so every query is certified.
    """

    def __init__(self, units: int = 1024, prec: int = DEFAULT_PREC):
        if units < 2 or units % 2:
            raise DomainError("units must be even and >= 2")
        self.units = units
        self.prec = prec
        self.m4_hi = psi_sup(4).upper()
        h = Fraction(2, units)
        self._h = h
        err = h**5 * self.m4_hi / 2880
        cum_lo = [Fraction(0)]
        cum_hi = [Fraction(0)]
        left = psi_or_zero(Fraction(-1), prec)
        for i in range(units):
            a = -1 + i * h
            b = a + h
            mid = psi_or_zero(a + h / 2, prec)
            right = psi_or_zero(b, prec)
            s_lo = h / 6 * (left.lower() + 4 * mid.lower() + right.lower()) - err
            s_hi = h / 6 * (left.upper() + 4 * mid.upper() + right.upper()) + err
            cum_lo.append(cum_lo[-1] + max(s_lo, Fraction(0)))
            cum_hi.append(cum_hi[-1] + s_hi)
            left = right
        self._cum_lo = cum_lo
        self._cum_hi = cum_hi

    def total(self) -> BoundedReal:
        """Enclosure of the full integral of psi over [-1, 1]."""
        return BoundedReal.from_bounds(self._cum_lo[-1], self._cum_hi[-1])

    def cumulative(self, t) -> BoundedReal:
        """Enclosure of the integral of psi from -1 to t, for t in [-1, 1]."""
        t = Fraction(t)
        if t <= -1:
            return BoundedReal.exact(0)
        if t >= 1:
            return self.total()
        j = int((t + 1) / self._h)
        j = min(j, self.units)
        base_lo, base_hi = self._cum_lo[j], self._cum_hi[j]
        a = -1 + j * self._h
        if t == a:
            return BoundedReal.from_bounds(base_lo, base_hi)
        width = t - a
        err = width**5 * self.m4_hi / 2880
        pa = psi_or_zero(a, self.prec)
        pm = psi_or_zero(a + width / 2, self.prec)
        pb = psi_or_zero(t, self.prec)
        s_lo = width / 6 * (pa.lower() + 4 * pm.lower() + pb.lower()) - err
        s_hi = width / 6 * (pa.upper() + 4 * pm.upper() + pb.upper()) + err
        return BoundedReal.from_bounds(base_lo + max(s_lo, Fraction(0)), base_hi + s_hi)


_PSI_TABLES: Dict[int, PsiTable] = {}
PSI_TABLE_MAX_UNITS = 2**16


def psi_table(units: int = 1024) -> PsiTable:
    if units not in _PSI_TABLES:
        _PSI_TABLES[units] = PsiTable(units)
    return _PSI_TABLES[units]


def bump_total_integral(units: int = 1024) -> BoundedReal:
    """Enclosure of the bump's total mass over [-1, 1] (about 0.4439938)."""
    return psi_table(units).total()


# -- gap-scaled quantities ---------------------------------------------------


def gap_scale(length, prec: int = DEFAULT_PREC) -> BoundedReal:
    """Enclosure of 2**(-1/length), the sup of the bump on a length-l gap."""
    length = Fraction(length)
    if length <= 0:
        raise DomainError("gap length must be positive")
    lo, hi = pow2_enclosure(-1 / length, prec)
    return BoundedReal.from_bounds(lo, hi)


def gap_integral(gap: Interval, units: int = 1024) -> BoundedReal:
    """Exact-scaling enclosure of the bump integral over one gap.

    Substituting t = (2x - a - b)/(b - a) turns the gap integral into
    2**(-1/(b-a)) * ((b-a)/2) * integral of psi, so one cached quadrature
    serves every gap.
    """
    length = gap.length()
    return gap_scale(length) * BoundedReal.exact(length / 2) * bump_total_integral(units)


def derivative_sup_bound(n: int, gap: Interval, prec: int = DEFAULT_PREC) -> BoundedReal:
    """Enclosure of 2**(-1/(b-a)) * 2^n * (b-a)^(-n) * M_n, an upper bound
    for the sup of |h^(n)| over the gap (a, b)."""
    if n < 0:
        raise DomainError("derivative order must be >= 0")
    length = gap.length()
    chain = Fraction(2) ** n / length**n
    return gap_scale(length, prec) * BoundedReal.exact(chain) * psi_sup(n)


# -- the pathological function ----------------------------------------------


class PathologicalFn:
    """Stage-n bump train h and its integral f on [0, 1].

    h is exactly 0 on the surviving set and carries the closed-form bump on
    every removed gap; f(x) encloses the integral of h from 0 to x.  The
    image measure of f over the surviving set is reported for the limit
    function: the finite-stage gaps are subtracted exactly, leaving the
    certified tail of the not-yet-removed generations.
    """

    def __init__(self, stage, precision=Fraction(1, 10**9), units: int = 1024):
        if isinstance(stage, int):
            stage = svc_stage(stage)
        if not isinstance(stage, FatCantorStage):
            raise DomainError("stage must be a FatCantorStage or stage index")
        self.stage = stage
        self.precision = Fraction(precision)
        if self.precision <= 0:
            raise DomainError("precision target must be positive")
        self._units = units
        self._gap_los = [g.lo for g, _ in stage.gaps]
        self._scale_cache: Dict[Fraction, BoundedReal] = {}
        self._gap_int_cache: Dict[Fraction, BoundedReal] = {}
        self.domain = Interval(Fraction(0), Fraction(1), True, True)

    # internal helpers -------------------------------------------------------

    def _table(self) -> PsiTable:
        return psi_table(self._units)

    def _scale(self, length: Fraction) -> BoundedReal:
        if length not in self._scale_cache:
            self._scale_cache[length] = gap_scale(length)
        return self._scale_cache[length]

    def _gap_integral(self, length: Fraction) -> BoundedReal:
        if length not in self._gap_int_cache:
            self._gap_int_cache[length] = (
                self._scale(length)
                * BoundedReal.exact(length / 2)
                * self._table().total()
            )
        return self._gap_int_cache[length]

    def _check_domain(self, x: Fraction):
        if not 0 <= x <= 1:
            raise DomainError("evaluation restricted to [0, 1]")

    def _partial_gap(self, gap: Interval, x: Fraction) -> BoundedReal:
        """Enclosure of the bump integral over [a, x] inside gap (a, b)."""
        a, b = gap.lo, gap.hi
        length = b - a
        t = (2 * x - a - b) / length
        cum = self._table().cumulative(t)
        out = self._scale(length) * BoundedReal.exact(length / 2) * cum
        lo = max(out.lower(), Fraction(0))
        hi = min(out.upper(), self._gap_integral(length).upper())
        return BoundedReal.from_bounds(lo, max(hi, lo))

    # public surface ---------------------------------------------------------

    def density(self, x) -> BoundedReal:
        """h(x): exact 0 on the surviving set, certified bump value on gaps."""
        x = Fraction(x)
        self._check_domain(x)
        hit = self.stage.gap_for(x)
        if hit is None:
            return BoundedReal.exact(0)
        gap, _gen = hit
        a, b = gap.lo, gap.hi
        length = b - a
        t = (2 * x - a - b) / length
        return self._scale(length) * psi_or_zero(t)

    def _upgrade_table(self) -> bool:
        if self._units * 4 > PSI_TABLE_MAX_UNITS:
            return False
        self._units *= 4
        self._gap_int_cache.clear()
        return True

    def value(self, x) -> BoundedReal:
        """f(x): certified enclosure of the integral of h from 0 to x.

        If the enclosure misses the precision target, the quadrature table
        is rebuilt finer (up to a hard cap) before giving up.
        """
        x = Fraction(x)
        self._check_domain(x)
        while True:
            total = BoundedReal.exact(0)
            i = bisect_right(self._gap_los, x)
            for gap, _gen in self.stage.gaps[:i]:
                if gap.hi <= x:
                    total = total + self._gap_integral(gap.length())
                else:
                    total = total + self._partial_gap(gap, x)
            if total.err <= self.precision:
                return total
            if not self._upgrade_table():
                # exact rationals here can exceed the int-to-str digit limit
                raise PrecisionUnreachable(
                    "evaluation error %s exceeds target %s at the finest "
                    "quadrature table" % (sci_str(total.err), sci_str(self.precision))
                )

    def increment(self, x, y) -> BoundedReal:
        """f(y) - f(x) assembled gap by gap, with the lower edge clamped at 0.

        Full gaps inside [x, y] contribute their exact-scaling integrals, so
        whenever [x, y] spans at least one whole gap the lower edge is
        strictly positive: certified strict growth.
        """
        x, y = Fraction(x), Fraction(y)
        if y < x:
            return -self.increment(y, x)
        self._check_domain(x)
        self._check_domain(y)
        lo = Fraction(0)
        hi = Fraction(0)
        start = max(bisect_right(self._gap_los, x) - 1, 0)
        for idx in range(start, len(self.stage.gaps)):
            gap, _gen = self.stage.gaps[idx]
            if gap.hi <= x:
                continue
            if gap.lo >= y:
                break
            seg_lo = max(gap.lo, x)
            seg_hi = min(gap.hi, y)
            if seg_lo == gap.lo and seg_hi == gap.hi:
                part = self._gap_integral(gap.length())
            else:
                upper = self._partial_gap(gap, seg_hi)
                lower = self._partial_gap(gap, seg_lo)
                part = BoundedReal.from_bounds(
                    max(upper.lower() - lower.upper(), Fraction(0)),
                    max(upper.upper() - lower.lower(), Fraction(0)),
                )
            lo += part.lower()
            hi += part.upper()
        return BoundedReal.from_bounds(max(lo, Fraction(0)), max(hi, Fraction(0)))

    def image_measure_surviving(self) -> BoundedReal:
        """Measure of f over the surviving set: the certified generation tail.

        Equals the total integral minus all stage gaps, i.e. the series over
        generations k > n of 2^(k-1) * 2**(-1/r_k) * (r_k/2) * Ipsi.  Terms
        below the enclosure floor are absorbed into a certified remainder.
        """
        sched = self.stage.schedule
        ipsi = self._table().total()
        n = self.stage.n
        lo = Fraction(0)
        hi = Fraction(0)
        k = n + 1
        while True:
            r = sched.removal_length(k)
            scale = self._scale(r)
            term = scale * BoundedReal.exact(Fraction(2) ** (k - 1) * r / 2) * ipsi
            if scale.lower() == 0 or k - n > 200:
                # every remaining generation is below the enclosure floor:
                # sum_{j>=k} 2^(j-1) r_j < 1, so the rest is under cap * Ipsi/2
                cap_hi = scale.upper()
                hi += cap_hi * ipsi.upper() / 2
                break
            lo += term.lower()
            hi += term.upper()
            k += 1
        return BoundedReal.from_bounds(lo, hi)

    def derivative_bound(self, n: int, gap: Interval) -> BoundedReal:
        return derivative_sup_bound(n, gap)
