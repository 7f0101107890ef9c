"""Piecewise functions of bounded variation with exact bookkeeping.

A function here is a tuple of pieces tiling a bounded interval, plus
explicit value assignments at chosen points.  Piece formulas are exact
(rational or certified-enclosure valued), so evaluation, preimages, jump
extraction, the three-part decomposition f = f_a + f_s + f_j, total
variation, and the derivative metadata consumed by the hull classifiers
all come with stated exactness.

Piece kinds: constant, affine, polynomial, shifted power, one gap bump,
the accumulated integral of a gap bump, and a declared singular stub
that carries its endpoint values and variation but refuses pointwise
evaluation.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf
from typing import List, Optional, Sequence, Tuple

from .cantor import RemovalSchedule, svc_stage
from .enclosure import BoundedReal
from .errors import (
    ComposureError,
    DomainError,
    MetadataMissing,
    NotPiecewiseMonotone,
    StubPiece,
)
from .bump import derivative_sup_bound, gap_scale, psi_deriv, psi_or_zero, psi_table
from .intervals import (
    Interval,
    IntervalSet,
    closed,
    format_interval,
    open_iv,
    parse_interval,
    point,
)

__all__ = [
    "ConstPiece",
    "AffinePiece",
    "PolyPiece",
    "PowerPiece",
    "BumpPiece",
    "IntegralPiece",
    "SingularStubPiece",
    "StepFn",
    "PreimageResult",
    "PiecewiseFn",
    "parse_fn_spec",
    "format_fn_spec",
    "const_fn",
    "identity_fn",
    "abs_fn",
    "cubic_fn",
    "cubic_drift_fn",
    "square_fn",
    "heaviside_fn",
    "cantor_stub_fn",
    "cantor_bump_fn",
    "cantor_integral_fn",
]


# -- raw value helpers --------------------------------------------------------
#
# Piece values are either exact Fractions or BoundedReal enclosures.  The
# helpers below keep arithmetic exact as long as both sides are exact.


def _add_raw(a, b):
    if isinstance(a, BoundedReal) or isinstance(b, BoundedReal):
        a = a if isinstance(a, BoundedReal) else BoundedReal.exact(a)
        return a + b
    return a + b


def _sub_raw(a, b):
    if isinstance(a, BoundedReal) or isinstance(b, BoundedReal):
        a = a if isinstance(a, BoundedReal) else BoundedReal.exact(a)
        return a - b
    return a - b


def _abs_raw(a):
    return abs(a)


def _raw_lower(a) -> Fraction:
    return a.lower() if isinstance(a, BoundedReal) else Fraction(a)


def _raw_upper(a) -> Fraction:
    return a.upper() if isinstance(a, BoundedReal) else Fraction(a)


def _is_exact_zero(a) -> bool:
    if isinstance(a, BoundedReal):
        return a.err == 0 and a.value == 0
    return a == 0


def _cmp_raw(val, q: Fraction) -> str:
    """Three-way compare of a raw value against a rational: gt/eq/lt/maybe."""
    if isinstance(val, BoundedReal):
        if val.err == 0:
            val = val.value
        else:
            if val.lower() > q:
                return "gt"
            if val.upper() < q:
                return "lt"
            return "maybe"
    if val > q:
        return "gt"
    if val < q:
        return "lt"
    return "eq"


def _membership(val, comp: Interval) -> str:
    """Whether a raw value lies in one interval: in/out/maybe."""
    if isinstance(val, BoundedReal) and val.err != 0:
        lo, hi = val.lower(), val.upper()
        if comp.contains(lo) and comp.contains(hi):
            return "in"
        c_lo = comp.lo if not isinstance(comp.lo, float) else None
        c_hi = comp.hi if not isinstance(comp.hi, float) else None
        if c_lo is not None and hi < c_lo:
            return "out"
        if c_hi is not None and lo > c_hi:
            return "out"
        return "maybe"
    v = val.value if isinstance(val, BoundedReal) else Fraction(val)
    return "in" if comp.contains(v) else "out"


# -- integer and rational roots ----------------------------------------------


def _int_nth_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) by integer Newton iteration, n >= 0."""
    if n < 0:
        raise DomainError("negative radicand")
    if n in (0, 1) or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _nth_root_bracket(y: Fraction, k: int, bits: int = 80):
    """Closed rational bracket around y ** (1/k) for y >= 0.

    Returns (lo, hi, exact); exact means lo == hi == the true root.
    """
    if y < 0:
        raise DomainError("negative radicand")
    if y == 0:
        return Fraction(0), Fraction(0), True
    # perfect k-th power of the reduced fraction gives an exact root
    rn = _int_nth_root(y.numerator, k)
    rd = _int_nth_root(y.denominator, k)
    if rn**k == y.numerator and rd**k == y.denominator:
        r = Fraction(rn, rd)
        return r, r, True
    scaled = (y.numerator << (k * bits)) // y.denominator
    m = _int_nth_root(scaled, k)
    unit = Fraction(1, 1 << bits)
    while Fraction(m + 1) * unit > 0 and (Fraction(m + 1) * unit) ** k <= y:
        m += 1
    while m > 0 and (Fraction(m) * unit) ** k > y:
        m -= 1
    return Fraction(m) * unit, Fraction(m + 1) * unit, False


# -- exact polynomial toolbox -------------------------------------------------
#
# Coefficients ascending, Fractions.  Sturm chains count distinct real
# roots exactly; rational-root search then decides whether the critical
# points can be written down, and anything irrational is reported as
# missing metadata rather than approximated.


def _p_trim(c: List[Fraction]) -> Tuple[Fraction, ...]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def _p_eval(c: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for coef in reversed(c):
        acc = acc * x + coef
    return acc


def _p_diff(c: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    if len(c) <= 1:
        return (Fraction(0),)
    return _p_trim([c[i] * i for i in range(1, len(c))])


def _p_is_zero(c: Sequence[Fraction]) -> bool:
    return all(v == 0 for v in c)


def _p_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    if _p_is_zero(b):
        raise DomainError("polynomial division by zero")
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    q = [Fraction(0)] * max(len(a) - db, 1)
    while len(a) - 1 >= db and not _p_is_zero(a):
        shift = len(a) - 1 - db
        coef = a[-1] / lb
        q[shift] = coef
        for i in range(len(b)):
            a[shift + i] -= coef * b[i]
        del a[-1]
        while len(a) > 1 and a[-1] == 0:
            a.pop()
    if not a:
        a = [Fraction(0)]
    return _p_trim(q), _p_trim(a)


def _p_gcd(a, b):
    a, b = _p_trim(list(a)), _p_trim(list(b))
    while not _p_is_zero(b):
        _, r = _p_divmod(a, b)
        a, b = b, r
    if _p_is_zero(a):
        return (Fraction(0),)
    return _p_trim([v / a[-1] for v in a])


def _squarefree(c):
    d = _p_diff(c)
    if _p_is_zero(d):
        return _p_trim(list(c))
    g = _p_gcd(c, d)
    if len(g) == 1:
        return _p_trim(list(c))
    q, _ = _p_divmod(c, g)
    return q


def _sturm_chain(c):
    chain = [_p_trim(list(c)), _p_diff(c)]
    while not _p_is_zero(chain[-1]) and len(chain[-1]) > 1:
        _, r = _p_divmod(chain[-2], chain[-1])
        if _p_is_zero(r):
            break
        chain.append(tuple(-v for v in r))
    return chain


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _p_eval(p, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for i in range(len(signs) - 1) if signs[i] != signs[i + 1])


def _count_roots_open(c, a: Fraction, b: Fraction) -> int:
    """Distinct real roots of c strictly inside (a, b)."""
    q = _squarefree(c)
    if len(q) == 1:
        if q[0] == 0:
            raise DomainError("zero polynomial has no isolated roots")
        return 0
    chain = _sturm_chain(q)
    n = _sign_changes(chain, a) - _sign_changes(chain, b)
    if _p_eval(q, b) == 0:
        n -= 1
    return n


_DIVISOR_CAP = 10**12


def _divisors(n: int) -> Optional[List[int]]:
    n = abs(n)
    if n == 0:
        return None
    if n > _DIVISOR_CAP:
        return None
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            out.append(n // i)
        i += 1
    return sorted(set(out))


def _rational_roots(c) -> Optional[List[Fraction]]:
    """All rational roots, or None when the search had to give up."""
    c = _p_trim(list(c))
    if len(c) == 1:
        return []
    roots = set()
    # factor out x^m first so the constant term is nonzero
    m = 0
    while c[0] == 0:
        roots.add(Fraction(0))
        c = _p_trim(list(c[1:]))
        m += 1
        if len(c) == 1:
            return sorted(roots)
    lcm = 1
    for v in c:
        lcm = lcm * v.denominator // gcd(lcm, v.denominator)
    ic = [int(v * lcm) for v in c]
    dn = _divisors(ic[0])
    dd = _divisors(ic[-1])
    if dn is None or dd is None or len(dn) * len(dd) > 5000:
        return None
    for p in dn:
        for q in dd:
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if _p_eval(c, cand) == 0:
                    roots.add(cand)
    return sorted(roots)


def _poly_critical_points(c, a: Fraction, b: Fraction):
    """Exact derivative zeros of c strictly inside (a, b).

    Returns None when the derivative vanishes identically; raises
    MetadataMissing when a critical point exists but is irrational.
    """
    d = _p_diff(c)
    if _p_is_zero(d):
        return None
    n = _count_roots_open(d, a, b)
    if n == 0:
        return []
    roots = _rational_roots(_squarefree(d))
    if roots is None:
        raise MetadataMissing("critical points too large to isolate exactly")
    inside = [r for r in roots if a < r < b]
    if len(inside) != n:
        raise MetadataMissing("polynomial has irrational critical points")
    return inside


def _pow_range(a: Fraction, b: Fraction, e: int):
    """Exact range of x**e over [a, b]."""
    if e == 0:
        return Fraction(1), Fraction(1)
    va, vb = a**e, b**e
    if e % 2 == 1 or a >= 0:
        return min(va, vb), max(va, vb)
    if b <= 0:
        return min(va, vb), max(va, vb)
    return Fraction(0), max(va, vb)


def _poly_range(c, a: Fraction, b: Fraction):
    """Sound outer bounds for a polynomial over [a, b] by per-term ranges."""
    lo = hi = c[0]
    for e in range(1, len(c)):
        if c[e] == 0:
            continue
        r_lo, r_hi = _pow_range(a, b, e)
        t_lo, t_hi = c[e] * r_lo, c[e] * r_hi
        if t_lo > t_hi:
            t_lo, t_hi = t_hi, t_lo
        lo += t_lo
        hi += t_hi
    return lo, hi


# -- monotone inversion -------------------------------------------------------


_INVERT_TOL = Fraction(1, 2**64)


def _invert_monotone(evalf, u, v, y, increasing, tol=_INVERT_TOL, max_iter=200):
    """Bracket the solution of f(x) = y on [u, v], f monotone there.

    Returns (lo, hi, exact).  Enclosure-valued evaluations stop the
    bisection once the target falls inside the enclosure, which keeps the
    bracket sound at the cost of width.
    """
    a, b = Fraction(u), Fraction(v)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        mid = (a + b) / 2
        fv = evalf(mid)
        c = _cmp_raw(fv, y)
        if c == "eq":
            return mid, mid, True
        if c == "maybe":
            break
        below = c == "lt"
        if below == increasing:
            a = mid
        else:
            b = mid
    return a, b, False


# -- piece kinds ---------------------------------------------------------------


class _Piece:
    """Shared fallbacks; every concrete piece is a frozen dataclass."""

    def eval_raw(self, x: Fraction):
        raise NotImplementedError

    def boundary_value(self, x: Fraction):
        # continuous extension to the span closure; stubs override
        return self.eval_raw(x)

    def shift(self, c):
        raise NotImplementedError

    def slope_at(self, x: Fraction):
        raise NotImplementedError

    def slope_range(self, lo: Fraction, hi: Fraction):
        raise MetadataMissing("no slope bounds for %r" % type(self).__name__)

    def deriv_zero_set(self, lo: Fraction, hi: Fraction) -> IntervalSet:
        raise MetadataMissing("no derivative zeros for %r" % type(self).__name__)

    def monotone_branches(self, lo: Fraction, hi: Fraction):
        raise MetadataMissing("no monotone split for %r" % type(self).__name__)

    def variation(self, lo: Fraction, hi: Fraction):
        total = Fraction(0)
        for u, v, _d, _uc, _vc in self.monotone_branches(lo, hi):
            total = _add_raw(total, _abs_raw(_sub_raw(self.eval_raw(v), self.eval_raw(u))))
        return total

    def invert_on(self, u: Fraction, v: Fraction, y: Fraction, increasing: bool):
        return _invert_monotone(self.eval_raw, u, v, y, increasing)

    def spec_tokens(self) -> str:
        raise DomainError("%s has no exact text form" % type(self).__name__)


def _frac_str(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class ConstPiece(_Piece):
    """Constant value, rational or enclosure."""

    value: object = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.value, BoundedReal):
            object.__setattr__(self, "value", Fraction(self.value))

    def eval_raw(self, x):
        return self.value

    def shift(self, c):
        return ConstPiece(_add_raw(self.value, c))

    def slope_at(self, x):
        return Fraction(0)

    def slope_range(self, lo, hi):
        return Fraction(0), Fraction(0)

    def deriv_zero_set(self, lo, hi):
        return IntervalSet([open_iv(lo, hi)])

    def monotone_branches(self, lo, hi):
        return [(lo, hi, 0, True, True)]

    def variation(self, lo, hi):
        return Fraction(0)

    def spec_tokens(self):
        if isinstance(self.value, BoundedReal):
            if self.value.err != 0:
                raise DomainError("enclosure constant has no exact text form")
            return "const %s" % _frac_str(self.value.value)
        return "const %s" % _frac_str(self.value)


@dataclass(frozen=True)
class AffinePiece(_Piece):
    """m x + b with exact rational slope and intercept."""

    m: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m))
        object.__setattr__(self, "b", Fraction(self.b))

    def eval_raw(self, x):
        return self.m * x + self.b

    def shift(self, c):
        if isinstance(c, BoundedReal) and c.err != 0:
            raise DomainError("affine pieces take exact shifts only")
        c = c.value if isinstance(c, BoundedReal) else Fraction(c)
        return AffinePiece(self.m, self.b + c)

    def slope_at(self, x):
        return self.m

    def slope_range(self, lo, hi):
        return self.m, self.m

    def deriv_zero_set(self, lo, hi):
        if self.m == 0:
            return IntervalSet([open_iv(lo, hi)])
        return IntervalSet.empty()

    def monotone_branches(self, lo, hi):
        d = 0 if self.m == 0 else (1 if self.m > 0 else -1)
        return [(lo, hi, d, True, True)]

    def invert_on(self, u, v, y, increasing):
        x = (Fraction(y) - self.b) / self.m
        return x, x, True

    def spec_tokens(self):
        return "affine %s %s" % (_frac_str(self.m), _frac_str(self.b))


@dataclass(frozen=True)
class PolyPiece(_Piece):
    """Exact polynomial, coefficients ascending."""

    coeffs: Tuple[Fraction, ...] = (Fraction(0),)

    def __post_init__(self):
        c = _p_trim([Fraction(v) for v in self.coeffs] or [Fraction(0)])
        object.__setattr__(self, "coeffs", c)

    def eval_raw(self, x):
        return _p_eval(self.coeffs, x)

    def shift(self, c):
        if isinstance(c, BoundedReal) and c.err != 0:
            raise DomainError("polynomial pieces take exact shifts only")
        c = c.value if isinstance(c, BoundedReal) else Fraction(c)
        new = list(self.coeffs)
        new[0] += c
        return PolyPiece(tuple(new))

    def slope_at(self, x):
        return _p_eval(_p_diff(self.coeffs), x)

    def slope_range(self, lo, hi):
        return _poly_range(_p_diff(self.coeffs), lo, hi)

    def deriv_zero_set(self, lo, hi):
        crit = _poly_critical_points(self.coeffs, lo, hi)
        if crit is None:
            return IntervalSet([open_iv(lo, hi)])
        return IntervalSet([point(r) for r in crit])

    def monotone_branches(self, lo, hi):
        crit = _poly_critical_points(self.coeffs, lo, hi)
        if crit is None:
            return [(lo, hi, 0, True, True)]
        cuts = [lo] + crit + [hi]
        d = _p_diff(self.coeffs)
        out = []
        for i in range(len(cuts) - 1):
            u, v = cuts[i], cuts[i + 1]
            s = _p_eval(d, (u + v) / 2)
            out.append((u, v, 1 if s > 0 else -1, i == 0, i == len(cuts) - 2))
        return out

    def spec_tokens(self):
        return "poly " + " ".join(_frac_str(v) for v in self.coeffs)


@dataclass(frozen=True)
class PowerPiece(_Piece):
    """s (x - x0)**k + c."""

    k: int = 2
    s: Fraction = Fraction(1)
    x0: Fraction = Fraction(0)
    c: Fraction = Fraction(0)

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("power exponent must be >= 1")
        if self.s == 0:
            raise DomainError("power scale must be nonzero")
        object.__setattr__(self, "s", Fraction(self.s))
        object.__setattr__(self, "x0", Fraction(self.x0))
        object.__setattr__(self, "c", Fraction(self.c))

    def eval_raw(self, x):
        return self.s * (x - self.x0) ** self.k + self.c

    def shift(self, v):
        if isinstance(v, BoundedReal) and v.err != 0:
            raise DomainError("power pieces take exact shifts only")
        v = v.value if isinstance(v, BoundedReal) else Fraction(v)
        return PowerPiece(self.k, self.s, self.x0, self.c + v)

    def slope_at(self, x):
        return self.s * self.k * (x - self.x0) ** (self.k - 1)

    def slope_range(self, lo, hi):
        r_lo, r_hi = _pow_range(lo - self.x0, hi - self.x0, self.k - 1)
        a, b = self.s * self.k * r_lo, self.s * self.k * r_hi
        return (a, b) if a <= b else (b, a)

    def deriv_zero_set(self, lo, hi):
        if self.k >= 2 and lo < self.x0 < hi:
            return IntervalSet([point(self.x0)])
        return IntervalSet.empty()

    def monotone_branches(self, lo, hi):
        sgn = 1 if self.s > 0 else -1
        if self.k % 2 == 1:
            return [(lo, hi, sgn, True, True)]
        if lo >= self.x0:
            return [(lo, hi, sgn, True, True)]
        if hi <= self.x0:
            return [(lo, hi, -sgn, True, True)]
        return [(lo, self.x0, -sgn, True, False), (self.x0, hi, sgn, False, True)]

    def invert_on(self, u, v, y, increasing):
        z = (Fraction(y) - self.c) / self.s
        if self.k % 2 == 1:
            neg = z < 0
            rl, rh, ex = _nth_root_bracket(abs(z), self.k)
            if neg:
                rl, rh = -rh, -rl
            return self.x0 + rl, self.x0 + rh, ex
        if z < 0:
            # no real solution; callers screen by value range first
            raise DomainError("even power cannot reach the requested value")
        rl, rh, ex = _nth_root_bracket(z, self.k)
        if v <= self.x0:
            return self.x0 - rh, self.x0 - rl, ex
        return self.x0 + rl, self.x0 + rh, ex

    def spec_tokens(self):
        return "power %d %s %s %s" % (
            self.k,
            _frac_str(self.s),
            _frac_str(self.x0),
            _frac_str(self.c),
        )


@dataclass(frozen=True)
class BumpPiece(_Piece):
    """The gap bump 2**(-1/(b-a)) * psi((2x-a-b)/(b-a)) plus an offset.

    Vanishes with all derivatives at both gap ends, peaks at the gap
    midpoint, and is strictly positive strictly inside.
    """

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    offset: object = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.b <= self.a:
            raise DomainError("bump gap must have positive length")
        if not isinstance(self.offset, BoundedReal):
            object.__setattr__(self, "offset", Fraction(self.offset))

    def _t(self, x: Fraction) -> Fraction:
        return (2 * x - self.a - self.b) / (self.b - self.a)

    @property
    def mid(self) -> Fraction:
        return (self.a + self.b) / 2

    def eval_raw(self, x):
        t = self._t(x)
        if abs(t) >= 1:
            return _add_raw(self.offset, Fraction(0))
        val = gap_scale(self.b - self.a) * psi_or_zero(t)
        return _add_raw(self.offset, val)

    def shift(self, c):
        return BumpPiece(self.a, self.b, _add_raw(self.offset, c))

    def slope_at(self, x):
        t = self._t(x)
        if abs(t) >= 1:
            # all derivatives vanish at the gap ends
            return Fraction(0)
        chain = BoundedReal.exact(Fraction(2) / (self.b - self.a))
        return gap_scale(self.b - self.a) * psi_deriv(1, t) * chain

    def slope_range(self, lo, hi):
        bound = derivative_sup_bound(1, open_iv(self.a, self.b)).upper()
        if lo >= self.mid:
            return -bound, Fraction(0)
        if hi <= self.mid:
            return Fraction(0), bound
        return -bound, bound

    def deriv_zero_set(self, lo, hi):
        if lo < self.mid < hi:
            return IntervalSet([point(self.mid)])
        return IntervalSet.empty()

    def monotone_branches(self, lo, hi):
        m = self.mid
        if hi <= m:
            return [(lo, hi, 1, True, True)]
        if lo >= m:
            return [(lo, hi, -1, True, True)]
        return [(lo, m, 1, True, False), (m, hi, -1, False, True)]

    def spec_tokens(self):
        base = "bump %s %s" % (_frac_str(self.a), _frac_str(self.b))
        if _is_exact_zero(self.offset):
            return base
        if isinstance(self.offset, BoundedReal):
            if self.offset.err != 0:
                raise DomainError("enclosure offset has no exact text form")
            return base + " %s" % _frac_str(self.offset.value)
        return base + " %s" % _frac_str(self.offset)


@dataclass(frozen=True)
class IntegralPiece(_Piece):
    """offset + integral of the gap bump from the gap's left end.

    Strictly increasing across its gap; its slope is the bump itself, so
    the slope vanishes exactly at both ends.  Values are certified
    enclosures from the shared quadrature table.
    """

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    offset: object = Fraction(0)
    units: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.b <= self.a:
            raise DomainError("gap must have positive length")
        if not isinstance(self.offset, BoundedReal):
            object.__setattr__(self, "offset", Fraction(self.offset))

    def _t(self, x: Fraction) -> Fraction:
        return (2 * x - self.a - self.b) / (self.b - self.a)

    def eval_raw(self, x):
        length = self.b - self.a
        t = self._t(x)
        if t <= -1:
            return _add_raw(self.offset, Fraction(0))
        part = psi_table(self.units).cumulative(min(t, Fraction(1)))
        val = gap_scale(length) * BoundedReal.exact(length / 2) * part
        return _add_raw(self.offset, val)

    def shift(self, c):
        return IntegralPiece(self.a, self.b, _add_raw(self.offset, c), self.units)

    def slope_at(self, x):
        t = self._t(x)
        if abs(t) >= 1:
            return Fraction(0)
        return gap_scale(self.b - self.a) * psi_or_zero(t)

    def slope_range(self, lo, hi):
        # the slope is the bump: nonnegative, capped by its peak value
        peak = gap_scale(self.b - self.a).upper() * psi_or_zero(Fraction(0)).upper()
        return Fraction(0), peak

    def deriv_zero_set(self, lo, hi):
        # strictly positive slope strictly inside the gap
        return IntervalSet.empty()

    def monotone_branches(self, lo, hi):
        return [(lo, hi, 1, True, True)]

    def variation(self, lo, hi):
        length = self.b - self.a
        part = psi_table(self.units).cumulative(self._t(hi)) - psi_table(
            self.units
        ).cumulative(self._t(lo))
        return gap_scale(length) * BoundedReal.exact(length / 2) * part


@dataclass(frozen=True)
class SingularStubPiece(_Piece):
    """A declared singular piece: endpoint values and variation only.

    Pointwise evaluation is refused; the decomposition routes this piece
    into the singular part wholesale.
    """

    name: str = "singular"
    lo_point: Fraction = Fraction(0)
    lo_value: Fraction = Fraction(0)
    hi_point: Fraction = Fraction(1)
    hi_value: Fraction = Fraction(1)
    declared_variation: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "lo_point", Fraction(self.lo_point))
        object.__setattr__(self, "lo_value", Fraction(self.lo_value))
        object.__setattr__(self, "hi_point", Fraction(self.hi_point))
        object.__setattr__(self, "hi_value", Fraction(self.hi_value))
        object.__setattr__(self, "declared_variation", Fraction(self.declared_variation))
        if self.declared_variation < abs(self.hi_value - self.lo_value):
            raise DomainError("declared variation below the endpoint swing")

    def eval_raw(self, x):
        raise StubPiece("stub piece %r has no pointwise values" % self.name)

    def boundary_value(self, x):
        if x == self.lo_point:
            return self.lo_value
        if x == self.hi_point:
            return self.hi_value
        raise StubPiece("stub piece %r has declared values at its ends only" % self.name)

    def shift(self, c):
        if isinstance(c, BoundedReal) and c.err != 0:
            raise DomainError("stub pieces take exact shifts only")
        c = c.value if isinstance(c, BoundedReal) else Fraction(c)
        return SingularStubPiece(
            self.name,
            self.lo_point,
            self.lo_value + c,
            self.hi_point,
            self.hi_value + c,
            self.declared_variation,
        )

    def monotone_branches(self, lo, hi):
        raise StubPiece("stub piece %r cannot be inverted" % self.name)

    def variation(self, lo, hi):
        if lo == self.lo_point and hi == self.hi_point:
            return self.declared_variation
        raise StubPiece("stub variation is declared for the whole span only")

    def spec_tokens(self):
        return "stub %s %s %s %s %s %s" % (
            self.name,
            _frac_str(self.lo_point),
            _frac_str(self.lo_value),
            _frac_str(self.hi_point),
            _frac_str(self.hi_value),
            _frac_str(self.declared_variation),
        )


# -- pure jump functions -------------------------------------------------------


@dataclass(frozen=True)
class StepFn:
    """A finite sum of one-sided jumps.

    Each record is (t, minus, plus): minus is f(t) - f(t-), plus is
    f(t+) - f(t).  Evaluation follows the running-sum convention
    f_j(x) = sum over t <= x of minus plus sum over t < x of plus,
    which makes f_j vanish left of the first jump.
    """

    jumps: Tuple[Tuple[Fraction, Fraction, Fraction], ...] = ()

    def __post_init__(self):
        cleaned = []
        for t, dm, dp in self.jumps:
            t, dm, dp = Fraction(t), Fraction(dm), Fraction(dp)
            if dm or dp:
                cleaned.append((t, dm, dp))
        cleaned.sort()
        ts = [t for t, _, _ in cleaned]
        if len(set(ts)) != len(ts):
            raise DomainError("duplicate jump points")
        object.__setattr__(self, "jumps", tuple(cleaned))
        pm = [Fraction(0)]
        pp = [Fraction(0)]
        for _, dm, dp in cleaned:
            pm.append(pm[-1] + dm)
            pp.append(pp[-1] + dp)
        object.__setattr__(self, "_ts", ts)
        object.__setattr__(self, "_pm", pm)
        object.__setattr__(self, "_pp", pp)

    def points(self) -> Tuple[Fraction, ...]:
        return tuple(self._ts)

    def evaluate(self, x) -> Fraction:
        x = Fraction(x)
        i_le = bisect_right(self._ts, x)
        i_lt = bisect_left(self._ts, x)
        return self._pm[i_le] + self._pp[i_lt]

    def total_variation(self) -> Fraction:
        return sum((abs(dm) + abs(dp) for _, dm, dp in self.jumps), Fraction(0))

    def is_zero(self) -> bool:
        return not self.jumps


@dataclass(frozen=True)
class PreimageResult:
    """A preimage with its exactness flag.

    exact means the set's endpoints are the true rational endpoints; an
    inexact result is an outer approximation whose endpoints came from
    certified brackets, with the reasons listed in notes.
    """

    points: IntervalSet
    exact: bool = True
    notes: Tuple[str, ...] = ()

    def measure(self) -> Fraction:
        return self.points.measure()


# -- the piecewise container ----------------------------------------------------


@dataclass(frozen=True)
class PiecewiseFn:
    """Pieces tiling a bounded interval, plus explicit point assignments.

    Spans must cover the domain exactly, sharing each breakpoint between
    exactly one closed and one open side.  Values at assigned points
    override the covering piece's formula.
    """

    domain: Interval
    spans: Tuple[Interval, ...]
    pieces: Tuple[_Piece, ...]
    assigned: Tuple[Tuple[Fraction, object], ...] = ()
    label: Optional[str] = None
    cantor_stage: Optional[int] = None
    schedule: Optional[RemovalSchedule] = None

    def __post_init__(self):
        if not self.domain.is_bounded:
            raise DomainError("piecewise functions live on bounded intervals")
        if not (self.domain.lo_closed and self.domain.hi_closed):
            raise DomainError("the domain must be a closed interval")
        spans = tuple(self.spans)
        pieces = tuple(self.pieces)
        if len(spans) != len(pieces) or not spans:
            raise DomainError("spans and pieces must pair up nonempty")
        if spans[0].lo != self.domain.lo or not spans[0].lo_closed:
            raise DomainError("first span must start closed at the domain's left end")
        if spans[-1].hi != self.domain.hi or not spans[-1].hi_closed:
            raise DomainError("last span must finish closed at the domain's right end")
        for i, s in enumerate(spans):
            if s.lo >= s.hi:
                raise DomainError("piece spans need positive length")
            if i + 1 < len(spans):
                nxt = spans[i + 1]
                if s.hi != nxt.lo:
                    raise DomainError("spans must tile the domain without holes")
                if s.hi_closed == nxt.lo_closed:
                    raise DomainError(
                        "each breakpoint must belong to exactly one neighboring span"
                    )
        assigned = []
        seen = set()
        for t, v in self.assigned:
            t = Fraction(t)
            if t in seen:
                raise DomainError("duplicate assigned point %s" % t)
            seen.add(t)
            if not self.domain.contains(t):
                raise DomainError("assigned point %s outside the domain" % t)
            if not isinstance(v, BoundedReal):
                v = Fraction(v)
            assigned.append((t, v))
        assigned.sort(key=lambda tv: tv[0])
        for t, _ in assigned:
            i = self._span_index_static(spans, t)
            if isinstance(pieces[i], SingularStubPiece):
                s = spans[i]
                if s.lo < t < s.hi:
                    raise DomainError("assigned points inside stub spans are not allowed")
        for s, p in zip(spans, pieces):
            if isinstance(p, SingularStubPiece):
                if p.lo_point != s.lo or p.hi_point != s.hi:
                    raise DomainError("stub declared endpoints must match its span")
        object.__setattr__(self, "spans", spans)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "assigned", tuple(assigned))
        object.__setattr__(self, "_los", [s.lo for s in spans])
        object.__setattr__(self, "_assigned_map", dict(assigned))

    # -- span lookup ----------------------------------------------------------

    @staticmethod
    def _span_index_static(spans, x: Fraction) -> int:
        los = [s.lo for s in spans]
        i = bisect_right(los, x) - 1
        # x == spans[i].lo with an open left end is covered by the left
        # neighbor's closed right end
        for j in (i, i - 1):
            if 0 <= j < len(spans) and spans[j].contains(x):
                return j
        raise DomainError("point %s not covered by any span" % x)

    def _span_index(self, x: Fraction) -> int:
        i = bisect_right(self._los, x) - 1
        for j in (i, i - 1):
            if 0 <= j < len(self.spans) and self.spans[j].contains(x):
                return j
        raise DomainError("point %s not covered by any span" % x)

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        return tuple(s.hi for s in self.spans[:-1])

    def piece_at(self, x) -> _Piece:
        return self.pieces[self._span_index(Fraction(x))]

    # -- evaluation -------------------------------------------------------------

    def evaluate(self, x):
        """Value at x: the assigned value if present, else the piece formula."""
        x = Fraction(x)
        if not self.domain.contains(x):
            raise DomainError("%s outside the domain %s" % (x, format_interval(self.domain)))
        if x in self._assigned_map:
            return self._assigned_map[x]
        return self.pieces[self._span_index(x)].eval_raw(x)

    def limit_left(self, t):
        """Left-hand limit at t, or None at the domain's left end."""
        t = Fraction(t)
        if not self.domain.contains(t):
            raise DomainError("limit point outside the domain")
        if t == self.domain.lo:
            return None
        i = self._span_index(t)
        if self.spans[i].lo == t:
            i -= 1
        return self.pieces[i].boundary_value(t)

    def limit_right(self, t):
        """Right-hand limit at t, or None at the domain's right end."""
        t = Fraction(t)
        if not self.domain.contains(t):
            raise DomainError("limit point outside the domain")
        if t == self.domain.hi:
            return None
        i = self._span_index(t)
        if self.spans[i].hi == t:
            i += 1
        return self.pieces[i].boundary_value(t)

    # -- jumps ---------------------------------------------------------------

    def _jump_candidates(self) -> List[Fraction]:
        pts = {self.domain.lo, self.domain.hi}
        pts.update(self.breakpoints)
        pts.update(t for t, _ in self.assigned)
        return sorted(pts)

    def jump_at(self, t) -> Tuple[Fraction, Fraction]:
        """(f(t) - f(t-), f(t+) - f(t)) as exact rationals.

        Enclosure-valued differences that straddle zero are resolved as
        zero: the constructors in this module only produce them at joints
        that are continuous by construction.  A difference that is
        certainly nonzero but known only as an enclosure is an error.
        """
        t = Fraction(t)
        val = self._value_for_jump(t)
        lm = self.limit_left(t)
        rm = self.limit_right(t)
        dm = _jump_component(_sub_raw(val, lm)) if lm is not None else Fraction(0)
        dp = _jump_component(_sub_raw(rm, val)) if rm is not None else Fraction(0)
        return dm, dp

    def _value_for_jump(self, t: Fraction):
        # like evaluate, but span endpoints fall back to the declared
        # boundary value so stub spans stay usable at their ends
        if t in self._assigned_map:
            return self._assigned_map[t]
        i = self._span_index(t)
        s = self.spans[i]
        if t == s.lo or t == s.hi:
            return self.pieces[i].boundary_value(t)
        return self.pieces[i].eval_raw(t)

    def jump_part(self) -> StepFn:
        """The pure jump component of the decomposition."""
        records = []
        for t in self._jump_candidates():
            dm, dp = self.jump_at(t)
            if dm or dp:
                records.append((t, dm, dp))
        return StepFn(tuple(records))

    # -- decomposition ----------------------------------------------------------

    def has_singular_stub(self) -> bool:
        return any(isinstance(p, SingularStubPiece) for p in self.pieces)

    def is_identically_zero(self) -> bool:
        if any(not isinstance(p, ConstPiece) for p in self.pieces):
            return False
        for p in self.pieces:
            if not _is_exact_zero(p.value):
                return False
        return all(_is_exact_zero(v) for _, v in self.assigned)

    def bv_decompose(self) -> Tuple["PiecewiseFn", "PiecewiseFn", StepFn]:
        """Split into (absolutely continuous, singular, jump) parts.

        The jump part collects the one-sided jumps; declared stub pieces
        form the singular part (shifted so the sum works out); whatever
        remains is the continuous part.  The identity f = fa + fs + fj
        holds at every point where f itself is evaluable.
        """
        fj = self.jump_part()
        jump_pts = set(fj.points())
        fa_pieces = []
        fs_pieces = []
        for s, p in zip(self.spans, self.pieces):
            # sample the jump level away from any spike interior to the
            # span: an assigned point there is a pure spike (the piece is
            # continuous across it), so the level is the same on both sides
            inside = [t for t in jump_pts if s.lo < t < s.hi]
            probe = (s.lo + (min(inside) if inside else s.hi)) / 2
            fj_level = fj.evaluate(probe)
            if isinstance(p, SingularStubPiece):
                fa_pieces.append(ConstPiece(Fraction(0)))
                fs_pieces.append(p.shift(-fj_level))
            else:
                fa_pieces.append(p.shift(-fj_level))
                fs_pieces.append(ConstPiece(Fraction(0)))
        fa_assigned = tuple(
            (t, _sub_raw(v, fj.evaluate(t))) for t, v in self.assigned
        )
        fa = PiecewiseFn(self.domain, self.spans, tuple(fa_pieces), fa_assigned)
        fs = PiecewiseFn(self.domain, self.spans, tuple(fs_pieces))
        return fa, fs, fj

    def total_variation(self):
        """Exact when every piece is exact; an enclosure otherwise."""
        total = Fraction(0)
        for s, p in zip(self.spans, self.pieces):
            total = _add_raw(total, p.variation(s.lo, s.hi))
        for t in self._jump_candidates():
            dm, dp = self.jump_at(t)
            total = _add_raw(total, abs(dm) + abs(dp))
        return total

    # -- preimages ---------------------------------------------------------------

    def preimage(self, target) -> PreimageResult:
        """Preimage of a target set, as an exact or outer-approximate set.

        Pieces must admit a monotone decomposition; constant stretches
        are fine.  Affine pieces invert exactly; power pieces invert
        exactly when the needed root is rational; everything else gets
        certified brackets and an inexact flag.
        """
        if isinstance(target, PreimageResult):
            target = target.points
        if isinstance(target, Interval):
            target = IntervalSet([target])
        elif not isinstance(target, IntervalSet):
            target = IntervalSet([point(Fraction(target))])
        exact = True
        notes: List[str] = []
        hits: List[Interval] = []
        for s, p in zip(self.spans, self.pieces):
            try:
                branches = p.monotone_branches(s.lo, s.hi)
            except StubPiece:
                raise
            except MetadataMissing as exc:
                raise NotPiecewiseMonotone(str(exc)) from exc
            for u, v, direction, at_lo, at_hi in branches:
                u_closed = s.lo_closed if at_lo else True
                v_closed = s.hi_closed if at_hi else True
                for comp in target.components:
                    got = _branch_preimage(
                        p, u, v, direction, u_closed, v_closed, comp
                    )
                    if got is None:
                        continue
                    iv, was_exact, note = got
                    hits.append(iv)
                    if not was_exact:
                        exact = False
                        if note and note not in notes:
                            notes.append(note)
        result = IntervalSet(hits)
        if self.assigned:
            # assigned values override the formulas pointwise
            result = result.difference(
                IntervalSet([point(t) for t, _ in self.assigned])
            )
            adds = []
            for t, v in self.assigned:
                verdicts = [_membership(v, comp) for comp in target.components]
                if "in" in verdicts:
                    adds.append(point(t))
                elif "maybe" in verdicts:
                    adds.append(point(t))
                    exact = False
                    note = "assigned value at %s decided from an enclosure" % t
                    if note not in notes:
                        notes.append(note)
            if adds:
                result = result.union(IntervalSet(adds))
        return PreimageResult(result, exact, tuple(notes))

    # -- derivative metadata ------------------------------------------------------

    def _spike_points(self) -> List[Fraction]:
        out = []
        for t in self._jump_candidates():
            dm, dp = self.jump_at(t)
            if dm or dp:
                out.append(t)
        return out

    def derivative_zero_set(self) -> IntervalSet:
        """Exactly the points where f is differentiable with derivative 0.

        Interior zero sets come from the pieces; a breakpoint joins when
        the function is continuous there and both one-sided slopes are
        exactly zero.  Domain endpoints use their single available side.
        """
        parts = [
            p.deriv_zero_set(s.lo, s.hi) for s, p in zip(self.spans, self.pieces)
        ]
        acc = IntervalSet.empty()
        for part in parts:
            acc = acc.union(part)
        pts = []
        for t in self._jump_candidates():
            dm, dp = self.jump_at(t)
            if dm or dp:
                continue
            sides = []
            if t > self.domain.lo:
                i = self._span_index(t)
                if self.spans[i].lo == t:
                    i -= 1
                sides.append(self.pieces[i].slope_at(t))
            if t < self.domain.hi:
                i = self._span_index(t)
                if self.spans[i].hi == t:
                    i += 1
                sides.append(self.pieces[i].slope_at(t))
            if sides and all(_definitely_zero_slope(v) for v in sides):
                pts.append(t)
        if pts:
            acc = acc.union(IntervalSet([point(t) for t in pts]))
        spikes = self._spike_points()
        if spikes:
            acc = acc.difference(IntervalSet([point(t) for t in spikes]))
        return acc

    def stationary_set(self) -> IntervalSet:
        """Points whose local difference-quotient hull contains zero.

        Extends the derivative zero set with every breakpoint where the
        one-sided slopes (with jumps read as signed infinities) straddle
        zero, which is exactly when the hull pinches onto zero there.
        """
        acc = IntervalSet.empty()
        for s, p in zip(self.spans, self.pieces):
            acc = acc.union(p.deriv_zero_set(s.lo, s.hi))
        pts = []
        for t in self._jump_candidates():
            dm, dp = self.jump_at(t)
            sides_lo: List[Fraction] = []
            sides_hi: List[Fraction] = []

            def push(val):
                if isinstance(val, float):
                    sides_lo.append(val)
                    sides_hi.append(val)
                else:
                    sides_lo.append(_raw_lower(val))
                    sides_hi.append(_raw_upper(val))

            if t > self.domain.lo:
                if dm:
                    push(inf if dm > 0 else -inf)
                else:
                    i = self._span_index(t)
                    if self.spans[i].lo == t:
                        i -= 1
                    push(self.pieces[i].slope_at(t))
            if t < self.domain.hi:
                if dp:
                    push(inf if dp > 0 else -inf)
                else:
                    i = self._span_index(t)
                    if self.spans[i].hi == t:
                        i += 1
                    push(self.pieces[i].slope_at(t))
            if sides_lo and min(sides_lo) <= 0 <= max(sides_hi):
                pts.append(t)
        if pts:
            acc = acc.union(IntervalSet([point(t) for t in pts]))
        return acc

    def min_slope_lower_bound(self, lo, hi) -> Optional[Fraction]:
        """A certified lower bound for difference quotients over [lo, hi].

        None when the window contains a downward jump, touches a stub, or
        a piece cannot bound its slope: quotient bounds from piece slopes
        are only sound without downward jumps in between.
        """
        lo = max(Fraction(lo), self.domain.lo)
        hi = min(Fraction(hi), self.domain.hi)
        if lo >= hi:
            return None
        best: Optional[Fraction] = None
        for s, p in zip(self.spans, self.pieces):
            o_lo, o_hi = max(s.lo, lo), min(s.hi, hi)
            if o_lo >= o_hi:
                continue
            try:
                b = p.slope_range(o_lo, o_hi)[0]
            except ComposureError:
                return None
            b = _raw_lower(b)
            best = b if best is None else min(best, b)
        for t in self._jump_candidates():
            if lo <= t <= hi:
                try:
                    dm, dp = self.jump_at(t)
                except ComposureError:
                    return None
                if dm < 0 or dp < 0:
                    return None
        return best

    def strictly_increasing_certified(self) -> bool:
        """True only with a proof: every piece strictly rises and no jump falls."""
        try:
            for s, p in zip(self.spans, self.pieces):
                for _u, _v, direction, _a, _b in p.monotone_branches(s.lo, s.hi):
                    if direction != 1:
                        return False
            for t in self._jump_candidates():
                dm, dp = self.jump_at(t)
                if dm < 0 or dp < 0:
                    return False
        except ComposureError:
            return False
        return True

    def __repr__(self):
        name = self.label if self.label is not None else "%d pieces" % len(self.pieces)
        return "PiecewiseFn(%s on %s)" % (name, format_interval(self.domain))


def _definitely_zero_slope(v) -> bool:
    if isinstance(v, BoundedReal):
        return v.err == 0 and v.value == 0
    return v == 0


def _jump_component(d) -> Fraction:
    if isinstance(d, BoundedReal):
        if d.err == 0:
            return d.value
        if d.lower() > 0 or d.upper() < 0:
            raise DomainError("jump magnitude known only as a nonzero enclosure")
        return Fraction(0)
    return Fraction(d)


def _branch_preimage(piece, u, v, direction, u_closed, v_closed, comp):
    """Preimage of one target component under one monotone branch.

    Returns (interval, exact, note) or None when the branch misses the
    component entirely.
    """
    note = ""
    if direction == 0:
        val = piece.eval_raw(u)
        verdict = _membership(val, comp)
        if verdict == "out":
            return None
        iv = Interval(u, v, u_closed, v_closed)
        if verdict == "maybe":
            return iv, False, "constant level decided from an enclosure"
        return iv, True, ""

    increasing = direction > 0
    f_u = piece.eval_raw(u)
    f_v = piece.eval_raw(v)
    lo_val, hi_val = (f_u, f_v) if increasing else (f_v, f_u)
    t_lo = None if isinstance(comp.lo, float) else comp.lo
    t_hi = None if isinstance(comp.hi, float) else comp.hi

    # reject branches entirely outside the component's value range
    if t_lo is not None and _cmp_raw(hi_val, t_lo) == "lt":
        return None
    if t_hi is not None and _cmp_raw(lo_val, t_hi) == "gt":
        return None
    if t_lo is not None and not comp.lo_closed and _cmp_raw(hi_val, t_lo) == "eq":
        return None
    if t_hi is not None and not comp.hi_closed and _cmp_raw(lo_val, t_hi) == "eq":
        return None

    exact = True

    def cut(y, y_closed, low_side):
        # low_side: solving for the x-endpoint where values enter the
        # component from below (increasing) or leave it (decreasing)
        nonlocal exact, note
        anchored_end = u if (low_side == increasing) else v
        anchored_closed = u_closed if (low_side == increasing) else v_closed
        anchor_val = f_u if (low_side == increasing) else f_v
        if y is None:
            return anchored_end, anchored_closed
        c = _cmp_raw(anchor_val, y)
        inside = "gt" if low_side else "lt"
        if c == inside:
            return anchored_end, anchored_closed
        if c == "eq":
            return anchored_end, anchored_closed and y_closed
        if c == "maybe":
            exact = False
            note = "value comparison decided from an enclosure"
            return anchored_end, anchored_closed
        bl, bh, ex = piece.invert_on(u, v, y, increasing)
        bl, bh = max(bl, u), min(bh, v)
        if not ex:
            exact = False
            note = "endpoint from a certified bracket"
            take = bl if (low_side == increasing) else bh
            return take, True
        take = bl
        return take, y_closed

    if increasing:
        x_lo, lo_c = cut(t_lo, comp.lo_closed, True)
        x_hi, hi_c = cut(t_hi, comp.hi_closed, False)
    else:
        x_lo, lo_c = cut(t_hi, comp.hi_closed, False)
        x_hi, hi_c = cut(t_lo, comp.lo_closed, True)
    if x_lo > x_hi:
        return None
    if x_lo == x_hi and not (lo_c and hi_c):
        return None
    return Interval(x_lo, x_hi, lo_c, hi_c), exact, note


# -- canonical constructors -----------------------------------------------------


def _single(domain: Interval, piece: _Piece, label: str) -> PiecewiseFn:
    return PiecewiseFn(domain, (domain,), (piece,), label=label)


def const_fn(value, domain: Interval = None) -> PiecewiseFn:
    domain = domain if domain is not None else closed(0, 1)
    value = Fraction(value)
    label = "const %s on %s" % (value, format_interval(domain))
    return _single(domain, ConstPiece(value), label)


def identity_fn() -> PiecewiseFn:
    return _single(closed(0, 1), AffinePiece(1, 0), "identity")


def cubic_fn() -> PiecewiseFn:
    return _single(closed(-1, 1), PolyPiece((0, 0, 0, 1)), "cubic")


def cubic_drift_fn() -> PiecewiseFn:
    """x + x**3 on [-1, 1]: slope at least 1 everywhere."""
    return _single(closed(-1, 1), PolyPiece((0, 1, 0, 1)), "cubic-drift")


def square_fn() -> PiecewiseFn:
    return _single(closed(0, 1), PowerPiece(2, 1, 0, 0), "square")


def abs_fn() -> PiecewiseFn:
    dom = closed(-1, 1)
    spans = (Interval(-1, 0, True, False), closed(0, 1))
    pieces = (AffinePiece(-1, 0), AffinePiece(1, 0))
    return PiecewiseFn(dom, spans, pieces, label="abs")


def heaviside_fn() -> PiecewiseFn:
    dom = closed(0, 1)
    spans = (Interval(0, Fraction(1, 2), True, False), closed(Fraction(1, 2), 1))
    pieces = (ConstPiece(Fraction(0)), ConstPiece(Fraction(1)))
    return PiecewiseFn(dom, spans, pieces, label="heaviside")


def cantor_stub_fn() -> PiecewiseFn:
    piece = SingularStubPiece("cantor-function", 0, 0, 1, 1, 1)
    return _single(closed(0, 1), piece, "cantor-stub")


def _stage_spans(stage):
    entries = [(c.lo, c, True) for c in stage.surviving.components]
    entries.extend((g.lo, g, False) for g, _gen in stage.gaps)
    entries.sort(key=lambda e: e[0])
    return entries


def _cantor_label(base: str, n: int, schedule: Optional[RemovalSchedule]) -> Optional[str]:
    if schedule is None or schedule == RemovalSchedule.default():
        return "%s %d" % (base, n)
    default_prefix = schedule.prefix == ()
    if default_prefix:
        return "%s %d %s %s" % (base, n, schedule.tail_first, schedule.tail_ratio)
    return None


def cantor_bump_fn(n: int, schedule: Optional[RemovalSchedule] = None) -> PiecewiseFn:
    """The stage-n bump train: zero on survivors, one bump per gap.

    Its derivative vanishes exactly on the surviving set and at the gap
    midpoints, so the derivative zero set has the stage measure plus a
    finite set of points.
    """
    stage = svc_stage(n, schedule)
    spans = []
    pieces: List[_Piece] = []
    for _, iv, surviving in _stage_spans(stage):
        if surviving:
            spans.append(iv)
            pieces.append(ConstPiece(Fraction(0)))
        else:
            spans.append(iv)
            pieces.append(BumpPiece(iv.lo, iv.hi))
    return PiecewiseFn(
        closed(0, 1),
        tuple(spans),
        tuple(pieces),
        label=_cantor_label("cantor-bump", n, schedule),
        cantor_stage=n,
        schedule=stage.schedule,
    )


def cantor_integral_fn(
    n: int, schedule: Optional[RemovalSchedule] = None, units: int = 1024
) -> PiecewiseFn:
    """The stage-n accumulated bump: constant on survivors, rising on gaps.

    Nondecreasing but constant on a set of positive measure; values come
    as certified enclosures.
    """
    stage = svc_stage(n, schedule)
    spans = []
    pieces: List[_Piece] = []
    offset = BoundedReal.exact(0)
    for _, iv, surviving in _stage_spans(stage):
        spans.append(iv)
        if surviving:
            pieces.append(ConstPiece(offset))
        else:
            piece = IntegralPiece(iv.lo, iv.hi, offset, units)
            pieces.append(piece)
            # next plateau sits exactly at this piece's right-end value
            offset = piece.eval_raw(iv.hi)
    return PiecewiseFn(
        closed(0, 1),
        tuple(spans),
        tuple(pieces),
        label=_cantor_label("cantor-integral", n, schedule),
        cantor_stage=n,
        schedule=stage.schedule,
    )


# -- the text form ----------------------------------------------------------------
#
# fnspec       := shorthand | "piecewise" interval ":" item (";" item)*
# item         := span kind | assignments
# kind         := "const" q | "affine" m b | "poly" c0 c1 ... | "power" k s x0 c
#               | "bump" a b [offset] | "stub" name lo loval hi hival variation
# assignments  := ("@" point "=" value)+
# shorthand    := "identity" | "cubic" | "cubic-drift" | "square" | "abs"
#               | "heaviside" | "cantor-stub" | "const" q "on" interval
#               | "cantor-bump" n [first ratio] | "cantor-integral" n [first ratio]
#
# Rationals are "p/q" or integer or decimal literals; intervals use the
# bracket notation of the interval serializer, without embedded spaces.


_SIMPLE_SHORTHANDS = {
    "identity": identity_fn,
    "cubic": cubic_fn,
    "cubic-drift": cubic_drift_fn,
    "square": square_fn,
    "abs": abs_fn,
    "heaviside": heaviside_fn,
    "cantor-stub": cantor_stub_fn,
}


def _parse_rat(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError("bad rational token %r" % tok) from exc


def _parse_cantor(tokens: List[str], builder) -> PiecewiseFn:
    if len(tokens) not in (1, 3):
        raise DomainError("expected STAGE or STAGE FIRST RATIO")
    try:
        n = int(tokens[0])
    except ValueError as exc:
        raise DomainError("bad stage number %r" % tokens[0]) from exc
    if len(tokens) == 1:
        return builder(n)
    sched = RemovalSchedule.geometric(_parse_rat(tokens[1]), _parse_rat(tokens[2]))
    return builder(n, sched)


def _parse_piece_kind(tokens: List[str]) -> _Piece:
    kind, args = tokens[0], tokens[1:]
    if kind == "const":
        if len(args) != 1:
            raise DomainError("const takes one value")
        return ConstPiece(_parse_rat(args[0]))
    if kind == "affine":
        if len(args) != 2:
            raise DomainError("affine takes slope and intercept")
        return AffinePiece(_parse_rat(args[0]), _parse_rat(args[1]))
    if kind == "poly":
        if not args:
            raise DomainError("poly takes ascending coefficients")
        return PolyPiece(tuple(_parse_rat(a) for a in args))
    if kind == "power":
        if len(args) != 4:
            raise DomainError("power takes k, scale, center, offset")
        return PowerPiece(int(args[0]), _parse_rat(args[1]), _parse_rat(args[2]), _parse_rat(args[3]))
    if kind == "bump":
        if len(args) not in (2, 3):
            raise DomainError("bump takes gap ends and an optional offset")
        off = _parse_rat(args[2]) if len(args) == 3 else Fraction(0)
        return BumpPiece(_parse_rat(args[0]), _parse_rat(args[1]), off)
    if kind == "stub":
        if len(args) != 6:
            raise DomainError("stub takes name, ends with values, and variation")
        return SingularStubPiece(
            args[0],
            _parse_rat(args[1]),
            _parse_rat(args[2]),
            _parse_rat(args[3]),
            _parse_rat(args[4]),
            _parse_rat(args[5]),
        )
    raise DomainError("unknown piece kind %r" % kind)


def parse_fn_spec(text: str) -> PiecewiseFn:
    """Parse the one-line function grammar documented above."""
    text = text.strip()
    if not text:
        raise DomainError("empty function spec")
    if text.startswith("piecewise"):
        return _parse_piecewise(text)
    head, *rest = text.split()
    if ":" in head:
        parts = [p for p in head.split(":") if p]
        head, rest = parts[0], parts[1:] + rest
    if head in _SIMPLE_SHORTHANDS:
        if rest:
            raise DomainError("%s takes no arguments" % head)
        return _SIMPLE_SHORTHANDS[head]()
    if head == "const":
        if len(rest) != 3 or rest[1] != "on":
            raise DomainError("expected const VALUE on INTERVAL")
        return const_fn(_parse_rat(rest[0]), parse_interval(rest[2]))
    if head == "cantor-bump":
        return _parse_cantor(rest, cantor_bump_fn)
    if head == "cantor-integral":
        return _parse_cantor(rest, cantor_integral_fn)
    raise DomainError("unknown function spec %r" % text)


def _parse_piecewise(text: str) -> PiecewiseFn:
    body = text[len("piecewise"):].strip()
    if ":" not in body:
        raise DomainError("expected piecewise INTERVAL: pieces")
    dom_tok, rest = body.split(":", 1)
    domain = parse_interval(dom_tok.strip())
    spans: List[Interval] = []
    pieces: List[_Piece] = []
    assigned: List[Tuple[Fraction, Fraction]] = []
    for chunk in rest.split(";"):
        tokens = chunk.split()
        if not tokens:
            continue
        plain = []
        for tok in tokens:
            if tok.startswith("@"):
                body_tok = tok[1:]
                if "=" not in body_tok:
                    raise DomainError("assignments look like @point=value")
                t_tok, v_tok = body_tok.split("=", 1)
                assigned.append((_parse_rat(t_tok), _parse_rat(v_tok)))
            else:
                plain.append(tok)
        if not plain:
            continue
        if len(plain) < 2:
            raise DomainError("each piece needs a span and a kind")
        spans.append(parse_interval(plain[0]))
        pieces.append(_parse_piece_kind(plain[1:]))
    if not spans:
        raise DomainError("piecewise spec declares no pieces")
    return PiecewiseFn(domain, tuple(spans), tuple(pieces), tuple(assigned))


def format_fn_spec(fn: PiecewiseFn) -> str:
    """Canonical text for a function; parse_fn_spec round-trips it."""
    if fn.label is not None:
        return fn.label
    chunks = []
    for s, p in zip(fn.spans, fn.pieces):
        chunks.append("%s %s" % (format_interval(s), p.spec_tokens()))
    for t, v in fn.assigned:
        if isinstance(v, BoundedReal):
            if v.err != 0:
                raise DomainError("enclosure assignment has no exact text form")
            v = v.value
        chunks.append("@%s=%s" % (t, v))
    return "piecewise %s: %s" % (format_interval(fn.domain), "; ".join(chunks))
