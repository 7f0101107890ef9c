"""Certified real enclosures backed by exact rational arithmetic.

A :class:`BoundedReal` stores a rational midpoint and a rational error
radius; the true value is guaranteed to lie in [value - err, value + err].
Transcendental endpoints (exp, 2**x) are computed with directed rounding
from mpmath's low-level ``libmp`` layer and converted to exact fractions,
then padded outward by a couple of ulps as a safety margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import libmp

from .errors import DomainError, PrecisionUnreachable

DEFAULT_PREC = 96
MAX_PREC = 4096

# Below 2**-EXP_CAP, enclosure endpoints stop tracking the true magnitude and
# collapse to [0, 2**-EXP_CAP]: still a valid bound, but the fraction
# denominators stay a few kilobits instead of growing with the exponent.
EXP_CAP = 2**14


def mpf_to_frac(t) -> Fraction:
    """Exact value of a raw mpf tuple (sign, mantissa, exponent, bitcount)."""
    sign, man, exp, _ = t
    if man == 0:
        if exp != 0:
            raise DomainError("non-finite mpf has no rational value")
        return Fraction(0)
    v = Fraction(int(man)) * Fraction(2) ** exp
    return -v if sign else v


def _pad(lo: Fraction, hi: Fraction, prec: int):
    """Widen an enclosure outward by ~4 ulps relative to its magnitude."""
    eps = Fraction(1, 2 ** (prec - 2))
    slack = max(abs(lo), abs(hi)) * eps
    return lo - slack, hi + slack


def exp_enclosure(q: Fraction, prec: int = DEFAULT_PREC):
    """Certified bounds (lo, hi) with lo <= e**q <= hi, lo >= 0."""
    q = Fraction(q)
    if q <= -EXP_CAP:
        # e**q < 2**(q/ln 2) < 2**-EXP_CAP
        return Fraction(0), Fraction(1, 2**EXP_CAP)
    if q >= EXP_CAP:
        raise PrecisionUnreachable("exp argument %s too large to enclose" % q)
    lo_t = libmp.from_rational(q.numerator, q.denominator, prec, "f")
    hi_t = libmp.from_rational(q.numerator, q.denominator, prec, "c")
    lo = mpf_to_frac(libmp.mpf_exp(lo_t, prec, "f"))
    hi = mpf_to_frac(libmp.mpf_exp(hi_t, prec, "c"))
    lo, hi = _pad(lo, hi, prec)
    return max(lo, Fraction(0)), hi


def ln2_enclosure(prec: int = DEFAULT_PREC):
    two = libmp.from_int(2)
    lo = mpf_to_frac(libmp.mpf_log(two, prec, "f"))
    hi = mpf_to_frac(libmp.mpf_log(two, prec, "c"))
    return _pad(lo, hi, prec)


def pow2_enclosure(q: Fraction, prec: int = DEFAULT_PREC):
    """Certified bounds for 2**q, exact when q is an integer."""
    q = Fraction(q)
    if q.denominator == 1:
        n = q.numerator
        if n <= -EXP_CAP:
            return Fraction(0), Fraction(1, 2**EXP_CAP)
        if n >= EXP_CAP:
            raise PrecisionUnreachable("2**%d too large to enclose" % n)
        v = Fraction(2) ** n
        return v, v
    if q <= -EXP_CAP:
        return Fraction(0), Fraction(1, 2**EXP_CAP)
    if q >= EXP_CAP:
        raise PrecisionUnreachable("2**%s too large to enclose" % q)
    l2lo, l2hi = ln2_enclosure(prec)
    if q >= 0:
        arg_lo, arg_hi = q * l2lo, q * l2hi
    else:
        arg_lo, arg_hi = q * l2hi, q * l2lo
    lo, _ = exp_enclosure(arg_lo, prec)
    _, hi = exp_enclosure(arg_hi, prec)
    return lo, hi


@dataclass(frozen=True)
class BoundedReal:
    """A real number known to lie within err of value, both exact rationals."""

    value: Fraction
    err: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        object.__setattr__(self, "err", Fraction(self.err))
        if self.err < 0:
            raise DomainError("error radius must be nonnegative")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def exact(q) -> "BoundedReal":
        return BoundedReal(Fraction(q), Fraction(0))

    @staticmethod
    def from_bounds(lo, hi) -> "BoundedReal":
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            raise DomainError("bounds out of order")
        return BoundedReal((lo + hi) / 2, (hi - lo) / 2)

    # -- bounds --------------------------------------------------------------

    def lower(self) -> Fraction:
        return self.value - self.err

    def upper(self) -> Fraction:
        return self.value + self.err

    def contains(self, q) -> bool:
        q = Fraction(q)
        return self.lower() <= q <= self.upper()

    def definitely_positive(self) -> bool:
        return self.lower() > 0

    def definitely_negative(self) -> bool:
        return self.upper() < 0

    # -- arithmetic (exact interval propagation) ------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return BoundedReal(self.value + other.value, self.err + other.err)

    __radd__ = __add__

    def __neg__(self):
        return BoundedReal(-self.value, self.err)

    def __sub__(self, other):
        other = _coerce(other)
        return BoundedReal(self.value - other.value, self.err + other.err)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        v = self.value * other.value
        e = (
            abs(self.value) * other.err
            + abs(other.value) * self.err
            + self.err * other.err
        )
        return BoundedReal(v, e)

    __rmul__ = __mul__

    def __abs__(self):
        lo, hi = self.lower(), self.upper()
        if lo >= 0:
            return self
        if hi <= 0:
            return -self
        m = max(-lo, hi)
        return BoundedReal.from_bounds(Fraction(0), m)

    def widen(self, extra) -> "BoundedReal":
        return BoundedReal(self.value, self.err + Fraction(extra))

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return "BoundedReal(%s, err=%s)" % (self.value, self.err)


def _coerce(x) -> BoundedReal:
    if isinstance(x, BoundedReal):
        return x
    return BoundedReal.exact(x)


def decimal_str(q, digits: int = 12) -> str:
    """Deterministic fixed-point decimal rendering of an exact rational."""
    q = Fraction(q)
    if digits < 0:
        raise DomainError("digits must be >= 0")
    scaled = q * Fraction(10) ** digits
    n = round(scaled)  # Fraction.__round__: ties to even, deterministic
    sign = "-" if n < 0 else ""
    a = abs(n)
    if digits == 0:
        return sign + str(a)
    ip, fp = divmod(a, 10**digits)
    return "%s%d.%0*d" % (sign, ip, digits, fp)


def sci_str(q, sig: int = 6) -> str:
    """Deterministic scientific-notation rendering of an exact rational."""
    q = Fraction(q)
    if q == 0:
        return "0e0"
    sign = "-" if q < 0 else ""
    a = abs(q)
    # bit-length estimate avoids float overflow/underflow on extreme values
    e = (a.numerator.bit_length() - a.denominator.bit_length()) * 30103 // 100000
    while a >= Fraction(10) ** (e + 1):
        e += 1
    while a < Fraction(10) ** e:
        e -= 1
    mant = a / Fraction(10) ** e
    digits = round(mant * 10 ** (sig - 1))
    if digits >= 10**sig:  # rounding carried over, e.g. 9.9999 -> 10.000
        digits //= 10
        e += 1
    s = str(digits)
    return "%s%s.%se%d" % (sign, s[0], s[1:], e)
