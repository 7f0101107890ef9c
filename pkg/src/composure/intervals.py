"""Exact interval sets over the rationals.

Endpoints are ``fractions.Fraction`` values, with ``math.inf`` / ``-math.inf``
allowed as open endpoints of unbounded intervals.  An :class:`IntervalSet` is
kept normalized: components are sorted, pairwise disjoint, and non-adjacent,
so equal sets always have equal component tuples.  All set algebra and the
Lebesgue measure of a bounded set are exact.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import DomainError, UnboundedSet

Rat = Fraction
Endpoint = Union[Fraction, float]  # float only for +/-inf sentinels

_INF = math.inf


def _as_endpoint(x) -> Endpoint:
    if isinstance(x, float):
        if math.isinf(x):
            return x
        raise DomainError("finite endpoints must be exact rationals, got float %r" % x)
    return Fraction(x)


@dataclass(frozen=True)
class Interval:
    """One connected interval with independent endpoint closure flags.

    Degenerate closed intervals ``[p, p]`` represent single points.  An
    infinite endpoint must be open, and an interval may not be empty.
    """

    lo: Endpoint
    hi: Endpoint
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", _as_endpoint(self.lo))
        object.__setattr__(self, "hi", _as_endpoint(self.hi))
        if self.lo == -_INF and self.lo_closed:
            raise DomainError("-inf endpoint must be open")
        if self.hi == _INF and self.hi_closed:
            raise DomainError("inf endpoint must be open")
        if self.lo == _INF or self.hi == -_INF:
            raise DomainError("endpoints out of order")
        if self.lo > self.hi:
            raise DomainError("empty interval: lo > hi")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise DomainError("degenerate interval must be closed on both sides")

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_bounded(self) -> bool:
        return not (isinstance(self.lo, float) or isinstance(self.hi, float))

    def length(self) -> Fraction:
        if not self.is_bounded:
            raise UnboundedSet("length of an unbounded interval")
        return self.hi - self.lo

    def contains(self, x) -> bool:
        x = Fraction(x)
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def interior(self) -> "Interval | None":
        if self.is_point:
            return None
        return Interval(self.lo, self.hi, False, False)

    def closure(self) -> "Interval":
        lo_c = not isinstance(self.lo, float)
        hi_c = not isinstance(self.hi, float)
        return Interval(self.lo, self.hi, lo_c, hi_c)

    def __repr__(self):
        return "Interval(%s)" % format_interval(self)


def closed(lo, hi) -> Interval:
    return Interval(lo, hi, True, True)


def open_iv(lo, hi) -> Interval:
    return Interval(lo, hi, False, False)


def point(p) -> Interval:
    return Interval(p, p, True, True)


class IntervalSet:
    """A finite union of intervals, stored in normal form."""

    __slots__ = ("_comps", "_los")

    def __init__(self, components: Iterable[Interval] = ()):
        comps = list(components)
        for c in comps:
            if not isinstance(c, Interval):
                raise DomainError("IntervalSet components must be Interval, got %r" % (c,))
        if len(comps) > 1:
            comps = _normalize(comps)
        self._comps = tuple(comps)
        self._los = [c.lo for c in self._comps]

    # -- constructors -------------------------------------------------------

    @staticmethod
    def empty() -> "IntervalSet":
        return _EMPTY

    @staticmethod
    def of(*components: Interval) -> "IntervalSet":
        return IntervalSet(components)

    @staticmethod
    def real_line() -> "IntervalSet":
        return IntervalSet([Interval(-_INF, _INF, False, False)])

    # -- basic queries -------------------------------------------------------

    @property
    def components(self) -> tuple:
        return self._comps

    @property
    def is_empty(self) -> bool:
        return not self._comps

    @property
    def is_bounded(self) -> bool:
        return all(c.is_bounded for c in self._comps)

    def contains(self, x) -> bool:
        x = Fraction(x)
        i = bisect_right(self._los, x)
        # component i-1 is the last one with lo <= x; x == lo of component i
        # is impossible here because bisect_right puts equal keys to the left.
        if i and self._comps[i - 1].contains(x):
            return True
        return False

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def measure(self) -> Fraction:
        """Exact total length.  Raises UnboundedSet on infinite endpoints."""
        total = Fraction(0)
        for c in self._comps:
            total += c.length()
        return total

    def endpoints(self) -> list:
        """All finite endpoint values, sorted, without duplicates."""
        vals = set()
        for c in self._comps:
            if not isinstance(c.lo, float):
                vals.add(c.lo)
            if not isinstance(c.hi, float):
                vals.add(c.hi)
        return sorted(vals)

    def interior(self) -> "IntervalSet":
        return IntervalSet([iv for c in self._comps for iv in [c.interior()] if iv])

    def closure(self) -> "IntervalSet":
        return IntervalSet([c.closure() for c in self._comps])

    def is_discrete(self) -> bool:
        """True when every component is a single point (so the set is null)."""
        return all(c.is_point for c in self._comps)

    # -- algebra -------------------------------------------------------------

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return combine(self, other, "union")

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return combine(self, other, "intersection")

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return combine(self, other, "difference")

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return combine(self, other, "symmetric_difference")

    def is_subset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty

    def is_disjoint(self, other: "IntervalSet") -> bool:
        return self.intersection(other).is_empty

    # -- dunder plumbing -----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._comps == other._comps

    def __hash__(self):
        return hash(self._comps)

    def __iter__(self):
        return iter(self._comps)

    def __len__(self):
        return len(self._comps)

    def __repr__(self):
        return "IntervalSet.parse(%r)" % format_interval_set(self)


_EMPTY = IntervalSet.__new__(IntervalSet)
_EMPTY._comps = ()
_EMPTY._los = []


def _normalize(comps) -> list:
    """Rebuild an arbitrary interval list as sorted, disjoint, non-adjacent.

    Sort-and-sweep merge: overlapping components fuse, as do components that
    are adjacent with at least one closed endpoint at the shared value
    (``[0,1)`` and ``[1,2]`` become ``[0,2]``; ``(0,1)`` and ``(1,2)`` stay
    apart because the point ``1`` belongs to neither).
    """
    ordered = sorted(comps, key=lambda c: (c.lo, not c.lo_closed))
    out = []
    lo, lo_c, hi, hi_c = None, None, None, None
    for c in ordered:
        if lo is None:
            lo, lo_c, hi, hi_c = c.lo, c.lo_closed, c.hi, c.hi_closed
            continue
        joins = c.lo < hi or (c.lo == hi and (c.lo_closed or hi_c))
        if joins:
            if c.hi > hi:
                hi, hi_c = c.hi, c.hi_closed
            elif c.hi == hi:
                hi_c = hi_c or c.hi_closed
        else:
            out.append(Interval(lo, hi, lo_c, hi_c))
            lo, lo_c, hi, hi_c = c.lo, c.lo_closed, c.hi, c.hi_closed
    if lo is not None:
        out.append(Interval(lo, hi, lo_c, hi_c))
    return out


# -- the atomization engine ----------------------------------------------


def _sample_points(values):
    """Representative points for the elementary regions cut by ``values``.

    Yields (kind, x) pairs in increasing order, where kind is "point" for a
    cut value itself and "open" for a sample inside the open region between
    consecutive cuts (or the unbounded tails).
    """
    if not values:
        yield ("open", Fraction(0), -_INF, _INF)
        return
    yield ("open", values[0] - 1, -_INF, values[0])
    for i, v in enumerate(values):
        yield ("point", v, v, v)
        if i + 1 < len(values):
            mid = (v + values[i + 1]) / 2
            yield ("open", mid, v, values[i + 1])
    yield ("open", values[-1] + 1, values[-1], _INF)


def combine(a: IntervalSet, b: IntervalSet, op: str) -> IntervalSet:
    """Exact boolean combination of two interval sets.

    ``op`` is one of ``"union"``, ``"intersection"``, ``"difference"``,
    ``"symmetric_difference"``.  Works by cutting the line at every finite
    endpoint of either operand, deciding membership of each elementary region
    (single cut points and the open regions between them) by sampling, and
    stitching the selected regions back into maximal intervals.
    """
    try:
        keep = _OPS[op]
    except KeyError:
        raise DomainError("unknown set operation %r" % op) from None
    values = sorted(set(a.endpoints()) | set(b.endpoints()))

    out = []
    run_lo = run_lo_closed = None  # type: ignore[assignment]
    prev_hi = prev_hi_closed = None  # type: ignore[assignment]
    for kind, x, lo, hi in _sample_points(values):
        selected = keep(a.contains(x), b.contains(x))
        if kind == "open" and isinstance(lo, float) and isinstance(hi, float):
            # no cuts at all: the whole line is one region
            if selected:
                out.append(Interval(-_INF, _INF, False, False))
            break
        if selected:
            if run_lo is None:
                if kind == "point":
                    run_lo, run_lo_closed = x, True
                else:
                    run_lo, run_lo_closed = lo, False
            prev_hi = x if kind == "point" else hi
            prev_hi_closed = kind == "point"
        else:
            if run_lo is not None:
                out.append(Interval(run_lo, prev_hi, run_lo_closed, prev_hi_closed))
                run_lo = None
    else:
        if run_lo is not None:
            out.append(Interval(run_lo, prev_hi, run_lo_closed, prev_hi_closed))

    result = IntervalSet.__new__(IntervalSet)
    result._comps = tuple(out)
    result._los = [c.lo for c in out]
    return result


_OPS = {
    "union": lambda p, q: p or q,
    "intersection": lambda p, q: p and q,
    "difference": lambda p, q: p and not q,
    "symmetric_difference": lambda p, q: p != q,
}


# -- serialization ---------------------------------------------------------


def _format_endpoint(x: Endpoint) -> str:
    if isinstance(x, float):
        return "inf" if x > 0 else "-inf"
    return str(x)


def _parse_endpoint(tok: str) -> Endpoint:
    tok = tok.strip()
    if tok in ("inf", "+inf", "oo", "+oo"):
        return _INF
    if tok in ("-inf", "-oo"):
        return -_INF
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError("bad endpoint %r" % tok) from exc


def format_interval(iv: Interval) -> str:
    if iv.is_point:
        return "{%s}" % _format_endpoint(iv.lo)
    lb = "[" if iv.lo_closed else "("
    rb = "]" if iv.hi_closed else ")"
    return "%s%s,%s%s" % (lb, _format_endpoint(iv.lo), _format_endpoint(iv.hi), rb)


def format_interval_set(s: IntervalSet) -> str:
    """Canonical text form, e.g. ``[0,3/8]∪[5/8,1]``; the empty set is ``∅``."""
    if s.is_empty:
        return "∅"
    return "∪".join(format_interval(c) for c in s.components)


_IV_RE = re.compile(r"^\s*([\[\(])\s*([^,\s]+)\s*,\s*([^,\s\]\)]+)\s*([\]\)])\s*$")
_PT_RE = re.compile(r"^\s*\{\s*([^{}\s]+)\s*\}\s*$")


def parse_interval(text: str) -> Interval:
    m = _PT_RE.match(text)
    if m:
        v = _parse_endpoint(m.group(1))
        return Interval(v, v, True, True)
    m = _IV_RE.match(text)
    if not m:
        raise DomainError("cannot parse interval %r" % text)
    lb, lo_tok, hi_tok, rb = m.groups()
    return Interval(_parse_endpoint(lo_tok), _parse_endpoint(hi_tok), lb == "[", rb == "]")


def parse_interval_set(text: str) -> IntervalSet:
    """Inverse of :func:`format_interval_set`.

    Accepts ``∪`` or the ASCII alias ``u`` (surrounded by optional spaces)
    between components, and ``∅`` / ``empty`` for the empty set.
    """
    t = text.strip()
    if t in ("∅", "empty", "{}", ""):
        return IntervalSet.empty()
    parts = re.split(r"∪|\bu\b|\bU\b", t)
    return IntervalSet([parse_interval(p) for p in parts])
