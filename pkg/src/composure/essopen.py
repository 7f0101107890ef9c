"""Essential openness: witnesses and verification for representable sets.

A set is essentially open when it differs from an open set by a null set.
Representable sets here are finite interval unions with finitely many
marked null points removed or added, so every one of them is essentially
open and the witness (U, V, W) can be produced and verified exactly:
U open, V and W null, and (U \\ V) disjoint-union W reconstructs the set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ComposureError, DomainError
from .intervals import IntervalSet


@dataclass(frozen=True)
class MarkedSet:
    """A finite interval union with explicit null-point edits.

    ``removed_null`` points are carved out of ``base``; ``added_null``
    points are isolated additions outside ``base``.  Both must be finite
    point sets, which keeps every question about the set exactly decidable.
    """

    base: IntervalSet
    removed_null: IntervalSet = IntervalSet.empty()
    added_null: IntervalSet = IntervalSet.empty()

    def __post_init__(self):
        for name in ("base", "removed_null", "added_null"):
            if not isinstance(getattr(self, name), IntervalSet):
                raise DomainError("%s must be an IntervalSet" % name)
        if not self.removed_null.is_discrete():
            raise DomainError("removed_null must be a finite point set")
        if not self.added_null.is_discrete():
            raise DomainError("added_null must be a finite point set")
        if not self.removed_null.is_subset(self.base):
            raise DomainError("removed_null must lie inside base")
        if not self.added_null.is_disjoint(self.base):
            raise DomainError("added_null must be disjoint from base")

    @staticmethod
    def of(base: IntervalSet) -> "MarkedSet":
        return MarkedSet(base, IntervalSet.empty(), IntervalSet.empty())

    def effective(self) -> IntervalSet:
        """The set actually represented: (base minus removed) plus added."""
        return self.base.difference(self.removed_null).union(self.added_null)


@dataclass(frozen=True)
class EssOpenWitness:
    """Decomposition X = (U \\ V) disjoint-union W with U open, V, W null."""

    U: IntervalSet
    V: IntervalSet
    W: IntervalSet

    def reconstruct(self) -> IntervalSet:
        return self.U.difference(self.V).union(self.W)


def essential_open_witness(x: MarkedSet) -> EssOpenWitness:
    """Produce the canonical witness for a representable set.

    U is the union of interiors of the non-degenerate base components (so
    removed null points interior to a component stay covered by U and are
    collected in V); W absorbs everything in the set outside U: closed
    component endpoints, degenerate components, and added null points.
    """
    u = x.base.interior()
    v = x.removed_null.intersection(u)
    w = x.effective().difference(u)
    return EssOpenWitness(u, v, w)


def from_countable_components(y: MarkedSet) -> EssOpenWitness:
    """Witness built component by component, degenerate ones swept into W.

    This is the finite stand-in for the countable-components construction:
    the base may freely mix non-degenerate intervals and single points.
    The result coincides with :func:`essential_open_witness`.
    """
    return essential_open_witness(y)


def verify_witness(x: MarkedSet, w: EssOpenWitness) -> bool:
    """Exact check: U open, V and W null and well-placed, reconstruction equal.

    Every comparison is exact set algebra; measure-zero means measure
    exactly zero, and the reconstruction must equal the effective set as an
    IntervalSet, not merely up to null discrepancies.
    """
    if any(c.lo_closed or c.hi_closed for c in w.U.components):
        return False
    try:
        if w.V.measure() != 0 or w.W.measure() != 0:
            return False
    except ComposureError:
        return False
    if not w.V.is_subset(w.U):
        return False
    if not w.W.is_disjoint(w.U):
        return False
    return w.reconstruct() == x.effective()


def symmetric_defect(x: MarkedSet, w: EssOpenWitness) -> Fraction:
    """Exact measure of (effective set) symmetric-difference U."""
    return x.effective().symmetric_difference(w.U).measure()
