"""Finite-stage Smith–Volterra–Cantor ("fat Cantor") sets on [0,1].

Each stage removes an open interval from the center of every surviving
component.  Removal lengths come from a :class:`RemovalSchedule`: finitely
many explicit generations followed by a geometric tail, which keeps the
total-removal bound decidable in exact arithmetic.  The default schedule
removes length 4^-k at generation k, leaving limit measure 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import DomainError, ScheduleTooFat
from .intervals import Interval, IntervalSet

STAGE_CAP = 30


@dataclass(frozen=True)
class RemovalSchedule:
    """Removal length per generation: explicit prefix, then geometric tail.

    Generation k >= 1 removes ``2^(k-1)`` intervals of length ``r_k``.  With
    ``m = len(prefix)``, generations 1..m use the prefix entries and
    generation ``m + 1 + i`` uses ``tail_first * tail_ratio**i``.  The tail
    ratio must lie in (0, 1/2) so the removed total has a closed form, and
    the total removed length must stay strictly below 1.
    """

    prefix: tuple = ()
    tail_first: Fraction = Fraction(1, 4)
    tail_ratio: Fraction = Fraction(1, 4)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(Fraction(r) for r in self.prefix))
        object.__setattr__(self, "tail_first", Fraction(self.tail_first))
        object.__setattr__(self, "tail_ratio", Fraction(self.tail_ratio))
        if any(r <= 0 for r in self.prefix) or self.tail_first <= 0:
            raise ScheduleTooFat("removal lengths must be positive")
        if not 0 < self.tail_ratio < Fraction(1, 2):
            raise ScheduleTooFat("tail ratio must lie strictly between 0 and 1/2")
        if self.total_removed() >= 1:
            raise ScheduleTooFat(
                "total removed length %s is not < 1" % self.total_removed()
            )
        # Each prefix removal must fit strictly inside the equal-length
        # components it splits.  Inside the geometric tail this is automatic
        # once the total is < 1, so only the prefix needs stepping through.
        length = Fraction(1)
        for k, r in enumerate(self.prefix, start=1):
            if r >= length:
                raise ScheduleTooFat(
                    "generation-%d removal %s does not fit in component of length %s"
                    % (k, r, length)
                )
            length = (length - r) / 2

    @staticmethod
    def default() -> "RemovalSchedule":
        """r_k = 4^-k, the schedule with limit measure exactly 1/2."""
        return RemovalSchedule((), Fraction(1, 4), Fraction(1, 4))

    @staticmethod
    def geometric(first, ratio) -> "RemovalSchedule":
        """Pure geometric rule r_k = first * ratio**(k-1)."""
        return RemovalSchedule((), Fraction(first), Fraction(ratio))

    def removal_length(self, k: int) -> Fraction:
        """Length r_k removed from each component at generation k >= 1."""
        if k < 1:
            raise DomainError("generations are 1-indexed")
        m = len(self.prefix)
        if k <= m:
            return self.prefix[k - 1]
        return self.tail_first * self.tail_ratio ** (k - m - 1)

    def removed_through(self, n: int) -> Fraction:
        """Total length removed by stages 1..n: sum of 2^(k-1) * r_k."""
        if n < 0:
            raise DomainError("stage must be >= 0")
        m = len(self.prefix)
        total = sum(
            (Fraction(2) ** (k - 1)) * self.prefix[k - 1]
            for k in range(1, min(n, m) + 1)
        )
        if n > m:
            # sum over i = 0..n-m-1 of 2^(m+i) * tail_first * ratio^i
            q2 = 2 * self.tail_ratio
            terms = n - m
            geo = (1 - q2**terms) / (1 - q2)
            total += Fraction(2) ** m * self.tail_first * geo
        return Fraction(total)

    def total_removed(self) -> Fraction:
        """Limit of removed_through(n): exact geometric series."""
        m = len(self.prefix)
        total = sum(
            (Fraction(2) ** (k - 1)) * self.prefix[k - 1] for k in range(1, m + 1)
        )
        total += Fraction(2) ** m * self.tail_first / (1 - 2 * self.tail_ratio)
        return Fraction(total)

    def limit_measure(self) -> Fraction:
        return 1 - self.total_removed()

    def stage_measure(self, n: int) -> Fraction:
        """Exact measure of the stage-n surviving set, without materializing it."""
        return 1 - self.removed_through(n)

    def stage_component_length(self, n: int) -> Fraction:
        """Common length of the 2^n surviving components at stage n."""
        return self.stage_measure(n) / Fraction(2) ** n


@dataclass(frozen=True)
class FatCantorStage:
    """Stage-n approximant: 2^n surviving closed intervals plus tagged gaps.

    ``gaps`` holds (open interval, generation) pairs in left-to-right order.
    Surviving components and gaps together partition [0,1].
    """

    n: int
    surviving: IntervalSet
    gaps: tuple
    schedule: RemovalSchedule = field(default_factory=RemovalSchedule.default)

    def measure(self) -> Fraction:
        return self.surviving.measure()

    def component_length(self) -> Fraction:
        """Common length of the surviving components."""
        if self.n == 0:
            return Fraction(1)
        return self.surviving.components[0].length()

    def gap_for(self, x) -> "tuple[Interval, int] | None":
        """The (gap, generation) containing x, or None if x survives."""
        from bisect import bisect_right

        x = Fraction(x)
        los = [g.lo for g, _ in self.gaps]
        i = bisect_right(los, x)
        if i and self.gaps[i - 1][0].contains(x):
            return self.gaps[i - 1]
        return None


def svc_stage(
    n: int,
    sched: Optional[RemovalSchedule] = None,
    *,
    max_stage: int = STAGE_CAP,
) -> FatCantorStage:
    """Materialize the stage-n fat Cantor approximant with exact endpoints.

    Removals are centered.  Raises ScheduleTooFat if a removal does not fit
    strictly inside every surviving component, DomainError past the stage cap.
    """
    if n < 0:
        raise DomainError("stage must be >= 0")
    if n > max_stage:
        raise DomainError(
            "stage %d exceeds cap %d; use RemovalSchedule.stage_measure for "
            "exact measures at deeper stages" % (n, max_stage)
        )
    if sched is None:
        sched = RemovalSchedule.default()

    comps = [(Fraction(0), Fraction(1))]
    gaps = []
    for k in range(1, n + 1):
        r = sched.removal_length(k)
        half = r / 2
        nxt = []
        for lo, hi in comps:
            if r >= hi - lo:
                raise ScheduleTooFat(
                    "generation-%d removal %s does not fit in [%s, %s]" % (k, r, lo, hi)
                )
            mid = (lo + hi) / 2
            gaps.append((Interval(mid - half, mid + half, False, False), k))
            nxt.append((lo, mid - half))
            nxt.append((mid + half, hi))
        comps = nxt

    surviving = IntervalSet.__new__(IntervalSet)
    ivs = tuple(Interval(lo, hi, True, True) for lo, hi in comps)
    surviving._comps = ivs
    surviving._los = [c.lo for c in ivs]
    gaps.sort(key=lambda g: g[0].lo)
    return FatCantorStage(n, surviving, tuple(gaps), sched)
