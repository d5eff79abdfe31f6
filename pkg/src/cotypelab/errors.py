"""Exception types shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass


class CotypeLabError(Exception):
    """Base class for every structured error raised by this package."""


@dataclass(frozen=True)
class MetricViolation:
    """One violated metric axiom with a witness pair/triple."""

    kind: str
    where: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        if self.where:
            idx = ",".join(str(i) for i in self.where)
            return f"{self.kind}({idx}): {self.detail}"
        return f"{self.kind}: {self.detail}"


class MetricValidationError(CotypeLabError):
    """Raised when a distance matrix fails the metric axioms.

    Carries every violation found, each with a witness pair or triple.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:8])
        extra = len(self.violations) - 8
        if extra > 0:
            shown += f"; ... ({extra} more)"
        super().__init__(f"metric axioms violated: {shown}")


class BadParameter(CotypeLabError):
    """A parameter is outside its documented range."""


class TooSmall(CotypeLabError):
    """The input set has fewer points than the operation requires."""


class TooLarge(CotypeLabError):
    """The instance exceeds the configured exhaustive-enumeration limit."""


class NoValidSplit(CotypeLabError):
    """No bipartition of a subset reaches the separation demanded by C.

    Certifies that C is below the separation constant restricted to the
    subsets encountered by the recursive builder.
    """

    def __init__(self, subset, diameter: float, needed: float, achieved: float):
        self.subset = tuple(subset)
        self.diameter = float(diameter)
        self.needed = float(needed)
        self.achieved = float(achieved)
        self.required_ratio = float(diameter) / float(achieved) if achieved > 0 else float("inf")
        super().__init__(
            f"NoValidSplit{self.subset}: needs separation >= {self.needed!r}, "
            f"best bipartition achieves {self.achieved!r}"
        )


class Overflow(CotypeLabError):
    """A scaling-function value is too large to represent."""


class DimensionMismatch(CotypeLabError):
    """Torus function dimensions do not match the declared (n, m)."""


class IdentityMismatch(CotypeLabError):
    """Internal consistency failure: direct and edge-sum computations disagree."""


class BudgetTooSmall(CotypeLabError):
    """Search budget is missing or below the minimum for the strategy."""


class TooLargeForExhaustive(CotypeLabError):
    """The exhaustive search space exceeds the hard enumeration limit."""


class NotDense(CotypeLabError):
    """The image of a map is not c-dense in the target."""

    def __init__(self, witness: int, gap: float, c: float):
        self.witness = int(witness)
        self.gap = float(gap)
        self.c = float(c)
        super().__init__(
            f"NotDense({witness}): nearest image point at distance {gap!r} > c = {c!r}"
        )


class OutOfRange(CotypeLabError):
    """A numeric argument violates the stated precondition."""


class EmptySource(CotypeLabError):
    """A point map has an empty source space."""
