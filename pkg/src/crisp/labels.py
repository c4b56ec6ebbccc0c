"""Impact label spaces shared across the pipeline.

Judged citations carry an ordinal three-way label; the ground-truth
dataset is binary.  ``binarize`` maps between the two: only High counts
as impact-revealing.
"""

from __future__ import annotations

from enum import IntEnum


class ImpactCategory(IntEnum):
    """Ordinal impact of a citation edge: Low < Medium < High."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @classmethod
    def from_string(cls, text: str) -> "ImpactCategory":
        """Parse a category name case-insensitively ("High", "high", ...).

        Raises ValueError for anything that is not one of the three
        category names; unknown strings are never silently coerced.
        """
        try:
            return _BY_NAME[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown impact category: {text!r}") from None

    def to_string(self) -> str:
        return _TO_NAME[self]


_BY_NAME = {
    "low": ImpactCategory.LOW,
    "medium": ImpactCategory.MEDIUM,
    "high": ImpactCategory.HIGH,
}
_TO_NAME = {
    ImpactCategory.LOW: "Low",
    ImpactCategory.MEDIUM: "Medium",
    ImpactCategory.HIGH: "High",
}


class BinaryLabel(IntEnum):
    """Ground-truth label space for a citation edge."""

    OTHER = 0
    IMPACT_REVEALING = 1

    @classmethod
    def from_string(cls, text: str) -> "BinaryLabel":
        key = text.strip().lower().replace("_", "-")
        if key == "impact-revealing":
            return cls.IMPACT_REVEALING
        if key == "other":
            return cls.OTHER
        raise ValueError(f"unknown binary label: {text!r}")

    def to_string(self) -> str:
        return "impact-revealing" if self is BinaryLabel.IMPACT_REVEALING else "other"


def binarize(category: ImpactCategory) -> BinaryLabel:
    """Collapse the ordinal label space to the binary one.

    High maps to impact-revealing; Medium and Low both map to other.
    """
    if category is ImpactCategory.HIGH:
        return BinaryLabel.IMPACT_REVEALING
    return BinaryLabel.OTHER
