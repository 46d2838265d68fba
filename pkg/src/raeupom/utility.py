"""Utility algebra for the two value functions: efficiency and success ratio.

Efficiency values are reciprocals of accumulated cost, so combining two
successive values adds their costs; the identity is ``inf`` (zero cost).
Success-ratio values multiply; the identity is 1. Zero (failure) absorbs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import KindMismatch, NonPositiveCost

INF = math.inf


class Kind(str, Enum):
    EFFICIENCY = "efficiency"
    SUCCESS_RATIO = "success-ratio"

    @classmethod
    def parse(cls, text) -> "Kind":
        if isinstance(text, Kind):
            return text
        aliases = {"eff": cls.EFFICIENCY, "sr": cls.SUCCESS_RATIO, "success_ratio": cls.SUCCESS_RATIO}
        key = str(text).lower()
        return aliases.get(key) or cls(key)


EFF = Kind.EFFICIENCY
SR = Kind.SUCCESS_RATIO


def one(kind: Kind) -> float:
    """Identity element of the combination for ``kind``."""
    return INF if kind is EFF else 1.0


def oplus_f(a: float, b: float, kind: Kind) -> float:
    """Combine two raw utility floats of the same kind."""
    if kind is SR:
        return a * b
    if a == 0.0 or b == 0.0:
        return 0.0
    if a == INF:
        return b
    if b == INF:
        return a
    return 1.0 / (1.0 / a + 1.0 / b)


@dataclass(frozen=True)
class UtilityValue:
    kind: Kind
    value: float

    def __post_init__(self):
        if self.value < 0 or math.isnan(self.value):
            raise ValueError(f"utility must be non-negative, got {self.value}")
        if self.kind is SR and self.value > 1.0 + 1e-12:
            raise ValueError(f"success ratio above 1: {self.value}")

    def __float__(self):
        return float(self.value)


def oplus(u1, u2, kind: Kind | None = None):
    """``u1 ⊕ u2``; accepts two :class:`UtilityValue` or two floats plus ``kind``."""
    if isinstance(u1, UtilityValue) and isinstance(u2, UtilityValue):
        if u1.kind is not u2.kind:
            raise KindMismatch(f"{u1.kind.value} vs {u2.kind.value}")
        return UtilityValue(u1.kind, oplus_f(u1.value, u2.value, u1.kind))
    if isinstance(u1, UtilityValue) or isinstance(u2, UtilityValue):
        raise KindMismatch("cannot mix UtilityValue and bare floats")
    if kind is None:
        raise KindMismatch("kind required for bare floats")
    return oplus_f(float(u1), float(u2), Kind.parse(kind))


def action_value(kind: Kind, cost: float, failed: bool) -> float:
    if not (cost > 0 and math.isfinite(cost)):
        raise NonPositiveCost(f"action cost must be finite and positive, got {cost}")
    if failed:
        return 0.0
    return 1.0 / cost if Kind.parse(kind) is EFF else 1.0


def clamp(v: float, eff_cap: float) -> float:
    """Finite surrogate of ``v`` for averaging; the algebra itself keeps ``inf``."""
    return eff_cap if v > eff_cap else v
