"""Value universe for state variables, plus declared ranges.

Values are plain Python objects: ``str`` (symbols), ``int``, ``float``,
``bool``, tuples of values, and the :data:`UNKNOWN` sentinel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable


class _Unknown:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "unknown"

    def __reduce__(self):
        return (_Unknown, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return 0x5EED


UNKNOWN = _Unknown()


def is_unknown(v: Any) -> bool:
    return v is UNKNOWN


def value_key(v: Any) -> tuple:
    """Total canonical ordering: variant tag first, then natural order inside."""
    if v is UNKNOWN:
        return (0,)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, int):
        return (2, v)
    if isinstance(v, float):
        return (3, v)
    if isinstance(v, str):
        return (4, v)
    if isinstance(v, tuple):
        return (5, tuple(value_key(x) for x in v))
    if v is None:
        return (6,)
    raise TypeError(f"not a state value: {v!r}")


def sorted_values(values: Iterable[Any]) -> list:
    return sorted(values, key=value_key)


def is_numeric(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    integer: bool = False

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("empty interval")

    def __contains__(self, v):
        if not is_numeric(v):
            return False
        if self.integer and not isinstance(v, int):
            return False
        return self.lo <= v <= self.hi

    @property
    def finite(self):
        return self.integer and math.isfinite(self.lo) and math.isfinite(self.hi)

    def values(self):
        if not self.finite:
            raise ValueError("continuous range cannot be enumerated")
        return list(range(int(self.lo), int(self.hi) + 1))


@dataclass(frozen=True)
class Grid:
    """Integer 2-D points ``(x, y)`` inside a rectangle."""

    xlo: int
    xhi: int
    ylo: int
    yhi: int

    def __contains__(self, v):
        return (
            isinstance(v, tuple)
            and len(v) == 2
            and all(is_numeric(c) for c in v)
            and self.xlo <= v[0] <= self.xhi
            and self.ylo <= v[1] <= self.yhi
        )

    finite = True

    def values(self):
        return [(x, y) for x in range(self.xlo, self.xhi + 1) for y in range(self.ylo, self.yhi + 1)]


class Finite(frozenset):
    """A declared finite set of values."""

    finite = True

    def values(self):
        return sorted_values(self)


def as_range(r):
    if isinstance(r, (Interval, Grid, Finite)):
        return r
    if isinstance(r, (set, frozenset, list, tuple)):
        if len(r) == 0:
            raise ValueError("range must be non-empty")
        return Finite(r)
    raise TypeError(f"unsupported range declaration: {r!r}")
