"""Outward-rounded interval arithmetic for the certification pipeline.

Scalar intervals are closed [lo, hi] pairs of floats.  Every arithmetic
operation widens its result by one ulp on each side (math.nextafter), so a
computed interval always contains the exact real-arithmetic image of its
operands.  Operations that are exact in IEEE-754 (negation, absolute value)
skip the widening.

The module also carries vectorized twins of the core operations working on
parallel numpy lo/hi arrays.  Those are what the large randomized soundness
sweeps and the box elimination front use; the scalar class is the reference
the twins are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Interval",
    "VInterval",
    "Box",
    "interval_op",
    "norm4",
    "varr_widen",
    "varr_add",
    "varr_sub",
    "varr_neg",
    "varr_mul",
    "varr_div",
    "varr_abs",
    "varr_square",
    "varr_sqrt",
]

_INF = math.inf


def _widen(lo: float, hi: float) -> tuple[float, float]:
    return math.nextafter(lo, -_INF), math.nextafter(hi, _INF)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; endpoints must be finite with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("interval endpoints must be finite")
        if lo > hi:
            raise DomainError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @staticmethod
    def _coerce(other):
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, float)):
            return Interval(float(other), float(other))
        return None

    def __add__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Interval(*_widen(self.lo + other.lo, self.hi + other.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Interval(*_widen(self.lo - other.hi, self.hi - other.lo))

    def __rsub__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__sub__(self)

    def __neg__(self) -> "Interval":
        # Negation is exact, no widening.
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        p = (self.lo * other.lo, self.lo * other.hi,
             self.hi * other.lo, self.hi * other.hi)
        return Interval(*_widen(min(p), max(p)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.lo <= 0.0 <= other.hi:
            raise DomainError(
                f"division by interval containing zero: [{other.lo}, {other.hi}]")
        q = (self.lo / other.lo, self.lo / other.hi,
             self.hi / other.lo, self.hi / other.hi)
        return Interval(*_widen(min(q), max(q)))

    def __rtruediv__(self, other) -> "Interval":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__truediv__(self)

    def __abs__(self) -> "Interval":
        # |.| on endpoints is exact.
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return Interval(-self.hi, -self.lo)
        return Interval(0.0, max(-self.lo, self.hi))

    def square(self) -> "Interval":
        # A square is nonnegative, so the outward widening never needs to
        # push the lower endpoint below zero.
        if self.lo >= 0.0:
            lo, hi = _widen(self.lo * self.lo, self.hi * self.hi)
            return Interval(max(0.0, lo), hi)
        if self.hi <= 0.0:
            lo, hi = _widen(self.hi * self.hi, self.lo * self.lo)
            return Interval(max(0.0, lo), hi)
        m = max(-self.lo, self.hi)
        return Interval(0.0, math.nextafter(m * m, _INF))

    def sqrt(self) -> "Interval":
        # Partial-function semantics: the image of [lo, hi] intersected with
        # the domain [0, inf).  Raises only when the whole interval is below.
        if self.hi < 0.0:
            raise DomainError(f"sqrt of interval entirely below zero: hi={self.hi}")
        lo = 0.0 if self.lo <= 0.0 else max(0.0, math.nextafter(math.sqrt(self.lo), -_INF))
        return Interval(lo, math.nextafter(math.sqrt(self.hi), _INF))

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise DomainError(
                f"empty intersection: [{self.lo}, {self.hi}] and [{other.lo}, {other.hi}]")
        return Interval(lo, hi)


def norm4(a: Interval, b: Interval, c: Interval, d: Interval) -> Interval:
    """Euclidean norm of a 4-vector of intervals."""
    s = a.square() + b.square() + c.square() + d.square()
    return s.sqrt()


_BINARY = {
    "add": Interval.__add__,
    "sub": Interval.__sub__,
    "mul": Interval.__mul__,
    "div": Interval.__truediv__,
}


def interval_op(op: str, *operands: Interval) -> Interval:
    """Dispatch by name: add | sub | mul | div (binary), abs (unary), norm4.

    Raises DomainError for a division whose divisor contains zero, and
    ValueError for an unknown op name or wrong arity.
    """
    for x in operands:
        if not isinstance(x, Interval):
            raise TypeError(f"expected Interval, got {type(x).__name__}")
    if op in _BINARY:
        if len(operands) != 2:
            raise ValueError(f"op {op!r} takes 2 operands, got {len(operands)}")
        return _BINARY[op](operands[0], operands[1])
    if op == "abs":
        if len(operands) != 1:
            raise ValueError(f"op 'abs' takes 1 operand, got {len(operands)}")
        return abs(operands[0])
    if op == "norm4":
        if len(operands) != 4:
            raise ValueError(f"op 'norm4' takes 4 operands, got {len(operands)}")
        return norm4(*operands)
    raise ValueError(f"unknown interval op {op!r}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: a 4-tuple of intervals, one per coordinate."""

    coords: tuple[Interval, Interval, Interval, Interval]

    def __post_init__(self):
        if len(self.coords) != 4 or not all(isinstance(c, Interval) for c in self.coords):
            raise DomainError("Box takes exactly 4 Interval coordinates")
        object.__setattr__(self, "coords", tuple(self.coords))

    @classmethod
    def from_bounds(cls, lo, hi) -> "Box":
        return cls(tuple(Interval(float(a), float(b)) for a, b in zip(lo, hi, strict=True)))

    def center(self) -> tuple[float, float, float, float]:
        return tuple(c.mid for c in self.coords)

    def radius(self) -> float:
        """Upper bound on the distance from the center to any box point."""
        r = 0.0
        for c in self.coords:
            h = 0.5 * c.width
            r += h * h
        return math.nextafter(math.sqrt(r), _INF)

    def contains(self, point) -> bool:
        return all(c.contains(float(x)) for c, x in zip(self.coords, point, strict=True))


# ---------------------------------------------------------------------------
# Vectorized twins.  Each takes parallel lo/hi ndarrays and returns new
# (lo, hi) pairs with the same outward 1-ulp widening as the scalar class.
# Callers guarantee lo <= hi elementwise.

def varr_widen(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)


def varr_add(alo, ahi, blo, bhi):
    return varr_widen(alo + blo, ahi + bhi)


def varr_sub(alo, ahi, blo, bhi):
    return varr_widen(alo - bhi, ahi - blo)


def varr_neg(alo, ahi):
    return -ahi, -alo


def varr_mul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return varr_widen(lo, hi)


def varr_div(alo, ahi, blo, bhi):
    if np.any((blo <= 0.0) & (bhi >= 0.0)):
        raise DomainError("vector division by an interval containing zero")
    q1 = alo / blo
    q2 = alo / bhi
    q3 = ahi / blo
    q4 = ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return varr_widen(lo, hi)


def varr_abs(alo, ahi):
    lo = np.where(alo >= 0.0, alo, np.where(ahi <= 0.0, -ahi, 0.0))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi


def varr_square(alo, ahi):
    s1 = alo * alo
    s2 = ahi * ahi
    lo = np.where(alo >= 0.0, s1, np.where(ahi <= 0.0, s2, 0.0))
    hi = np.maximum(s1, s2)
    lo_w, hi_w = varr_widen(lo, hi)
    return np.maximum(0.0, lo_w), hi_w


def varr_sqrt(alo, ahi):
    if np.any(ahi < 0.0):
        raise DomainError("vector sqrt of interval entirely below zero")
    lo = np.maximum(0.0, np.nextafter(np.sqrt(np.maximum(0.0, alo)), -np.inf))
    hi = np.nextafter(np.sqrt(ahi), np.inf)
    return lo, hi


class VInterval:
    """Array of intervals: parallel lo/hi ndarrays with the same outward
    rounding as the scalar class.  Supports the arithmetic needed by the
    expression trees so scalar and vectorized evaluations share one code
    path.  Scalars broadcast as degenerate intervals."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)

    @staticmethod
    def _coerce(other):
        if isinstance(other, VInterval):
            return other
        if isinstance(other, (int, float)):
            x = float(other)
            return VInterval(x, x)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return VInterval(*varr_add(self.lo, self.hi, other.lo, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return VInterval(*varr_sub(self.lo, self.hi, other.lo, other.hi))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__sub__(self)

    def __neg__(self):
        return VInterval(*varr_neg(self.lo, self.hi))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return VInterval(*varr_mul(self.lo, self.hi, other.lo, other.hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return VInterval(*varr_div(self.lo, self.hi, other.lo, other.hi))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__truediv__(self)

    def __abs__(self):
        return VInterval(*varr_abs(self.lo, self.hi))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (self.lo <= x) & (x <= self.hi)
