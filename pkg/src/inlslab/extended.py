"""Extended rationals: exact fractions plus a genuine +infinity element.

Exponent arithmetic for admissible pairs has to distinguish "r = infinity"
from "r very large", and comparisons must stay total, so infinity is a real
member of the type instead of a float sentinel.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering


@total_ordering
class XR:
    """An exact rational or +infinity, with total ordering."""

    __slots__ = ("_num",)

    def __init__(self, value=None, *, infinite=False):
        if infinite:
            self._num = None
        elif isinstance(value, XR):
            self._num = value._num
        else:
            self._num = Fraction(value)

    @property
    def is_infinite(self):
        return self._num is None

    @property
    def fraction(self):
        if self._num is None:
            raise ValueError("infinite value has no finite fraction")
        return self._num

    def __eq__(self, other):
        other = _coerce(other)
        return self._num == other._num

    def __lt__(self, other):
        other = _coerce(other)
        if self._num is None:
            return False
        if other._num is None:
            return True
        return self._num < other._num

    def __hash__(self):
        return hash(self._num)

    def __add__(self, other):
        other = _coerce(other)
        if self._num is None or other._num is None:
            return INF
        return XR(self._num + other._num)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if self._num is None and other._num is None:
            raise ValueError("inf - inf is undefined")
        if self._num is None:
            return INF
        if other._num is None:
            raise ValueError("finite - inf leaves the extended-positive range")
        return XR(self._num - other._num)

    def __mul__(self, other):
        other = _coerce(other)
        if self._num is None or other._num is None:
            return INF
        return XR(self._num * other._num)

    __rmul__ = __mul__

    def reciprocal(self):
        """1/x with the conventions 1/inf = 0 and 1/0 = inf."""
        if self._num is None:
            return XR(0)
        if self._num == 0:
            return INF
        return XR(1 / self._num)

    def __float__(self):
        if self._num is None:
            return float("inf")
        return float(self._num)

    def __repr__(self):
        if self._num is None:
            return "XR(inf)"
        return f"XR({self._num})"

    def __str__(self):
        if self._num is None:
            return "inf"
        return str(self._num)


def _coerce(value):
    if isinstance(value, XR):
        return value
    return XR(value)


INF = XR(infinite=True)


def xr(value) -> XR:
    """Build an XR from an int, Fraction, string, or XR."""
    return _coerce(value)
