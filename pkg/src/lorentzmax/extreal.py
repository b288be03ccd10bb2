"""Non-negative reals with an unbounded binary exponent.

Measures on the second-type test spaces reach 2**32000 and beyond, so a
value is stored as ``mantissa * 2**exponent`` with the mantissa in [1, 2)
and the exponent an arbitrary Python int.  A zero mantissa is the zero
value.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Real



def _normalize(m: float, e: int) -> tuple[float, int]:
    if m == 0.0:
        return 0.0, 0
    fm, fe = math.frexp(m)
    return 2.0 * fm, e + fe - 1


class ExtReal:
    """Non-negative real ``m * 2**e`` with ``m`` in [1, 2) (or ``m == 0``)."""

    __slots__ = ("m", "e")

    def __init__(self, value: "float | int | Fraction | ExtReal" = 0.0):
        if isinstance(value, ExtReal):
            self.m, self.e = value.m, value.e
            return
        if isinstance(value, Integral):
            self.m, self.e = _from_int(int(value))
            return
        if isinstance(value, Fraction):
            num = _from_int(value.numerator)
            den = _from_int(value.denominator)
            m, e = _normalize(num[0] / den[0], num[1] - den[1])
            self.m, self.e = m, e
            return
        x = float(value)
        if x < 0 or math.isnan(x) or math.isinf(x):
            raise ValueError(f"ExtReal needs a finite non-negative value, got {value!r}")
        self.m, self.e = _normalize(x, 0)

    @classmethod
    def raw(cls, m: float, e: int) -> "ExtReal":
        """Build from an unnormalised pair; ``m`` must be finite and >= 0."""
        obj = cls.__new__(cls)
        obj.m, obj.e = _normalize(m, int(e))
        return obj

    @classmethod
    def from_log2(cls, x: float) -> "ExtReal":
        if x == -math.inf:
            return cls(0.0)
        n = math.floor(x)
        return cls.raw(2.0 ** (x - n), n)

    @classmethod
    def pow2(cls, n: int) -> "ExtReal":
        return cls.raw(1.0, n)

    # -- conversions ------------------------------------------------------
    def __float__(self) -> float:
        if self.m == 0.0:
            return 0.0
        if self.e > 1023:
            return math.inf
        if self.e < -1100:
            return 0.0
        return math.ldexp(self.m, self.e)

    def log2(self) -> float:
        if self.m == 0.0:
            return -math.inf
        return self.e + math.log2(self.m)

    def to_int(self) -> int:
        """Floor of the value (exact, since the mantissa holds 53 bits)."""
        if self.m == 0.0 or self.e < 0:
            return 0
        mi = int(math.ldexp(self.m, 52))
        shift = self.e - 52
        return mi << shift if shift >= 0 else mi >> -shift

    def is_zero(self) -> bool:
        return self.m == 0.0

    def __bool__(self) -> bool:
        return self.m != 0.0

    # -- arithmetic -------------------------------------------------------
    def __mul__(self, other) -> "ExtReal":
        o = _coerce(other)
        if self.m == 0.0 or o.m == 0.0:
            return ExtReal(0.0)
        return ExtReal.raw(self.m * o.m, self.e + o.e)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtReal":
        o = _coerce(other)
        if o.m == 0.0:
            raise ZeroDivisionError("ExtReal division by zero")
        if self.m == 0.0:
            return ExtReal(0.0)
        return ExtReal.raw(self.m / o.m, self.e - o.e)

    def __rtruediv__(self, other) -> "ExtReal":
        return _coerce(other) / self

    def __add__(self, other) -> "ExtReal":
        o = _coerce(other)
        if o.m == 0.0:
            return ExtReal(self)
        if self.m == 0.0:
            return ExtReal(o)
        a, b = (self, o) if self.e >= o.e else (o, self)
        d = a.e - b.e
        if d > 64:
            return ExtReal(a)
        return ExtReal.raw(a.m + math.ldexp(b.m, -d), a.e)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtReal":
        o = _coerce(other)
        if o > self:
            raise ValueError("ExtReal subtraction would go negative")
        if o.m == 0.0:
            return ExtReal(self)
        d = self.e - o.e
        if d > 64:
            return ExtReal(self)
        return ExtReal.raw(self.m - math.ldexp(o.m, -d), self.e)

    def __pow__(self, y) -> "ExtReal":
        if self.m == 0.0:
            if y > 0:
                return ExtReal(0.0)
            if y == 0:
                return ExtReal(1.0)
            raise ZeroDivisionError("0 to a negative power")
        if isinstance(y, Integral):
            y = int(y)
            if abs(y) <= 64:
                # repeated squaring keeps the exponent exact
                result, base, k = ExtReal(1.0), self, abs(y)
                while k:
                    if k & 1:
                        result = result * base
                    base = base * base
                    k >>= 1
                return ExtReal(1.0) / result if y < 0 else result
        # y * e computed exactly: y is a dyadic rational
        num, den = Fraction(y).as_integer_ratio() if isinstance(y, Fraction) else float(y).as_integer_ratio()
        whole, rem = divmod(self.e * num, den)
        frac = rem / den + float(y) * math.log2(self.m)
        n = math.floor(frac)
        return ExtReal.raw(2.0 ** (frac - n), whole + n)

    # -- ordering ---------------------------------------------------------
    def _key(self):
        return (0, 0, 0.0) if self.m == 0.0 else (1, self.e, self.m)

    def __eq__(self, other) -> bool:
        try:
            o = _coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() == o._key()

    def __lt__(self, other) -> bool:
        return self._key() < _coerce(other)._key()

    def __le__(self, other) -> bool:
        return self._key() <= _coerce(other)._key()

    def __gt__(self, other) -> bool:
        return self._key() > _coerce(other)._key()

    def __ge__(self, other) -> bool:
        return self._key() >= _coerce(other)._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        if self.m == 0.0:
            return "ExtReal(0)"
        if -1000 < self.e < 1000:
            return f"ExtReal({float(self)!r})"
        return f"ExtReal({self.m!r}*2**{self.e})"


def _from_int(n: int) -> tuple[float, int]:
    if n < 0:
        raise ValueError("ExtReal needs a non-negative value")
    b = n.bit_length()
    if b <= 53:
        return _normalize(float(n), 0)
    shift = b - 53
    return _normalize(float(n >> shift), shift)


def _coerce(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, (Real, Fraction)):
        return ExtReal(x)
    raise TypeError(f"cannot use {type(x).__name__} as ExtReal")


def xsum(terms) -> ExtReal:
    """Sum of non-negative terms, accumulated largest-first.

    Ties in the ordering are broken by input position so the reduction
    order (and hence the rounding) is a function of the inputs alone.
    """
    items = [t if isinstance(t, ExtReal) else ExtReal(t) for t in terms]
    items = [t for t in items if t.m != 0.0]
    if not items:
        return ExtReal(0.0)
    items.sort(key=lambda t: (t.e, t.m), reverse=True)
    top = items[0].e
    acc = 0.0
    for t in items:
        d = top - t.e
        if d > 1060:
            break
        acc += math.ldexp(t.m, -d)
    return ExtReal.raw(acc, top)


def xmax(terms) -> ExtReal:
    best = ExtReal(0.0)
    for t in terms:
        if t > best:
            best = t
    return best


def rel_diff(a: ExtReal, b: ExtReal) -> float:
    """|a - b| / max(a, b), computed without leaving the extended range."""
    a, b = _coerce(a), _coerce(b)
    if a.m == 0.0 and b.m == 0.0:
        return 0.0
    hi, lo = (a, b) if a >= b else (b, a)
    if lo.m == 0.0:
        return 1.0
    return 1.0 - float(lo / hi)


ZERO = ExtReal(0.0)
ONE = ExtReal(1.0)
