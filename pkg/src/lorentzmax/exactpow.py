"""Exact comparisons of products of integer powers with rational exponents.

``compare(lhs, rhs)`` decides the sign of prod(b**e for lhs) - prod(b**e for rhs)
for positive integer bases and rational exponents.  When the common
denominator is small the question is settled in integers; otherwise both
sides are compared in log2 with a guard band, and a margin below the band
returns ``None`` ("fragile") so callers can keep searching instead of
trusting rounding noise.
"""
from __future__ import annotations

import math
from fractions import Fraction

MAX_DENOMINATOR = 64
MAX_BITS = 4_000_000
GUARD = 2.0 ** -30


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _log2_int(n: int) -> float:
    b = n.bit_length()
    if b <= 1000:
        return math.log2(n)
    shift = b - 60
    return math.log2(n >> shift) + shift


def compare(lhs, rhs):
    """Sign of lhs - rhs, each a list of (base, exponent); None when undecidable."""
    terms = [(int(b), as_fraction(e)) for b, e in lhs] + [(int(b), -as_fraction(e)) for b, e in rhs]
    for b, _ in terms:
        if b <= 0:
            raise ValueError("bases must be positive integers")
    terms = [(b, e) for b, e in terms if b != 1 and e != 0]
    if not terms:
        return 0
    den = 1
    for _, e in terms:
        den = den * e.denominator // math.gcd(den, e.denominator)
    bits = sum(abs(e * den) * b.bit_length() for b, e in terms)
    if den <= MAX_DENOMINATOR and bits <= MAX_BITS:
        left, right = 1, 1
        for b, e in terms:
            k = int(e * den)
            if k > 0:
                left *= b ** k
            else:
                right *= b ** (-k)
        return (left > right) - (left < right)
    logs = [float(e) * _log2_int(b) for b, e in terms]
    total = math.fsum(logs)
    scale = max(1.0, math.fsum(abs(x) for x in logs))
    if abs(total) < GUARD * scale:
        return None
    return 1 if total > 0 else -1


def log2_of(terms) -> float:
    return math.fsum(float(as_fraction(e)) * _log2_int(int(b)) for b, e in terms)


def smallest_int(pred, lo: int, estimate: int | None = None) -> int:
    """Smallest integer x >= lo with pred(x), for pred monotone (false then true)."""
    x = max(lo, estimate if estimate is not None else lo)
    step = 1
    if pred(x):
        hi = x
        while True:
            cand = hi - step
            if cand < lo:
                low = lo - 1
                break
            if not pred(cand):
                low = cand
                break
            hi = cand
            step *= 2
    else:
        low = x
        while not pred(x + step):
            low = x + step
            step *= 2
            if step.bit_length() > MAX_BITS:
                raise OverflowError("search diverged")
        hi = x + step
    # pred(low) is false (or low is below the range), pred(hi) is true
    while hi - low > 1:
        mid = (low + hi) // 2
        if pred(mid):
            hi = mid
        else:
            low = mid
    return hi


def int_estimate(log2_value: float) -> int:
    """An integer near 2**log2_value (only used to seed searches)."""
    if log2_value < 0:
        return 1
    if log2_value < 1000:
        return max(1, int(2.0 ** log2_value))
    n = int(log2_value)
    return int(2.0 ** (log2_value - n + 52)) << (n - 52)
