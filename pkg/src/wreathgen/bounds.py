"""Upper bounds on non-negative reals that may be astronomically large or small.

A :class:`Bound` keeps an exact rational while its size stays modest and
otherwise falls back to a rational upper bound on its base-2 logarithm.
Every operation rounds in the safe direction, so a ``Bound`` is always at
least the true quantity it stands for.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction

EXACT_BITS = 4096
LOG_PRECISION = 64


def int_str(n: int) -> str:
    """Decimal string of an integer of any size (``str`` refuses very long ones)."""
    try:
        return str(n)
    except ValueError:
        return str(decimal.Decimal(n))


def rational_str(x) -> str:
    x = Fraction(x)
    return f"{int_str(x.numerator)}/{int_str(x.denominator)}"


def log2_upper_int(m: int, q: int = LOG_PRECISION) -> Fraction:
    """Rational ``u`` with ``log2(m) <= u``, accurate to about ``1/q``."""
    if m < 1:
        raise ValueError("log of a non-positive integer")
    if m == 1:
        return Fraction(0)
    if m.bit_length() * q > 1 << 22:
        return Fraction(m.bit_length())
    return Fraction((m**q).bit_length(), q)


def log2_lower_int(m: int, q: int = LOG_PRECISION) -> Fraction:
    if m < 1:
        raise ValueError("log of a non-positive integer")
    if m == 1:
        return Fraction(0)
    if m.bit_length() * q > 1 << 22:
        return Fraction(m.bit_length() - 1)
    return Fraction((m**q).bit_length() - 1, q)


def log2_upper(x: Fraction) -> Fraction:
    x = Fraction(x)
    return log2_upper_int(x.numerator) - log2_lower_int(x.denominator)


def log2_lower(x: Fraction) -> Fraction:
    x = Fraction(x)
    return log2_lower_int(x.numerator) - log2_upper_int(x.denominator)


def _ceil_root(m: int, q: int) -> int:
    """Least integer ``r`` with ``r**q >= m``."""
    r = 1 << -(-m.bit_length() // q)
    lo, hi = 0, r
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**q >= m:
            hi = mid
        else:
            lo = mid
    return hi


def pow2_upper(x: Fraction, q: int = LOG_PRECISION) -> Fraction:
    """Rational upper bound on ``2**x`` with relative error about ``2**-q``."""
    x = Fraction(x)
    whole = math.floor(x)
    num = math.ceil((x - whole) * q)  # 2^x <= 2^whole * 2^(num/q)
    scale = q  # fractional bits kept
    root = _ceil_root(1 << (num + q * scale), q)
    return Fraction(root, 1 << scale) * Fraction(2) ** whole


def _bits(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


@dataclass(frozen=True)
class Bound:
    """Exact value when known, otherwise an upper bound on ``log2`` (``None`` for zero)."""

    exact: Fraction | None
    log2: Fraction | None

    @classmethod
    def of(cls, x) -> Bound:
        x = Fraction(x)
        if x < 0:
            raise ValueError("bounds are non-negative")
        return cls(x, None if x == 0 else log2_upper(x))

    @classmethod
    def from_log2(cls, log2: Fraction) -> Bound:
        return cls(None, Fraction(log2))

    @classmethod
    def power_of_two(cls, e) -> Bound:
        """``2**e`` for a rational ``e``; exact when ``e`` is a small integer."""
        e = Fraction(e)
        if e.denominator == 1 and abs(e) <= EXACT_BITS:
            return cls.of(Fraction(2) ** int(e))
        return cls.from_log2(e)

    @property
    def is_zero(self) -> bool:
        return self.log2 is None

    def __mul__(self, other: Bound) -> Bound:
        if self.is_zero or other.is_zero:
            return ZERO
        if self.exact is not None and other.exact is not None \
                and _bits(self.exact) + _bits(other.exact) <= EXACT_BITS:
            return Bound.of(self.exact * other.exact)
        return Bound.from_log2(self.log2 + other.log2)

    def __add__(self, other: Bound) -> Bound:
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.exact is not None and other.exact is not None:
            return Bound.of(self.exact + other.exact)
        return Bound.from_log2(max(self.log2, other.log2) + 1)

    def __pow__(self, e: int) -> Bound:
        if e < 0:
            raise ValueError("use reciprocal() for negative powers")
        if e == 0:
            return ONE
        if self.is_zero:
            return ZERO
        if self.exact is not None and _bits(self.exact) * e <= EXACT_BITS:
            return Bound.of(self.exact**e)
        return Bound.from_log2(self.log2 * e)

    def scale(self, m: int) -> Bound:
        return self * Bound.of(m)

    def lt_one(self) -> bool:
        if self.exact is not None:
            return self.exact < 1
        return self.is_zero or self.log2 < 0

    def upper(self, clip_bits: int = LOG_PRECISION) -> Fraction:
        """A rational at least the value; tiny log-only values are clipped to ``2**-clip_bits``."""
        if self.exact is not None:
            return self.exact
        if self.is_zero:
            return Fraction(0)
        if self.log2 < -clip_bits:
            return Fraction(1, 1 << clip_bits)
        if self.log2 > EXACT_BITS:
            raise OverflowError("value too large to write out as a rational")
        return pow2_upper(self.log2)

    def to_json(self):
        if self.exact is not None:
            return rational_str(self.exact)
        return {"log2_upper": rational_str(self.log2)}

    def __le__(self, other: Bound) -> bool:
        """Conservative comparison: True only when provably ``self <= other``."""
        if self.is_zero:
            return True
        if other.is_zero:
            return False
        if self.exact is not None and other.exact is not None:
            return self.exact <= other.exact
        other_low = log2_lower(other.exact) if other.exact is not None else other.log2
        return self.log2 <= other_low


ZERO = Bound(Fraction(0), None)
ONE = Bound(Fraction(1), Fraction(0))


def total(bounds) -> Bound:
    out = ZERO
    for b in bounds:
        out = out + b
    return out
