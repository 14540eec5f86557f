"""Gaussian-rational scalars for exact pencil arithmetic."""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = ["ExactComplex", "to_exact", "is_exact_scalar"]


def _parse_real(token: str) -> Fraction:
    if token in ("", "+"):
        return Fraction(1)
    if token == "-":
        return Fraction(-1)
    return Fraction(token)


class ExactComplex:
    """Complex number with arbitrary-precision rational real and imaginary parts.

    Instances are immutable and hashable. Arithmetic with ``int`` and
    ``Fraction`` operands stays exact; mixing with ``float``/``complex`` is
    refused so that exact results never silently degrade.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    @classmethod
    def parse(cls, text: str) -> "ExactComplex":
        """Parse strings such as ``"3"``, ``"-1/2"``, ``"1/2+3/4 i"``, ``"-2i"``."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError(f"empty rational string {text!r}")
        re_part = Fraction(0)
        im_part = Fraction(0)
        pos = 0
        seen = False
        while pos < len(s):
            m = re.match(r"([+-]?)([0-9]+(?:/[0-9]+)?)?(\*?[ij])?", s[pos:])
            if m is None or m.end() == 0:
                raise ValueError(f"invalid rational string {text!r}")
            sign, mag, unit = m.groups()
            if not mag and not unit:
                raise ValueError(f"invalid rational string {text!r}")
            if seen and not sign:
                raise ValueError(f"invalid rational string {text!r}")
            try:
                value = _parse_real(sign + (mag or ""))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"invalid rational string {text!r}") from exc
            if unit:
                im_part += value
            else:
                re_part += value
            pos += m.end()
            seen = True
        return cls(re_part, im_part)

    def __repr__(self):
        return f"ExactComplex({self})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    # -- coercion -------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactComplex):
            return other
        if isinstance(other, (int, Rational)):
            return ExactComplex(other)
        return NotImplemented

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im != 0:
            raise TypeError("cannot convert non-real ExactComplex to float")
        return float(self.re)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    # -- arithmetic -----------------------------------------------------
    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.im == 0:
            return ExactComplex(self.re * o.re, self.im * o.re)
        return ExactComplex(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.im == 0:
            if o.re == 0:
                raise ZeroDivisionError("division by exact zero")
            return ExactComplex(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        return ExactComplex((self.re * o.re + self.im * o.im) / den,
                            (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (ExactComplex(1) / self) ** (-k)
        result = ExactComplex(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self):
        return ExactComplex(self.re, -self.im)

    def __abs__(self):
        return abs(complex(self))

    @property
    def denominator(self) -> int:
        """Least common denominator of the real and imaginary parts."""
        return math.lcm(self.re.denominator, self.im.denominator)


def is_exact_scalar(x) -> bool:
    return isinstance(x, (ExactComplex, int, Fraction))


def to_exact(x) -> ExactComplex:
    """Convert ints, Fractions, strings and binary floats exactly."""
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, str):
        return ExactComplex.parse(x)
    if isinstance(x, (int, Fraction)):
        return ExactComplex(x)
    if isinstance(x, float):
        return ExactComplex(Fraction(x))
    if isinstance(x, complex):
        return ExactComplex(Fraction(x.real), Fraction(x.imag))
    # numpy scalars
    if hasattr(x, "item"):
        return to_exact(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to ExactComplex")
