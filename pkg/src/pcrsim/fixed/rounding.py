"""Exact rounding of rational values onto the grid.

These helpers are pure integer arithmetic on unbounded Python ints, so they
are exact for any operand size.  Irrational inputs never reach this module;
they are handled by :mod:`pcrsim.fixed.certified`.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from pcrsim.fixed.format import FixedScalar, Precision


def round_int_ratio(num: int, den: int) -> int:
    """Round num/den (den > 0) to the nearest integer, ties toward zero."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    mag = abs(num)
    q = (2 * mag + den - 1) // (2 * den)
    return q if num >= 0 else -q


def clamp_num(k: int, prec: Precision) -> int:
    """Saturate a grid numerator to the representable range."""
    m = prec.max_num
    if k > m:
        return m
    if k < -m:
        return -m
    return k


def round_fraction_num(x, prec: Precision) -> int:
    """Numerator of the grid element nearest to the exact rational ``x``."""
    if isinstance(x, int):
        return clamp_num(round_int_ratio(x * prec.scale, 1), prec)
    if isinstance(x, float):
        # Floats are exact binary rationals; convert without approximation.
        x = Fraction(x)
    if not isinstance(x, Rational):
        raise TypeError(f"round_s expects an exact rational, got {type(x).__name__}")
    k = round_int_ratio(x.numerator * prec.scale, x.denominator)
    return clamp_num(k, prec)


def round_s(x, prec: Precision) -> FixedScalar:
    """Round an exact rational (int, Fraction, or float-as-binary-rational)
    to the grid: nearest element, ties toward smaller absolute value,
    saturating at the format's largest magnitude."""
    return FixedScalar(round_fraction_num(x, prec), prec)
