"""Certified rounding of irrational quantities.

Two very different mechanisms live here:

* Quotients by square roots ([x / sqrt(r)] for rational x, r) are decided
  *exactly* by comparing integer squares, so they can never be ambiguous.
* The exponential (and the sigmoid built from it) is enclosed in an exact
  rational interval via argument-reduced Taylor series with a proven tail
  bound.  The enclosure starts at 96 fractional bits and widens up to a cap;
  if the interval still straddles a rounding boundary the operation raises
  ``AmbiguousRounding`` rather than guess.  For grid arguments the enclosure
  always resolves in practice (the targets are transcendental), but the
  failure mode is explicit instead of silent.

Everything is unbounded-integer arithmetic; no floats touch these paths.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt

from pcrsim.errors import AmbiguousRounding
from pcrsim.fixed.format import FixedScalar, Precision
from pcrsim.fixed.rounding import clamp_num, round_fraction_num, round_int_ratio

# Fractional bits of enclosure width to try, in order.
_PREC_SCHEDULE = (96, 192, 384, 768, 1536, 3072)


def _is_perfect_square(n: int) -> bool:
    r = isqrt(n)
    return r * r == n


def round_div_sqrt_num(x: Fraction, radicand: Fraction, prec: Precision) -> int:
    """Numerator of [x / sqrt(radicand)] on the grid, decided exactly.

    ``radicand`` must be positive.  When the radicand is a perfect rational
    square the quotient is rational and ties follow the toward-zero rule;
    otherwise the quotient is irrational and no tie can occur, so nearest
    is decided by integer-square comparison.
    """
    if radicand <= 0:
        raise ValueError("radicand must be positive")
    x = Fraction(x)
    radicand = Fraction(radicand)
    if x == 0:
        return 0
    u, w = radicand.numerator, radicand.denominator
    if _is_perfect_square(u) and _is_perfect_square(w):
        root = Fraction(isqrt(u), isqrt(w))
        return round_fraction_num(x / root, prec)

    pn, pd = abs(x.numerator), x.denominator
    scale = prec.scale
    # k0 = floor(|x| * scale / sqrt(radicand)) via floor(sqrt(N // D)).
    n_big = pn * pn * w * scale * scale
    d_big = pd * pd * u
    k0 = isqrt(n_big // d_big)
    # Compare |x|*scale against the midpoint k0 + 1/2 by squaring:
    # |x|*scale > (2*k0+1)/2  <=>  4*pn^2*w*scale^2 > (2*k0+1)^2*pd^2*u.
    mid = 2 * k0 + 1
    lhs = 4 * n_big
    rhs = mid * mid * d_big
    if lhs == rhs:
        raise AssertionError("irrational quotient equals a grid midpoint")
    k = k0 + 1 if lhs > rhs else k0
    k = clamp_num(k, prec)
    return k if x > 0 else -k


def round_div_sqrt(x: Fraction, radicand: Fraction, prec: Precision) -> FixedScalar:
    return FixedScalar(round_div_sqrt_num(x, radicand, prec), prec)


def _exp_enclosure(z: Fraction, frac_bits: int) -> tuple[Fraction, Fraction]:
    """Exact rational interval [lo, hi] containing exp(z).

    Argument reduction: exp(z) = exp(z / 2**r) ** (2**r) with |z / 2**r| <= 1/4,
    then a Taylor partial sum whose tail is bounded by twice the first omitted
    term (valid for |w| <= 1/2), and exact interval squaring r times.
    """
    if z == 0:
        return Fraction(1), Fraction(1)
    r = 0
    az = abs(z)
    while az > Fraction(1, 4):
        az /= 2
        r += 1
    w = z / (1 << r)

    # Absolute tail target.  Each of the r squarings at most doubles the
    # relative width, and callers short-circuit |z| beyond ~16, so values
    # stay below exp(16) < 2**24; the fixed margin absorbs both effects.
    target = Fraction(1, 1 << (frac_bits + 2 * r + 40))
    term = Fraction(1)
    total = Fraction(1)
    i = 0
    while True:
        i += 1
        term *= w / i
        total += term
        tail = 2 * abs(w) ** (i + 1) / _factorial(i + 1)
        if tail <= target:
            break
    lo, hi = total - tail, total + tail
    if lo < 0:
        lo = Fraction(0)
    for _ in range(r):
        lo, hi = lo * lo, hi * hi
    return lo, hi


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _round_interval_num(lo: Fraction, hi: Fraction, prec: Precision) -> int | None:
    """Grid numerator shared by every point of [lo, hi], or None if the
    interval straddles a rounding boundary."""
    klo = round_fraction_num(lo, prec)
    khi = round_fraction_num(hi, prec)
    if klo != khi:
        return None
    # Rounding is monotone, so equal endpoint results pin the whole interval
    # except when an endpoint sits exactly on a tie midpoint and the true
    # value lies on the other side of it.  Reject enclosures touching a tie.
    for endpoint in (lo, hi):
        d = endpoint * 2 * prec.scale
        if d.denominator == 1 and d.numerator % 2 == 1:
            return None
    return klo


@lru_cache(maxsize=None)
def _exp_num_cached(z_num: int, frac_bits: int) -> int:
    prec = Precision(frac_bits)
    z = Fraction(z_num, prec.scale)
    if z_num == 0:
        return prec.scale  # exp(0) = 1 exactly
    # Saturation short-circuits keep the Taylor path to small arguments:
    # z >= s+1 implies exp(z) > 2**s > max_value, and z <= -(s+2) implies
    # exp(z) < half a grid step.
    if z >= prec.frac_bits + 1:
        return prec.max_num
    if z <= -(prec.frac_bits + 2):
        return 0
    for bits in _PREC_SCHEDULE:
        lo, hi = _exp_enclosure(z, bits)
        k = _round_interval_num(lo, hi, prec)
        if k is not None:
            return k
    raise AmbiguousRounding(f"exp of {z} at frac_bits={frac_bits}")


def exp_s(z: FixedScalar) -> FixedScalar:
    """Correctly rounded exponential of a grid value (always nonnegative)."""
    return FixedScalar(_exp_num_cached(z.num, z.prec.frac_bits), z.prec)


@lru_cache(maxsize=None)
def _sigmoid_num_cached(t_num: int, frac_bits: int) -> int:
    prec = Precision(frac_bits)
    if t_num == 0:
        return round_int_ratio(prec.scale, 2)  # 1/2 is on the grid for s >= 2
    t = Fraction(t_num, prec.scale)
    # sigmoid(t) <= exp(t) for t <= 0 and 1 - sigmoid(t) < exp(-t) for t > 0,
    # so |t| >= s+2 pins the rounded value without any series work.
    if t >= prec.frac_bits + 2:
        return prec.scale
    if t <= -(prec.frac_bits + 2):
        return 0
    for bits in _PREC_SCHEDULE:
        lo_e, hi_e = _exp_enclosure(-t, bits)
        # sigmoid(t) = 1 / (1 + exp(-t)); monotone decreasing in exp(-t).
        lo = 1 / (1 + hi_e)
        hi = 1 / (1 + lo_e)
        k = _round_interval_num(lo, hi, prec)
        if k is not None:
            return k
    raise AmbiguousRounding(f"sigmoid of {t} at frac_bits={frac_bits}")


def sigmoid_s(t: FixedScalar) -> FixedScalar:
    """Correctly rounded logistic gate value of a grid input."""
    return FixedScalar(_sigmoid_num_cached(t.num, t.prec.frac_bits), t.prec)
