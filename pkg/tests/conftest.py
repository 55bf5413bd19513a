"""Shared test helpers: an independent high-precision rounding oracle.

The oracle deliberately avoids every code path under test.  It evaluates
irrational targets with mpmath at high working precision, checks that the
result is safely distant from any rounding boundary, and rounds by hand.
"""

from fractions import Fraction

import mpmath
import pytest


def oracle_round_num(value, s: int, dps: int = 60) -> int:
    """Round an mpmath-evaluable value to the grid with s fractional bits.

    Returns the numerator.  Fails the calling test if the value sits within
    1e-30 of a tie midpoint (so a verdict would be unsafe), which never
    happens for the targets exercised here.
    """
    with mpmath.workdps(dps):
        x = mpmath.mpf(1) * value
        scaled = x * (1 << s)
        nearest = mpmath.floor(scaled + mpmath.mpf("0.5"))
        dist_to_tie = abs(scaled - mpmath.floor(scaled) - mpmath.mpf("0.5"))
        if dist_to_tie < mpmath.mpf("1e-30"):
            pytest.fail(f"oracle cannot certify rounding of {x}: near a tie")
        k = int(nearest)
    kmax = (1 << (2 * s)) - 1
    return max(-kmax, min(kmax, k))


def oracle_round_fraction(q: Fraction, s: int) -> int:
    """Exact rational rounding by brute comparison, ties toward zero."""
    kmax = (1 << (2 * s)) - 1
    scaled = q * (1 << s)
    lo = int(scaled)  # truncation toward zero
    candidates = range(lo - 2, lo + 3)
    best = None
    for k in candidates:
        d = abs(q - Fraction(k, 1 << s))
        key = (d, abs(k))
        if best is None or key < best[0]:
            best = (key, k)
    k = best[1]
    return max(-kmax, min(kmax, k))
