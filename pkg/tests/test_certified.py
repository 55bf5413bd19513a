"""Certified irrational rounding against an independent mpmath oracle."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcrsim.fixed import (
    FixedScalar,
    Precision,
    exp_s,
    round_div_sqrt,
    sigmoid_s,
)
from tests.conftest import oracle_round_num

S2 = Precision(2)


class TestExp:
    def test_exp_zero_is_one(self):
        for s in range(2, 9):
            p = Precision(s)
            assert exp_s(FixedScalar(0, p)).value == 1

    def test_underflow_to_zero(self):
        # exp(-3) = 0.0498 < 1/8, frozen from the oracle.
        assert exp_s(FixedScalar(-12, S2)).num == 0

    def test_small_positive(self):
        # exp(1/4) = 1.2840 -> 1.25 on the quarter grid, frozen from the oracle.
        got = exp_s(FixedScalar(1, S2))
        assert got.value == Fraction(5, 4)

    def test_saturates_for_large_arguments(self):
        assert exp_s(FixedScalar(15, S2)).value == S2.max_value

    def test_nonnegative(self):
        p = Precision(3)
        for k in range(-p.max_num, p.max_num + 1, 7):
            assert exp_s(FixedScalar(k, p)).num >= 0

    @settings(deadline=None)
    @given(st.integers(2, 6), st.data())
    def test_matches_oracle(self, s, data):
        p = Precision(s)
        k = data.draw(st.integers(-p.max_num, p.max_num))
        z = FixedScalar(k, p)
        want = oracle_round_num(mpmath.exp(mpmath.mpf(k) / p.scale), s)
        assert exp_s(z).num == want


class TestSigmoid:
    def test_zero_is_half(self):
        assert sigmoid_s(FixedScalar(0, S2)).value == Fraction(1, 2)

    def test_large_preactivation_pins_gate_open(self):
        for s in range(2, 9):
            p = Precision(s)
            assert sigmoid_s(FixedScalar(p.max_num, p)).value == 1
            assert sigmoid_s(FixedScalar(-p.max_num, p)).num == 0

    @settings(deadline=None)
    @given(st.integers(2, 5), st.data())
    def test_matches_oracle(self, s, data):
        p = Precision(s)
        k = data.draw(st.integers(-p.max_num, p.max_num))
        want = oracle_round_num(
            1 / (1 + mpmath.exp(-mpmath.mpf(k) / p.scale)), s
        )
        assert sigmoid_s(FixedScalar(k, p)).num == want


class TestDivSqrt:
    def test_sqrt2(self):
        # [sqrt(2)] = [1 / sqrt(1/2)]: 1.5 at two fractional bits.
        got = round_div_sqrt(Fraction(1), Fraction(1, 2), S2)
        assert got.value == Fraction(3, 2)

    def test_perfect_square_radicand_is_rational_path(self):
        got = round_div_sqrt(Fraction(3, 8), Fraction(9, 4), S2)
        # (3/8) / (3/2) = 1/4 exactly.
        assert got.value == Fraction(1, 4)

    def test_rejects_nonpositive_radicand(self):
        with pytest.raises(ValueError):
            round_div_sqrt(Fraction(1), Fraction(0), S2)

    @settings(deadline=None)
    @given(
        st.integers(2, 6),
        st.fractions(min_value=-6, max_value=6, max_denominator=1 << 8),
        st.fractions(min_value=0, max_value=40, max_denominator=64).filter(
            lambda q: q > 0
        ),
    )
    def test_matches_oracle(self, s, x, rad):
        p = Precision(s)
        got = round_div_sqrt(x, rad, p).num
        if x == 0:
            assert got == 0
            return
        with mpmath.workdps(60):
            target = mpmath.mpf(x.numerator) / x.denominator / mpmath.sqrt(
                mpmath.mpf(rad.numerator) / rad.denominator
            )
        scaled = target * p.scale
        # Skip exact ties: the oracle cannot certify them, and the exact
        # integer-square path is already covered by the rational-path test.
        with mpmath.workdps(60):
            if abs(scaled - mpmath.floor(scaled) - mpmath.mpf("0.5")) < mpmath.mpf(
                "1e-30"
            ):
                frac = Fraction(x) * Fraction(x) / Fraction(rad) * p.scale**2
                if frac.denominator != 1 or not _is_square(abs(frac.numerator)):
                    pytest.fail("tie without rational value")
                return
        want = oracle_round_num(target, s)
        assert got == want


def _is_square(n: int) -> bool:
    from math import isqrt

    return isqrt(n) ** 2 == n
