"""Grid arithmetic: strict per-operation rounding, exact reduction
accumulators, normalizations and the rounded softmax.

Two conventions coexist, mirroring the simulated hardware contract:

* *strict*: round back to the grid after every scalar add or multiply;
  sums are left folds, so they are order-sensitive by definition.
* *accumulator*: designated reductions (root-mean-square denominators,
  query-key dot products, softmax denominators) sum exactly in unbounded
  integers and only the operator's final output is rounded.

This module is the pure-Python reference implementation; the array kernels
in :mod:`pcrsim._kernels` must match it bit for bit.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from pcrsim.errors import DimensionMismatch, EmptyInput, PrecisionMismatch
from pcrsim.fixed.certified import exp_s, round_div_sqrt_num, sigmoid_s
from pcrsim.fixed.format import FixedScalar, FixedVector, Precision
from pcrsim.fixed.rounding import clamp_num, round_int_ratio, round_s

__all__ = [
    "add_s",
    "sub_s",
    "mul_s",
    "sum_strict",
    "sum_acc",
    "dot_strict",
    "dot_acc",
    "score_s",
    "exp_s",
    "sigmoid_s",
    "rmsnorm_s",
    "l2norm_s",
    "softmax_s",
    "round_s",
]


def _same_prec(a: FixedScalar, b: FixedScalar) -> Precision:
    if a.prec != b.prec:
        raise PrecisionMismatch(f"{a.prec} vs {b.prec}")
    return a.prec


def add_s(a: FixedScalar, b: FixedScalar) -> FixedScalar:
    """Rounded addition.  The exact sum of two grid values already lies on
    the grid, so rounding reduces to saturation."""
    p = _same_prec(a, b)
    return FixedScalar(clamp_num(a.num + b.num, p), p)


def sub_s(a: FixedScalar, b: FixedScalar) -> FixedScalar:
    p = _same_prec(a, b)
    return FixedScalar(clamp_num(a.num - b.num, p), p)


def mul_s(a: FixedScalar, b: FixedScalar) -> FixedScalar:
    """Rounded multiplication of the exact product (which lives on the
    squared grid)."""
    p = _same_prec(a, b)
    k = round_int_ratio(a.num * b.num, p.scale)
    return FixedScalar(clamp_num(k, p), p)


def sum_strict(xs: Sequence[FixedScalar]) -> FixedScalar:
    """Left-fold sum with rounding at every step; a singleton returns itself."""
    if len(xs) == 0:
        raise EmptyInput("sum_strict of an empty sequence")
    acc = xs[0]
    for x in xs[1:]:
        acc = add_s(acc, x)
    return acc


def sum_acc(xs: Sequence[FixedScalar]) -> Fraction:
    """Exact accumulator sum; never saturates and never rounds.  Callers must
    round before persisting the result anywhere."""
    if len(xs) == 0:
        return Fraction(0)
    prec = xs[0].prec
    total = 0
    for x in xs:
        if x.prec != prec:
            raise PrecisionMismatch("mixed precisions in sum_acc")
        total += x.num
    return Fraction(total, prec.scale)


def _check_pair(x: FixedVector, y: FixedVector) -> Precision:
    if x.prec != y.prec:
        raise PrecisionMismatch(f"{x.prec} vs {y.prec}")
    if len(x) != len(y):
        raise DimensionMismatch(f"lengths {len(x)} and {len(y)}")
    return x.prec


def dot_strict(x: FixedVector, y: FixedVector) -> FixedScalar:
    """Round each elementwise product, then left-fold with rounded adds."""
    p = _check_pair(x, y)
    if len(x) == 0:
        raise EmptyInput("dot_strict of empty vectors")
    prods = [mul_s(a, b) for a, b in zip(x, y)]
    return sum_strict(prods)


def dot_acc(x: FixedVector, y: FixedVector) -> Fraction:
    """Exact inner product over the squared grid."""
    p = _check_pair(x, y)
    total = int(np.multiply(x.nums, y.nums, dtype=object).sum()) if len(x) else 0
    return Fraction(total, p.scale * p.scale)


def score_s(x: FixedVector, y: FixedVector) -> FixedScalar:
    """Length-normalized rounded similarity: the exact accumulator dot
    product divided by sqrt(length), rounded once."""
    p = _check_pair(x, y)
    m = len(x)
    if m == 0:
        raise EmptyInput("score_s of empty vectors")
    acc = dot_acc(x, y)
    return FixedScalar(round_div_sqrt_num(acc, Fraction(m), p), p)


def _norm_core(x: FixedVector, radicand: Fraction) -> FixedVector:
    p = x.prec
    if radicand == 0:
        return FixedVector(np.zeros(len(x), dtype=np.int64), p)
    nums = [
        round_div_sqrt_num(Fraction(int(k), p.scale), radicand, p) for k in x.nums
    ]
    return FixedVector(np.array(nums, dtype=np.int64), p)


def rmsnorm_s(x: FixedVector) -> FixedVector:
    """Root-mean-square normalization: the zero vector maps to zero, any
    other vector is divided coordinate-wise by sqrt(mean of squares) with
    one rounding per coordinate.  The reduction is exact."""
    if len(x) == 0:
        return x
    p = x.prec
    sq = int(np.multiply(x.nums, x.nums, dtype=object).sum())
    radicand = Fraction(sq, len(x) * p.scale * p.scale)
    return _norm_core(x, radicand)


def l2norm_s(x: FixedVector) -> FixedVector:
    """Euclidean normalization with the same zero and rounding conventions
    as rmsnorm_s."""
    if len(x) == 0:
        return x
    p = x.prec
    sq = int(np.multiply(x.nums, x.nums, dtype=object).sum())
    radicand = Fraction(sq, p.scale * p.scale)
    return _norm_core(x, radicand)


def softmax_s(z: FixedVector) -> FixedVector:
    """Rounded softmax: exponentials are rounded to the grid, the denominator
    is an exact accumulator sum, and each probability is rounded back.  An
    all-zero exponential row yields the zero vector; an empty input stays
    empty."""
    p = z.prec
    if len(z) == 0:
        return z
    exps = [exp_s(e) for e in z]
    denom = sum(e.num for e in exps)
    if denom == 0:
        return FixedVector(np.zeros(len(z), dtype=np.int64), p)
    nums = [clamp_num(round_int_ratio(e.num * p.scale, denom), p) for e in exps]
    return FixedVector(np.array(nums, dtype=np.int64), p)
