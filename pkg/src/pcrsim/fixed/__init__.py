"""Fixed-precision grid arithmetic: formats, exact rounding, strict and
accumulator conventions, and certified rounding of irrational quantities."""

from pcrsim.fixed.certified import exp_s, round_div_sqrt, round_div_sqrt_num, sigmoid_s
from pcrsim.fixed.format import FixedMatrix, FixedScalar, FixedVector, Precision
from pcrsim.fixed.ops import (
    add_s,
    dot_acc,
    dot_strict,
    l2norm_s,
    mul_s,
    rmsnorm_s,
    score_s,
    softmax_s,
    sub_s,
    sum_acc,
    sum_strict,
)
from pcrsim.fixed.rounding import round_fraction_num, round_int_ratio, round_s

__all__ = [
    "Precision",
    "FixedScalar",
    "FixedVector",
    "FixedMatrix",
    "round_s",
    "round_int_ratio",
    "round_fraction_num",
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
    "round_div_sqrt",
    "round_div_sqrt_num",
]
