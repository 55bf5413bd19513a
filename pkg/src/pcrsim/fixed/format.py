"""The scaled-integer number format.

A grid with ``frac_bits = s`` consists of zero together with all values
``k * 2**-s`` for ``1 <= |k| <= 2**(2*s) - 1``.  Scalars store the signed
numerator ``k``; equality, ordering and hashing are numerator-exact.  All
arithmetic in this package rounds back onto this grid: round to nearest,
ties toward the smaller absolute value, saturating at the largest magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from pcrsim.errors import PrecisionMismatch


@dataclass(frozen=True)
class Precision:
    """Grid parameter: number of fractional bits (must be at least 2)."""

    frac_bits: int

    def __post_init__(self) -> None:
        if not isinstance(self.frac_bits, int) or self.frac_bits < 2:
            raise ValueError("frac_bits must be an integer >= 2")

    @property
    def scale(self) -> int:
        """Denominator of the grid: one grid step is 1/scale."""
        return 1 << self.frac_bits

    @property
    def max_num(self) -> int:
        """Largest allowed numerator magnitude."""
        return (1 << (2 * self.frac_bits)) - 1

    @property
    def step(self) -> Fraction:
        """Smallest positive grid element."""
        return Fraction(1, self.scale)

    @property
    def max_value(self) -> Fraction:
        """Saturation bound: largest representable magnitude."""
        return Fraction(self.max_num, self.scale)

    @property
    def tie_threshold(self) -> Fraction:
        """Half a grid step: nonnegative reals strictly below it round to 0,
        and exactly this value ties to 0."""
        return Fraction(1, 2 * self.scale)

    def grid_size(self) -> int:
        """Number of distinct grid elements (zero plus both signs)."""
        return 2 * self.max_num + 1


@dataclass(frozen=True)
class FixedScalar:
    """One grid element: value is ``num / prec.scale``."""

    num: int
    prec: Precision

    def __post_init__(self) -> None:
        if abs(self.num) > self.prec.max_num:
            raise ValueError(
                f"numerator {self.num} outside grid for frac_bits={self.prec.frac_bits}"
            )

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.prec.scale)

    def as_fraction_str(self) -> str:
        """Exact decimal-free rendering, e.g. '3/16' or '-2'."""
        return str(self.value)

    def is_zero(self) -> bool:
        return self.num == 0

    def __float__(self) -> float:
        return self.num / self.prec.scale

    def __repr__(self) -> str:
        return f"FixedScalar({self.as_fraction_str()}, s={self.prec.frac_bits})"

    def _check(self, other: "FixedScalar") -> None:
        if self.prec != other.prec:
            raise PrecisionMismatch(f"{self.prec} vs {other.prec}")

    def __add__(self, other: "FixedScalar") -> "FixedScalar":
        from pcrsim.fixed.ops import add_s

        return add_s(self, other)

    def __sub__(self, other: "FixedScalar") -> "FixedScalar":
        from pcrsim.fixed.ops import sub_s

        return sub_s(self, other)

    def __mul__(self, other: "FixedScalar") -> "FixedScalar":
        from pcrsim.fixed.ops import mul_s

        return mul_s(self, other)

    def __neg__(self) -> "FixedScalar":
        return FixedScalar(-self.num, self.prec)

    def __abs__(self) -> "FixedScalar":
        return FixedScalar(abs(self.num), self.prec)

    def __lt__(self, other: "FixedScalar") -> bool:
        self._check(other)
        return self.num < other.num

    def __le__(self, other: "FixedScalar") -> bool:
        self._check(other)
        return self.num <= other.num


def _as_num_array(values: Iterable, prec: Precision) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.size and int(np.abs(arr).max()) > prec.max_num:
        raise ValueError("numerator outside grid")
    return arr


@dataclass(frozen=True)
class FixedVector:
    """Coordinate-wise grid vector; all entries share one precision."""

    nums: np.ndarray
    prec: Precision

    def __post_init__(self) -> None:
        arr = _as_num_array(self.nums, self.prec)
        if arr.ndim != 1:
            raise ValueError("FixedVector requires a 1-d numerator array")
        object.__setattr__(self, "nums", arr)

    @classmethod
    def from_scalars(cls, xs: Sequence[FixedScalar]) -> "FixedVector":
        if not xs:
            raise ValueError("cannot infer precision from an empty scalar list")
        prec = xs[0].prec
        for x in xs:
            if x.prec != prec:
                raise PrecisionMismatch("mixed precisions in vector")
        return cls(np.array([x.num for x in xs], dtype=np.int64), prec)

    @classmethod
    def zeros(cls, n: int, prec: Precision) -> "FixedVector":
        return cls(np.zeros(n, dtype=np.int64), prec)

    def __len__(self) -> int:
        return int(self.nums.shape[0])

    def __getitem__(self, i: int) -> FixedScalar:
        return FixedScalar(int(self.nums[i]), self.prec)

    def __iter__(self) -> Iterator[FixedScalar]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FixedVector):
            return NotImplemented
        return self.prec == other.prec and np.array_equal(self.nums, other.nums)

    def values(self) -> list[Fraction]:
        return [Fraction(int(k), self.prec.scale) for k in self.nums]

    def __repr__(self) -> str:
        body = ", ".join(str(Fraction(int(k), self.prec.scale)) for k in self.nums)
        return f"FixedVector([{body}], s={self.prec.frac_bits})"


@dataclass(frozen=True)
class FixedMatrix:
    """Row-major grid matrix; all entries share one precision."""

    nums: np.ndarray
    prec: Precision

    def __post_init__(self) -> None:
        arr = _as_num_array(self.nums, self.prec)
        if arr.ndim != 2:
            raise ValueError("FixedMatrix requires a 2-d numerator array")
        object.__setattr__(self, "nums", arr)

    @classmethod
    def zeros(cls, rows: int, cols: int, prec: Precision) -> "FixedMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), prec)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.nums.shape[0]), int(self.nums.shape[1]))

    def row(self, r: int) -> FixedVector:
        return FixedVector(self.nums[r].copy(), self.prec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FixedMatrix):
            return NotImplemented
        return self.prec == other.prec and np.array_equal(self.nums, other.nums)
