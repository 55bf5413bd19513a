"""Separated sign-vector address codes for the hard-selection attention gadget.

A code table maps every table address plus the three specials (MARK, BLANK,
DUMMY) to a vector in {-1,+1}^m whose pairwise Hamming distance is at least
ceil(m/3).  With the query/key interleaving below, the exact accumulator dot
product of a query code against a key code is -2 * (Hamming distance), so
matching codes score zero and mismatches round to a score whose exponential
underflows to zero once m is large enough for the working precision: that
threshold is ``compute_m0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log2

import numpy as np

from pcrsim.errors import CodeSearchExhausted
from pcrsim.fixed import FixedScalar, FixedVector, Precision, exp_s
from pcrsim.fixed.certified import round_div_sqrt_num

MARK = "MARK"
BLANK = "BLANK"
DUMMY = "DUMMY"

# Growth factor for the code length: with m = GROWTH_C * ceil(log2(n+3)) the
# union bound over codeword pairs keeps each sampling attempt succeeding with
# probability >= 1/2 for every n up to 2**20.
GROWTH_C = 24
MAX_RETRIES = 64


def compute_m0(prec: Precision, verify_horizon: int | None = None) -> int:
    """Smallest code length m at which a worst-admissible mismatch score has
    rounded exponential zero: [exp([-sqrt(2m)/3])] = 0.

    The condition is monotone in m (the score only becomes more negative),
    which is re-verified up to ``verify_horizon`` (default 4*m).
    """
    m = 0
    while True:
        m += 1
        if _mismatch_exp_is_zero(m, prec):
            break
    horizon = verify_horizon if verify_horizon is not None else 4 * m
    for m2 in range(m + 1, horizon + 1):
        if not _mismatch_exp_is_zero(m2, prec):
            raise AssertionError(f"mismatch-underflow condition not monotone at {m2}")
    return m


def _mismatch_exp_is_zero(m: int, prec: Precision) -> bool:
    # Rounded score of the extreme admissible mismatch: -sqrt(2m)/3 written
    # as (-2m/3) / sqrt(2m) so the exact square-comparison rounding applies.
    score = FixedScalar(
        round_div_sqrt_num(Fraction(-2 * m, 3), Fraction(2 * m), prec), prec
    )
    return exp_s(score).num == 0


def code_length(n: int, prec: Precision) -> int:
    """Code length used for a table of size n at the given precision."""
    return max(compute_m0(prec), GROWTH_C * ceil(log2(n + 3)))


@dataclass(frozen=True)
class CodeTable:
    """Address codes for one table size: ±1 rows with pairwise separation."""

    n: int
    m: int
    s: int
    seed: int
    words: dict[int | str, np.ndarray]

    @property
    def symbols(self) -> list[int | str]:
        return list(range(1, self.n + 1)) + [MARK, BLANK, DUMMY]

    def word(self, symbol: int | str) -> np.ndarray:
        return self.words[symbol]

    def min_pairwise_distance(self) -> int:
        rows = np.stack([self.words[sym] for sym in self.symbols])
        gram = rows.astype(np.float32) @ rows.astype(np.float32).T
        dist = (self.m - gram.astype(np.int64)) // 2
        np.fill_diagonal(dist, self.m)
        return int(dist.min())

    def distance_target(self) -> int:
        return ceil(self.m / 3)

    def to_text(self) -> str:
        lines = [f"n={self.n} m={self.m} s={self.s} seed={self.seed}"]
        for sym in self.symbols:
            row = " ".join("+1" if v > 0 else "-1" for v in self.words[sym])
            lines.append(f"{sym}: {row}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CodeTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(part.split("=") for part in lines[0].split())
        n, m, s, seed = (int(header[k]) for k in ("n", "m", "s", "seed"))
        words: dict[int | str, np.ndarray] = {}
        for ln in lines[1:]:
            name, row = ln.split(":")
            sym: int | str = int(name) if name.strip().isdigit() else name.strip()
            words[sym] = np.array(
                [1 if tok == "+1" else -1 for tok in row.split()], dtype=np.int8
            )
        return cls(n, m, s, seed, words)


def build_code(
    n: int,
    prec: Precision,
    seed: int,
    *,
    _m: int | None = None,
    max_retries: int = MAX_RETRIES,
) -> CodeTable:
    """Sample a separated code table, deterministically in (n, s, seed).

    Resamples whole tables until every pair of distinct codewords is at
    distance >= ceil(m/3); raises ``CodeSearchExhausted`` after the retry
    budget (callers may increase m via ``_m``, which exists for tests).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = _m if _m is not None else code_length(n, prec)
    target = ceil(m / 3)
    rng = np.random.default_rng(seed)
    count = n + 3
    for _ in range(max_retries):
        rows = rng.integers(0, 2, size=(count, m), dtype=np.int8) * 2 - 1
        gram = rows.astype(np.float32) @ rows.astype(np.float32).T
        dist = (m - gram.astype(np.int64)) // 2
        np.fill_diagonal(dist, m)
        if int(dist.min()) >= target:
            words: dict[int | str, np.ndarray] = {}
            for i in range(n):
                words[i + 1] = rows[i].copy()
            words[MARK], words[BLANK], words[DUMMY] = (
                rows[n].copy(),
                rows[n + 1].copy(),
                rows[n + 2].copy(),
            )
            return CodeTable(n=n, m=m, s=prec.frac_bits, seed=seed, words=words)
    raise CodeSearchExhausted(
        f"no code with pairwise distance >= {target} after {max_retries} tries "
        f"(n={n}, m={m})"
    )


def interleave_query(c: np.ndarray, prec: Precision) -> FixedVector:
    """Query-side interleave (c1, 1, c2, 1, ...) as a grid vector."""
    return FixedVector(_interleave(c, +1, prec), prec)


def interleave_key(c: np.ndarray, prec: Precision) -> FixedVector:
    """Key-side interleave (c1, -1, c2, -1, ...) as a grid vector."""
    return FixedVector(_interleave(c, -1, prec), prec)


def _interleave(c: np.ndarray, filler: int, prec: Precision) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64)
    if c.ndim != 1 or np.any(np.abs(c) != 1):
        raise ValueError("codeword must be a 1-d vector of +1/-1")
    out = np.empty(2 * len(c), dtype=np.int64)
    out[0::2] = c * prec.scale
    out[1::2] = filler * prec.scale
    return out
