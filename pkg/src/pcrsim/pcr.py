"""The parity-conditioned retrieval task.

An instance is a bit table ``Y`` of length n and a query address ``j``; the
required answer is YES exactly when ``Y[j] xor parity(Y)`` is 1.  Prompts
encode each table bit as two identical tokens followed by a marker segment
with a single MARK at the queried offset, for a total length of 3n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

TOK_ZERO = "0"
TOK_ONE = "1"
TOK_MARK = "MARK"
TOK_BLANK = "BLANK"
TOK_YES = "YES"
TOK_NO = "NO"

INPUT_ALPHABET = (TOK_ZERO, TOK_ONE, TOK_MARK, TOK_BLANK)


@dataclass(frozen=True)
class PcrInstance:
    """A table of bits plus a 1-based query address into it."""

    bits: tuple[int, ...]
    query: int

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise ValueError("table must contain at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("table entries must be bits")
        if not 1 <= self.query <= len(self.bits):
            raise ValueError(f"query {self.query} outside 1..{len(self.bits)}")

    @property
    def n(self) -> int:
        return len(self.bits)

    def compact(self) -> str:
        """Compact serialization, e.g. 'Y=10;j=2'."""
        return f"Y={''.join(str(b) for b in self.bits)};j={self.query}"

    @classmethod
    def parse(cls, text: str) -> "PcrInstance":
        left, right = text.split(";")
        bits = tuple(int(c) for c in left.removeprefix("Y="))
        return cls(bits, int(right.removeprefix("j=")))


def encode_prompt(inst: PcrInstance) -> list[str]:
    """Doubled-bit segment followed by the single-MARK query segment."""
    out: list[str] = []
    for b in inst.bits:
        tok = TOK_ONE if b else TOK_ZERO
        out.extend((tok, tok))
    for pos in range(1, inst.n + 1):
        out.append(TOK_MARK if pos == inst.query else TOK_BLANK)
    return out


def parity(bits: tuple[int, ...]) -> int:
    p = 0
    for b in bits:
        p ^= b
    return p


def ground_truth(inst: PcrInstance) -> str:
    """YES iff the queried bit differs from the table parity."""
    return TOK_YES if inst.bits[inst.query - 1] ^ parity(inst.bits) else TOK_NO


def response_vector(bits: tuple[int, ...]) -> tuple[int, ...]:
    """The per-address answer bits: entry j is bits[j] xor parity(bits)."""
    p = parity(bits)
    return tuple(b ^ p for b in bits)


def parity_projection(x: tuple[int, ...]) -> PcrInstance:
    """Reduce a parity question on ``x`` to a retrieval instance: prepend a
    zero bit and query address 1, so the answer equals parity(x)."""
    return PcrInstance((0,) + tuple(x), 1)


def enumerate_tables(n: int) -> Iterator[tuple[int, ...]]:
    """All bit tables of length n in lexicographic order."""
    for mask in range(1 << n):
        yield tuple((mask >> (n - 1 - i)) & 1 for i in range(n))


def enumerate_instances(n: int) -> Iterator[PcrInstance]:
    """All 2**n * n instances of table length n, in deterministic order."""
    for bits in enumerate_tables(n):
        for j in range(1, n + 1):
            yield PcrInstance(bits, j)
