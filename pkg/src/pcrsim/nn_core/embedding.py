"""Prompt embeddings.

Embeddings are lookup functions of (token, absolute position); they may be
explicit tables or computed layouts.  The retrieval-task layout packs, per
position: token one-hots, a segment flag, the within-pair offset of the
doubled table encoding, hold/toggle routing one-hots for the recurrent
parity cell, two raw address-code slots, and a protected block that layers
write into (parity readout, parity bit, retrieved address, retrieved bit,
answer bit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pcrsim.codes import BLANK, DUMMY, MARK, CodeTable
from pcrsim.fixed import Precision
from pcrsim.pcr import TOK_BLANK, TOK_MARK, TOK_ONE, TOK_ZERO


@dataclass(frozen=True)
class TableEmbedding:
    """Explicit (token, position) table; positions are 1-based."""

    prec: Precision
    table: np.ndarray  # (|vocab|, max_positions, d_model) int64

    @property
    def d_model(self) -> int:
        return int(self.table.shape[2])

    def max_positions(self) -> int:
        return int(self.table.shape[1])

    def block(self, token_ids: np.ndarray, first_pos: int) -> np.ndarray:
        pos = np.arange(first_pos, first_pos + len(token_ids)) - 1
        return self.table[token_ids, pos].astype(np.int64)


@dataclass(frozen=True)
class PcrLayout:
    """Coordinate map of the retrieval-task embedding; model dim is 4*m."""

    m: int

    T0 = 0
    T1 = 1
    TMARK = 2
    TBLANK = 3
    SEG = 4
    R1 = 5
    R2 = 6
    MACRO_HOLD = 7
    MACRO_TOGGLE_A = 8
    MACRO_TOGGLE_B = 9
    PAR_READ = 10
    PAR_BIT = 11
    RETR_BIT = 12
    ANSWER = 13
    _FIXED = 14

    @property
    def key_code(self) -> int:
        return self._FIXED

    @property
    def addr_code(self) -> int:
        return self._FIXED + self.m

    @property
    def retr_addr(self) -> int:
        return self._FIXED + 2 * self.m

    @property
    def d_model(self) -> int:
        return 4 * self.m

    def __post_init__(self) -> None:
        if self.m < self._FIXED:
            raise ValueError("code length too small for the fixed slots")


@dataclass(frozen=True)
class PcrLayoutEmbedding:
    """Computed embedding for retrieval prompts of table length n.

    Token one-hots cover the four input symbols; answer tokens embed with
    all token flags zero (they only ever appear after the prompt).  The
    key-code slot carries the block address code at the first token of each
    table pair and the DUMMY code elsewhere; the addr-code slot carries the
    offset address code inside the marker segment and zero elsewhere.
    """

    prec: Precision
    n: int
    code: CodeTable
    vocab: tuple[str, ...]

    @property
    def layout(self) -> PcrLayout:
        return PcrLayout(self.code.m)

    @property
    def d_model(self) -> int:
        return self.layout.d_model

    def max_positions(self) -> int | None:
        return None  # computed for any position

    def block(self, token_ids: np.ndarray, first_pos: int) -> np.ndarray:
        lay = self.layout
        n, m = self.n, self.code.m
        scale = self.prec.scale
        L = len(token_ids)
        pos = np.arange(first_pos, first_pos + L)  # 1-based
        out = np.zeros((L, lay.d_model), dtype=np.int64)

        ids = {tok: i for i, tok in enumerate(self.vocab)}
        is_zero = token_ids == ids[TOK_ZERO]
        is_one = token_ids == ids[TOK_ONE]
        is_mark = token_ids == ids[TOK_MARK]
        is_blank = token_ids == ids[TOK_BLANK]
        out[:, lay.T0] = is_zero * scale
        out[:, lay.T1] = is_one * scale
        out[:, lay.TMARK] = is_mark * scale
        out[:, lay.TBLANK] = is_blank * scale

        in_table = pos <= 2 * n
        out[:, lay.SEG] = (~in_table) * scale
        first_of_pair = pos % 2 == 1
        out[:, lay.R1] = first_of_pair * scale
        out[:, lay.R2] = (~first_of_pair) * scale

        toggle_a = is_one & first_of_pair
        toggle_b = is_one & ~first_of_pair
        out[:, lay.MACRO_TOGGLE_A] = toggle_a * scale
        out[:, lay.MACRO_TOGGLE_B] = toggle_b * scale
        out[:, lay.MACRO_HOLD] = (~(toggle_a | toggle_b)) * scale

        # Key-code slot: block code at the first token of each table pair,
        # DUMMY everywhere else.
        codes = np.stack([self.code.word(i + 1) for i in range(n)]).astype(np.int64)
        dummy = self.code.word(DUMMY).astype(np.int64)
        key_rows = np.broadcast_to(dummy, (L, m)).copy()
        lead = in_table & first_of_pair
        if lead.any():
            block = (pos[lead] + 1) // 2 - 1
            key_rows[lead] = codes[block]
        out[:, lay.key_code : lay.key_code + m] = key_rows * scale

        # Addr-code slot: offset code inside the marker segment, zero elsewhere.
        in_query = (pos > 2 * n) & (pos <= 3 * n)
        if in_query.any():
            offs = pos[in_query] - 2 * n - 1
            out[np.nonzero(in_query)[0][:, None], lay.addr_code + np.arange(m)] = (
                codes[offs] * scale
            )
        return out


@dataclass(frozen=True)
class ParityLayout:
    """Minimal layout for a parity-only recurrent decoder."""

    MACRO_HOLD = 0
    MACRO_TOGGLE_A = 1
    MACRO_TOGGLE_B = 2
    PAR_READ = 4
    PAR_BIT = 5
    d_model = 8


@dataclass(frozen=True)
class ParityLayoutEmbedding:
    """Computed embedding carrying only the hold/toggle routing one-hots."""

    prec: Precision
    vocab: tuple[str, ...]

    layout = ParityLayout()

    @property
    def d_model(self) -> int:
        return ParityLayout.d_model

    def max_positions(self) -> int | None:
        return None

    def block(self, token_ids: np.ndarray, first_pos: int) -> np.ndarray:
        lay = self.layout
        scale = self.prec.scale
        L = len(token_ids)
        pos = np.arange(first_pos, first_pos + L)
        out = np.zeros((L, lay.d_model), dtype=np.int64)
        one_id = self.vocab.index(TOK_ONE)
        is_one = token_ids == one_id
        first_of_pair = pos % 2 == 1
        toggle_a = is_one & first_of_pair
        toggle_b = is_one & ~first_of_pair
        out[:, lay.MACRO_TOGGLE_A] = toggle_a * scale
        out[:, lay.MACRO_TOGGLE_B] = toggle_b * scale
        out[:, lay.MACRO_HOLD] = (~(toggle_a | toggle_b)) * scale
        return out
