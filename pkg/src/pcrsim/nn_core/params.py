"""Decoder architecture descriptions: affine maps, heads, layers, full specs.

All coefficients are grid numerators (int64).  Affine maps follow the strict
convention: every coefficient-input product is rounded onto the grid, the
products are folded left-to-right in ascending input-index order with
saturating adds, and the bias is added (saturating) last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol

import numpy as np

from pcrsim import _kernels as kernels
from pcrsim.fixed import Precision

GA = "GA"
GDN = "GDN"


def _clamp_arr(a: np.ndarray, kmax: int) -> np.ndarray:
    return np.clip(a, -kmax, kmax)


@dataclass(frozen=True)
class AffineMap:
    """Sparse affine map between grid-numerator vectors.

    ``entries`` is a tuple of (row, col, coefficient-numerator) sorted by
    (row, col); the order fixes the strict fold order within each row.
    """

    rows: int
    cols: int
    entries: tuple[tuple[int, int, int], ...]
    bias: tuple[int, ...]
    prec: Precision

    # CSR scratch built once in __post_init__ (not part of equality).
    _erow: np.ndarray = field(init=False, repr=False, compare=False)
    _ecol: np.ndarray = field(init=False, repr=False, compare=False)
    _ecoef: np.ndarray = field(init=False, repr=False, compare=False)
    _starts: np.ndarray = field(init=False, repr=False, compare=False)
    _bias_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        kmax = self.prec.max_num
        ordered = tuple(sorted(self.entries))
        if ordered != tuple(self.entries):
            raise ValueError("entries must be sorted by (row, col)")
        if len(self.bias) != self.rows:
            raise ValueError("bias length must equal rows")
        for r, c, k in ordered:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
            if abs(k) > kmax:
                raise ValueError("coefficient outside grid")
        if any(abs(b) > kmax for b in self.bias):
            raise ValueError("bias outside grid")
        erow = np.array([e[0] for e in ordered], dtype=np.int64)
        ecol = np.array([e[1] for e in ordered], dtype=np.int64)
        ecoef = np.array([e[2] for e in ordered], dtype=np.int64)
        starts = np.zeros(self.rows + 1, dtype=np.int64)
        np.add.at(starts, erow + 1, 1)
        np.cumsum(starts, out=starts)
        object.__setattr__(self, "_erow", erow)
        object.__setattr__(self, "_ecol", ecol)
        object.__setattr__(self, "_ecoef", ecoef)
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(
            self, "_bias_arr", np.array(self.bias, dtype=np.int64)
        )

    @classmethod
    def from_entries(
        cls,
        rows: int,
        cols: int,
        entries: Iterable[tuple[int, int, int]],
        bias: Iterable[int] | None,
        prec: Precision,
    ) -> "AffineMap":
        b = tuple(bias) if bias is not None else tuple([0] * rows)
        return cls(rows, cols, tuple(sorted(entries)), b, prec)

    @classmethod
    def zero(cls, rows: int, cols: int, prec: Precision) -> "AffineMap":
        return cls.from_entries(rows, cols, (), None, prec)

    def is_zero(self) -> bool:
        return not self.entries and all(b == 0 for b in self.bias)

    def apply_block(self, x: np.ndarray) -> np.ndarray:
        """Apply to a block of row vectors: (L, cols) -> (L, rows)."""
        if x.ndim != 2 or x.shape[1] != self.cols:
            raise ValueError(f"expected (L, {self.cols}), got {x.shape}")
        s = self.prec.frac_bits
        kmax = self.prec.max_num
        if len(self._ecoef) == 0:
            return np.broadcast_to(self._bias_arr, (x.shape[0], self.rows)).copy()
        prods = kernels.round_shifted(x[:, self._ecol] * self._ecoef, s, s)
        folded = kernels.segsum_strict(prods, self._starts, s)
        return _clamp_arr(folded + self._bias_arr, kmax)

    def apply_vec(self, x: np.ndarray) -> np.ndarray:
        return self.apply_block(x[None, :])[0]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.int64)
        for r, c, k in self.entries:
            out[r, c] = k
        return out


@dataclass(frozen=True)
class ActivationRamp:
    """Gate activation with range [0, 1]: rounded affine then clamp.

    value(t) = clamp([scale * t + shift], 0, 1), all on the grid.
    """

    scale_num: int
    shift_num: int

    @classmethod
    def identity(cls, prec: Precision) -> "ActivationRamp":
        return cls(prec.scale, 0)

    def apply(self, t: np.ndarray, prec: Precision) -> np.ndarray:
        s = prec.frac_bits
        scaled = kernels.round_shifted(t * np.int64(self.scale_num), s, s)
        shifted = _clamp_arr(scaled + np.int64(self.shift_num), prec.max_num)
        return np.clip(shifted, 0, prec.scale)


@dataclass(frozen=True)
class MlpParams:
    """One-hidden-layer rounded MLP with ReLU; applied residually by layers."""

    w_in: AffineMap
    w_out: AffineMap

    def __post_init__(self) -> None:
        if self.w_in.rows != self.w_out.cols:
            raise ValueError("hidden widths disagree")

    @property
    def hidden(self) -> int:
        return self.w_in.rows

    @classmethod
    def passthrough(cls, d_model: int, prec: Precision) -> "MlpParams":
        """MLP that writes nothing, leaving the residual stream unchanged."""
        return cls(
            AffineMap.zero(0, d_model, prec), AffineMap.zero(d_model, 0, prec)
        )

    def apply_block(self, x: np.ndarray) -> np.ndarray:
        hid = self.w_in.apply_block(x)
        np.maximum(hid, 0, out=hid)
        return self.w_out.apply_block(hid)


@dataclass(frozen=True)
class GaHeadParams:
    """Attention head: query/key/value/gate affine maps into head space."""

    q: AffineMap
    k: AffineMap
    v: AffineMap
    g: AffineMap

    @property
    def d_head(self) -> int:
        return self.q.rows

    def __post_init__(self) -> None:
        dims = {m.rows for m in (self.q, self.k, self.v, self.g)}
        if len(dims) != 1:
            raise ValueError("head maps must share one output dimension")
        object.__setattr__(self, "_dead", self.v.is_zero())

    def is_dead(self) -> bool:
        """Value map writes nothing, so the head output is exactly zero."""
        return self._dead


@dataclass(frozen=True)
class GdnHeadParams:
    """Recurrent head: q/k/v maps, decay and write-strength scalars with
    clamped-ramp activations, output gate, and the initial state matrix."""

    q: AffineMap
    k: AffineMap
    v: AffineMap
    decay: AffineMap  # d_model -> 1, pre-activation for the state decay
    strength: AffineMap  # d_model -> 1, pre-activation for the write strength
    g: AffineMap
    phi_decay: ActivationRamp
    phi_strength: ActivationRamp
    s0: tuple[tuple[int, ...], ...]

    @property
    def d_head(self) -> int:
        return self.q.rows

    def __post_init__(self) -> None:
        d = self.d_head
        if {self.k.rows, self.v.rows, self.g.rows} != {d}:
            raise ValueError("head maps must share one output dimension")
        if self.decay.rows != 1 or self.strength.rows != 1:
            raise ValueError("decay/strength maps must be scalar-valued")
        if len(self.s0) != d or any(len(row) != d for row in self.s0):
            raise ValueError("initial state must be d_head x d_head")
        dead = (
            self.k.is_zero()
            and self.v.is_zero()
            and all(all(v == 0 for v in row) for row in self.s0)
        )
        object.__setattr__(self, "_dead", dead)

    def s0_array(self) -> np.ndarray:
        return np.array(self.s0, dtype=np.int64)

    def is_dead(self) -> bool:
        """Zero key and value maps with a zero initial state keep the state
        and the readout identically zero forever."""
        return self._dead


@dataclass(frozen=True)
class LayerSpec:
    """One token-mixing block plus its position-wise MLP, both residual."""

    kind: str
    heads: tuple
    w_o: AffineMap
    mlp: MlpParams

    def __post_init__(self) -> None:
        if self.kind not in (GA, GDN):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        want = GaHeadParams if self.kind == GA else GdnHeadParams
        if not self.heads or any(not isinstance(h, want) for h in self.heads):
            raise ValueError(f"{self.kind} layer requires {want.__name__} heads")
        d_cat = sum(h.d_head for h in self.heads)
        if self.w_o.cols != d_cat:
            raise ValueError("output projection input dim must match concat")


class Embedding(Protocol):
    """Prompt embedding: token/position pair to a grid vector."""

    d_model: int

    def block(self, token_ids: np.ndarray, first_pos: int) -> np.ndarray: ...

    def max_positions(self) -> int | None: ...


@dataclass(frozen=True, eq=False)
class DecoderSpec:
    """Complete decoder description; immutable and shareable across workers."""

    prec: Precision
    vocab: tuple[str, ...]
    yes_token: str
    no_token: str
    scratch: frozenset
    max_context: int
    embedding: object
    layers: tuple[LayerSpec, ...]
    output_map: AffineMap
    tie_order: tuple[int, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    @property
    def d_model(self) -> int:
        return self.embedding.d_model

    @property
    def is_pure_ga(self) -> bool:
        return all(l.kind == GA for l in self.layers)

    @property
    def is_pure_gdn(self) -> bool:
        return all(l.kind == GDN for l in self.layers)

    @property
    def is_hybrid(self) -> bool:
        kinds = {l.kind for l in self.layers}
        return kinds == {GA, GDN}

    def token_id(self, token: str) -> int:
        return self.vocab.index(token)

    def validate(self) -> None:
        s = self.prec.frac_bits
        if s > 14:
            raise ValueError("array evaluation supports frac_bits <= 14")
        if len(set(self.vocab)) != len(self.vocab):
            raise ValueError("duplicate vocabulary tokens")
        for tok in (self.yes_token, self.no_token, *self.scratch):
            if tok not in self.vocab:
                raise ValueError(f"token {tok!r} not in vocabulary")
        if self.yes_token in self.scratch or self.no_token in self.scratch:
            raise ValueError("answer tokens cannot be scratch tokens")
        if sorted(self.tie_order) != list(range(len(self.vocab))):
            raise ValueError("tie_order must be a permutation of token ids")
        if self.max_context < 1:
            raise ValueError("max_context must be positive")
        limit = self.embedding.max_positions()
        if limit is not None and self.max_context > limit:
            raise ValueError("max_context exceeds the embedding table")
        d = self.d_model
        if self.output_map.cols != d or self.output_map.rows != len(self.vocab):
            raise ValueError("output map shape mismatch")
        for layer in self.layers:
            d_head = layer.heads[0].d_head
            if any(h.d_head != d_head for h in layer.heads):
                raise ValueError("heads within a layer must share d_head")
            if len(layer.heads) * d_head != d:
                raise ValueError("model dim must equal heads * d_head")
            if layer.w_o.rows != d:
                raise ValueError("output projection must map back to model dim")
            # int64 accumulator headroom for exact score dot products
            if d_head.bit_length() + 4 * s >= 63:
                raise ValueError("head dimension too large for exact int64 scores")
            for m in _layer_maps(layer):
                if m.cols != d:
                    raise ValueError("map input dim mismatch")
            if layer.mlp.w_out.rows != d:
                raise ValueError("MLP output dim must match model dim")

    def gdn_layer_indices(self) -> list[int]:
        return [i for i, l in enumerate(self.layers) if l.kind == GDN]


def _layer_maps(layer: LayerSpec):
    for h in layer.heads:
        if isinstance(h, GaHeadParams):
            yield from (h.q, h.k, h.v, h.g)
        else:
            yield from (h.q, h.k, h.v, h.decay, h.strength, h.g)
    yield layer.mlp.w_in


@dataclass
class GdnState:
    """Rounded recurrent state of every recurrent head, in layer order."""

    layers: list[list[np.ndarray]]

    def fingerprint(self) -> bytes:
        """Exact state identity: concatenated numerators, no hashing."""
        return b"".join(
            st.tobytes() for heads in self.layers for st in heads
        )

    def scalar_count(self) -> int:
        return sum(int(st.size) for heads in self.layers for st in heads)

    def distinct_values(self) -> set[int]:
        out: set[int] = set()
        for heads in self.layers:
            for st in heads:
                out.update(int(v) for v in np.unique(st))
        return out

    def copy(self) -> "GdnState":
        return GdnState([[st.copy() for st in heads] for heads in self.layers])
