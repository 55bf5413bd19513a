"""Bit-exact decoder evaluation.

Internals operate on int64 numerator arrays of shape (positions, dims).
Conventions, fixed once here and mirrored by the scalar reference in
:mod:`pcrsim.fixed`:

* attention scores: exact integer dot of normalized q/k rows, divided by
  sqrt(head dim) with a single exact rounding;
* attention weights: rounded exponentials over the causal prefix, exact
  integer denominator, one rounding per probability; an all-underflow row
  yields all-zero weights;
* value mixing and the recurrent row update: strict convention (round every
  product, saturating left fold in index order);
* residual adds are exact grid sums with saturation.

Normalization, score, exponential and gate roundings are memoized per
numerator; caches only ever hold exact results, so they cannot change
observable behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from pcrsim import _kernels as kernels
from pcrsim.errors import ContextOverflow, DimensionMismatch
from pcrsim.fixed import FixedVector, Precision
from pcrsim.fixed.certified import (
    _exp_num_cached,
    _sigmoid_num_cached,
    round_div_sqrt_num,
)
from pcrsim.nn_core.params import (
    GA,
    GDN,
    DecoderSpec,
    GdnState,
    LayerSpec,
    _clamp_arr,
)


@lru_cache(maxsize=65536)
def _score_num_cached(acc: int, d_head: int, frac_bits: int) -> int:
    prec = Precision(frac_bits)
    return round_div_sqrt_num(
        Fraction(acc, prec.scale * prec.scale), Fraction(d_head), prec
    )


@lru_cache(maxsize=65536)
def _norm_num_cached(num: int, sumsq: int, mean_count: int, frac_bits: int) -> int:
    prec = Precision(frac_bits)
    radicand = Fraction(sumsq, mean_count * prec.scale * prec.scale)
    return round_div_sqrt_num(Fraction(num, prec.scale), radicand, prec)


def _map_unique(arr: np.ndarray, fn) -> np.ndarray:
    uniq, inv = np.unique(arr, return_inverse=True)
    mapped = np.array([fn(int(v)) for v in uniq], dtype=np.int64)
    return mapped[inv].reshape(arr.shape)


def _normalized_rows(x: np.ndarray, prec: Precision, *, mean: bool) -> np.ndarray:
    """Row-wise RMS (mean=True) or Euclidean (mean=False) normalization with
    exact reductions; zero rows stay zero, unit-norm rows pass unchanged."""
    s = prec.frac_bits
    d = x.shape[1]
    sumsq = (x * x).sum(axis=1)
    target = (d if mean else 1) * prec.scale * prec.scale
    out = x.copy()
    for i in np.nonzero(sumsq == 0)[0]:
        out[i] = 0
    mean_count = d if mean else 1
    for i in np.nonzero((sumsq != 0) & (sumsq != target))[0]:
        row = x[i]
        sq = int(sumsq[i])
        out[i] = _map_unique(
            row, lambda v: _norm_num_cached(v, sq, mean_count, s)
        )
    return out


def _attention_weights(
    es: np.ndarray, prec: Precision
) -> np.ndarray:
    """Rounded softmax over causal prefixes from rounded exponentials.

    ``es`` is the (L, L) matrix of exponential numerators with the causal
    mask already applied (zeros above the diagonal)."""
    scale, kmax = prec.scale, prec.max_num
    denom = es.sum(axis=1, keepdims=True)
    num = 2 * es * scale + denom - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.where(denom > 0, num // np.maximum(2 * denom, 1), 0)
    return _clamp_arr(weights.astype(np.int64), kmax)


def _value_mix(weights: np.ndarray, values: np.ndarray, prec: Precision) -> np.ndarray:
    """Strict value mixing: round each weightxvalue product, fold over the
    prefix in position order."""
    s = prec.frac_bits
    L, d_head = values.shape
    out = np.zeros((L, d_head), dtype=np.int64)
    for i in range(L):
        prods = kernels.round_shifted(
            weights[i, : i + 1, None] * values[: i + 1], s, s
        )
        out[i] = kernels.fold_rows(prods.T, s)
    return out


def _ga_mix(
    layer: LayerSpec, h: np.ndarray, prec: Precision, want_attention: bool
) -> tuple[np.ndarray, list[np.ndarray] | None]:
    s = prec.frac_bits
    L = h.shape[0]
    outs = []
    attns: list[np.ndarray] | None = [] if want_attention else None
    tril = np.tril(np.ones((L, L), dtype=np.int64))
    for head in layer.heads:
        d_head = head.d_head
        if head.is_dead():
            outs.append(np.zeros((L, d_head), dtype=np.int64))
            if attns is not None:
                attns.append(np.zeros((L, L), dtype=np.int64))
            continue
        q = _normalized_rows(head.q.apply_block(h), prec, mean=True)
        k = _normalized_rows(head.k.apply_block(h), prec, mean=True)
        acc = q @ k.T
        scores = _map_unique(acc, lambda a: _score_num_cached(a, d_head, s))
        es = _map_unique(scores, lambda z: _exp_num_cached(z, s)) * tril
        weights = _attention_weights(es, prec)
        values = head.v.apply_block(h)
        u = _value_mix(weights, values, prec)
        gate = _map_unique(head.g.apply_block(h), lambda t: _sigmoid_num_cached(t, s))
        outs.append(kernels.round_shifted(gate * u, s, s))
        if attns is not None:
            attns.append(weights)
    T = layer.w_o.apply_block(np.concatenate(outs, axis=1))
    return T, attns


def gdn_cell_update(
    state: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    alpha: int,
    beta: int,
    prec: Precision,
) -> np.ndarray:
    """One recurrent state update under the strict convention.

    Per row r: c = <state_r, k> (strict), t = [beta*c], row correction
    [t*k_c], decay [alpha * (state - correction)], write [[beta*v_r]*k_c],
    final saturating add."""
    s = prec.frac_bits
    kmax = prec.max_num
    k_rows = np.broadcast_to(k, state.shape)
    c = kernels.dot_strict_rows(state, k_rows, s)
    t = kernels.round_shifted(beta * c, s, s)
    corr = kernels.round_shifted(t[:, None] * k[None, :], s, s)
    y = kernels.round_shifted(alpha * _clamp_arr(state - corr, kmax), s, s)
    w = kernels.round_shifted(beta * v, s, s)
    write = kernels.round_shifted(w[:, None] * k[None, :], s, s)
    return _clamp_arr(y + write, kmax)


def _gdn_scan(
    layer: LayerSpec,
    h: np.ndarray,
    prec: Precision,
    initial: list[np.ndarray] | None = None,
) -> tuple[np.ndarray, list[np.ndarray]]:
    s = prec.frac_bits
    L = h.shape[0]
    outs = []
    finals: list[np.ndarray] = []
    for idx, head in enumerate(layer.heads):
        d_head = head.d_head
        start = initial[idx].copy() if initial is not None else head.s0_array()
        if head.is_dead() and not start.any():
            outs.append(np.zeros((L, d_head), dtype=np.int64))
            finals.append(start)
            continue
        k = _normalized_rows(head.k.apply_block(h), prec, mean=False)
        q = _normalized_rows(head.q.apply_block(h), prec, mean=False)
        v = head.v.apply_block(h)
        alpha = head.phi_decay.apply(head.decay.apply_block(h)[:, 0], prec)
        beta = head.phi_strength.apply(head.strength.apply_block(h)[:, 0], prec)
        gate = _map_unique(head.g.apply_block(h), lambda t: _sigmoid_num_cached(t, s))
        state = start
        reads = np.zeros((L, d_head), dtype=np.int64)
        for i in range(L):
            state = gdn_cell_update(
                state, k[i], v[i], int(alpha[i]), int(beta[i]), prec
            )
            reads[i] = kernels.dot_strict_rows(
                state, np.broadcast_to(q[i], state.shape), s
            )
        outs.append(
            kernels.round_shifted(gate * _normalized_rows(reads, prec, mean=True), s, s)
        )
        finals.append(state)
    T = layer.w_o.apply_block(np.concatenate(outs, axis=1))
    return T, finals


def _apply_mlp(layer: LayerSpec, h: np.ndarray, prec: Precision) -> np.ndarray:
    return _clamp_arr(h + layer.mlp.apply_block(h), prec.max_num)


@dataclass
class ForwardResult:
    logit_nums: np.ndarray
    hidden: np.ndarray
    states: GdnState | None
    attention: dict[tuple[int, int], np.ndarray] | None

    def logits(self, prec: Precision) -> FixedVector:
        return FixedVector(self.logit_nums.copy(), prec)


def run_stack(
    spec: DecoderSpec,
    token_ids: np.ndarray,
    *,
    want_states: bool = False,
    want_attention: bool = False,
) -> ForwardResult:
    prec = spec.prec
    kmax = prec.max_num
    h = spec.embedding.block(token_ids, 1)
    state_layers: list[list[np.ndarray]] = []
    attn: dict[tuple[int, int], np.ndarray] = {}
    for li, layer in enumerate(spec.layers):
        if layer.kind == GA:
            T, head_attn = _ga_mix(layer, h, prec, want_attention)
            if want_attention and head_attn is not None:
                for hi, A in enumerate(head_attn):
                    attn[(li, hi)] = A
        else:
            T, finals = _gdn_scan(layer, h, prec)
            state_layers.append(finals)
        h = _clamp_arr(h + T, kmax)
        h = _apply_mlp(layer, h, prec)
        assert int(np.abs(h).max(initial=0)) <= kmax
    logit_nums = spec.output_map.apply_vec(h[-1])
    return ForwardResult(
        logit_nums=logit_nums,
        hidden=h,
        states=GdnState(state_layers) if want_states else None,
        attention=attn if want_attention else None,
    )


def _token_ids(spec: DecoderSpec, tokens: Sequence[str]) -> np.ndarray:
    try:
        return np.array([spec.vocab.index(t) for t in tokens], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"token outside vocabulary: {exc}") from exc


def decoder_forward(spec: DecoderSpec, tokens: Sequence[str]) -> FixedVector:
    """Embed, run every layer (recurrent layers scan left to right, attention
    layers attend causally) and return the last position's rounded logits."""
    if len(tokens) == 0:
        raise DimensionMismatch("decoder_forward requires at least one token")
    if len(tokens) > spec.max_context:
        raise ContextOverflow(f"{len(tokens)} tokens > context {spec.max_context}")
    res = run_stack(spec, _token_ids(spec, tokens))
    return res.logits(spec.prec)


def ga_layer_forward(
    layer: LayerSpec, hiddens: Sequence[FixedVector]
) -> list[FixedVector]:
    """Apply one attention layer (token mixing, residual, MLP, residual) to a
    sequence of hidden vectors; returns the updated sequence."""
    if layer.kind != GA:
        raise ValueError("ga_layer_forward requires an attention layer")
    if len(hiddens) == 0:
        return []
    prec = hiddens[0].prec
    h = np.stack([v.nums for v in hiddens])
    T, _ = _ga_mix(layer, h, prec, want_attention=False)
    h = _apply_mlp(layer, _clamp_arr(h + T, prec.max_num), prec)
    return [FixedVector(h[i].copy(), prec) for i in range(h.shape[0])]


def gdn_layer_step(
    layer: LayerSpec,
    state: list[np.ndarray] | None,
    h: FixedVector,
) -> tuple[list[np.ndarray], FixedVector]:
    """Advance one recurrent layer by a single position.

    ``state`` holds one (d_head, d_head) numerator matrix per head (None
    starts from each head's initial state).  Returns the new state and the
    position's updated hidden vector (after projection, residual and MLP)."""
    if layer.kind != GDN:
        raise ValueError("gdn_layer_step requires a recurrent layer")
    prec = h.prec
    if state is None:
        state = [head.s0_array() for head in layer.heads]
    block = h.nums[None, :]
    T, finals = _gdn_scan(layer, block, prec, initial=state)
    out = _apply_mlp(layer, _clamp_arr(block + T, prec.max_num), prec)
    return finals, FixedVector(out[0].copy(), prec)
