"""Explicit decoder constructions.

Three builders live here:

* a two-coordinate recurrent parity cell driven by three state updates --
  a hold update applied by zero bits and marker-segment tokens, and a
  two-token toggle pair applied by one bits (the doubled bit encoding
  guarantees toggles always arrive as complete pairs);
* a minimal pure-recurrent decoder wrapping that cell (it answers from the
  parity alone, so it is deliberately too weak for the retrieval task --
  the state-census harness uses it to exhibit the information bottleneck);
* the full hybrid retrieval decoder: one recurrent parity layer plus two
  attention layers over separated address codes, answering with zero
  scratch tokens and model dimension growing logarithmically in the table
  size.

The macro algebra is implemented twice on purpose: ``apply_macro_update``
is a standalone scalar-arithmetic route used as the oracle against the
array-kernel recurrent layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from pcrsim.codes import BLANK, DUMMY, MARK, CodeTable, build_code
from pcrsim.errors import NotPureGa, NotPureGdn
from pcrsim.fixed import (
    FixedScalar,
    FixedVector,
    Precision,
    add_s,
    dot_strict,
    mul_s,
    round_s,
    sub_s,
)
from pcrsim.fixed.certified import round_div_sqrt_num
from pcrsim.nn_core import (
    GA,
    GDN,
    ActivationRamp,
    AffineMap,
    DecoderSpec,
    GaHeadParams,
    GdnHeadParams,
    LayerSpec,
    MlpParams,
    ParityLayout,
    ParityLayoutEmbedding,
    PcrLayout,
    PcrLayoutEmbedding,
)
from pcrsim.pcr import TOK_BLANK, TOK_MARK, TOK_NO, TOK_ONE, TOK_YES, TOK_ZERO

VOCAB = (TOK_YES, TOK_NO, TOK_ZERO, TOK_ONE, TOK_MARK, TOK_BLANK)
SCRATCH = frozenset((TOK_ZERO, TOK_ONE, TOK_MARK, TOK_BLANK))

HOLD = "hold"
TOGGLE_A = "toggle_a"
TOGGLE_B = "toggle_b"


@dataclass(frozen=True)
class MacroUpdate:
    """One parameterized recurrent row update: decay, write strength, key,
    written value."""

    name: str
    alpha: FixedScalar
    beta: FixedScalar
    key: FixedVector
    value: FixedScalar


@dataclass(frozen=True)
class ParityCellParams:
    """Constants of the two-coordinate parity cell at one precision."""

    prec: Precision
    step: FixedScalar  # smallest positive grid element
    kappa: FixedScalar  # rounded inverse square root of two
    state_even: FixedVector  # (0, step)
    state_odd: FixedVector  # (step, 0)
    mid_from_even: FixedVector  # (2*step, 3*step)
    mid_from_odd: FixedVector  # (3*step, 2*step)
    hold: MacroUpdate
    toggle_a: MacroUpdate
    toggle_b: MacroUpdate
    readout_query: FixedVector  # (1, 0)

    def macros(self) -> dict[str, MacroUpdate]:
        return {HOLD: self.hold, TOGGLE_A: self.toggle_a, TOGGLE_B: self.toggle_b}


def rounding_identities(prec: Precision) -> list[tuple[str, bool]]:
    """The six grid-rounding identities the parity cell relies on, each a
    single rounding of an exact rational product.  All must hold at every
    supported precision."""
    from pcrsim.fixed.rounding import round_fraction_num

    kappa = Fraction(
        round_div_sqrt_num(Fraction(1), Fraction(2), prec), prec.scale
    )
    step = prec.step
    rd = lambda q: round_fraction_num(q, prec)  # noqa: E731
    return [
        ("[kappa*step] == step", rd(kappa * step) == 1),
        ("[2*kappa*step] == step", rd(2 * kappa * step) == 1),
        ("[3*kappa*step] == 2*step", rd(3 * kappa * step) == 2),
        ("[(1/2)*step] == 0", rd(step / 2) == 0),
        ("[(3/4)*step] == step", rd(Fraction(3, 4) * step) == 1),
        ("1/2 < kappa <= 3/4", Fraction(1, 2) < kappa <= Fraction(3, 4)),
    ]


def parity_cell_params(prec: Precision) -> ParityCellParams:
    """Constants of the parity cell: the kappa identities behind them hold
    for every supported precision (see the rounding-identity suite)."""
    one = round_s(1, prec)
    kappa = FixedScalar(round_div_sqrt_num(Fraction(1), Fraction(2), prec), prec)
    step = FixedScalar(1, prec)

    def vec(a: FixedScalar, b: FixedScalar) -> FixedVector:
        return FixedVector.from_scalars([a, b])

    zero = FixedScalar(0, prec)
    d = lambda k: FixedScalar(k, prec)  # noqa: E731 - small local table helper
    return ParityCellParams(
        prec=prec,
        step=step,
        kappa=kappa,
        state_even=vec(zero, step),
        state_odd=vec(step, zero),
        mid_from_even=vec(d(2), d(3)),
        mid_from_odd=vec(d(3), d(2)),
        hold=MacroUpdate(
            HOLD, round_s(Fraction(3, 4), prec), round_s(Fraction(1, 4), prec),
            vec(one, zero), zero,
        ),
        toggle_a=MacroUpdate(
            TOGGLE_A, round_s(Fraction(3, 4), prec), round_s(Fraction(1, 2), prec),
            vec(kappa, kappa), FixedScalar(6, prec),
        ),
        toggle_b=MacroUpdate(
            TOGGLE_B, round_s(Fraction(1, 4), prec), round_s(Fraction(3, 4), prec),
            vec(-kappa, kappa), zero,
        ),
        readout_query=vec(one, zero),
    )


def apply_macro_update(
    x: FixedVector, macro: MacroUpdate, prec: Precision
) -> FixedVector:
    """Strict-convention evaluation of one row update on the active state row:

        out = alpha * (x - [beta * <x, key>] * key) + [beta * value] * key

    with a rounding after every scalar multiply and add, exactly as the
    recurrent layer computes it.  This scalar route is kept independent of
    the array kernels so the two implementations check each other.
    """
    c = dot_strict(x, macro.key)
    t = mul_s(macro.beta, c)
    w = mul_s(macro.beta, macro.value)
    coords = []
    for r in range(len(x)):
        k_r = macro.key[r]
        decayed = mul_s(macro.alpha, sub_s(x[r], mul_s(t, k_r)))
        coords.append(add_s(decayed, mul_s(w, k_r)))
    return FixedVector.from_scalars(coords)


def _macro_key(state: FixedVector) -> tuple[int, ...]:
    return tuple(int(k) for k in state.nums)


@lru_cache(maxsize=None)
def _transition_cached(
    state_nums: tuple[int, ...], macro_name: str, frac_bits: int
) -> tuple[int, ...]:
    prec = Precision(frac_bits)
    cell = parity_cell_params(prec)
    x = FixedVector(np.array(state_nums, dtype=np.int64), prec)
    out = apply_macro_update(x, cell.macros()[macro_name], prec)
    return _macro_key(out)


def macros_for_bit(bit: int) -> tuple[str, str]:
    """The two-token macro pair applied by one doubled table bit."""
    return (TOGGLE_A, TOGGLE_B) if bit else (HOLD, HOLD)


def parity_state_after(bits, prec: Precision) -> FixedVector:
    """Fold the macro trajectory of a doubled-encoded bit string, starting
    from the even state.  Transitions are computed once per (state, macro)
    by the scalar route and then reused."""
    cell = parity_cell_params(prec)
    state = _macro_key(cell.state_even)
    for b in bits:
        for name in macros_for_bit(b):
            state = _transition_cached(state, name, prec.frac_bits)
    return FixedVector(np.array(state, dtype=np.int64), prec)


# ---------------------------------------------------------------------------
# Recurrent parity head as architecture parameters
# ---------------------------------------------------------------------------


def _scaled(prec: Precision, num: int, den: int) -> int:
    """Numerator of the grid value num/den (must divide exactly)."""
    total = prec.scale * num
    if total % den:
        raise ValueError(f"{num}/{den} not on the grid")
    return total // den


def build_parity_cell(
    prec: Precision,
    *,
    d_model: int = 4,
    hold_idx: int = 0,
    toggle_a_idx: int = 1,
    toggle_b_idx: int = 2,
) -> GdnHeadParams:
    """Two-coordinate recurrent head computing parity of the doubled bit
    encoding, reading macro-routing one-hots at the given coordinates.

    The key map emits (1,0) for hold tokens, (1,1) for the first token of a
    one pair and (-1,1) for the second; Euclidean normalization turns the
    latter two into the kappa keys.  Decay and write-strength maps emit the
    per-macro constants through identity ramps.  The output gate is pinned
    fully open by a saturated bias.
    """
    sc = prec.scale
    q = AffineMap.from_entries(2, d_model, (), [sc, 0], prec)
    k = AffineMap.from_entries(
        2,
        d_model,
        [
            (0, hold_idx, sc),
            (0, toggle_a_idx, sc),
            (0, toggle_b_idx, -sc),
            (1, toggle_a_idx, sc),
            (1, toggle_b_idx, sc),
        ],
        None,
        prec,
    )
    v = AffineMap.from_entries(2, d_model, [(0, toggle_a_idx, 6)], None, prec)
    decay = AffineMap.from_entries(
        1,
        d_model,
        [
            (0, hold_idx, _scaled(prec, 3, 4)),
            (0, toggle_a_idx, _scaled(prec, 3, 4)),
            (0, toggle_b_idx, _scaled(prec, 1, 4)),
        ],
        None,
        prec,
    )
    strength = AffineMap.from_entries(
        1,
        d_model,
        [
            (0, hold_idx, _scaled(prec, 1, 4)),
            (0, toggle_a_idx, _scaled(prec, 1, 2)),
            (0, toggle_b_idx, _scaled(prec, 3, 4)),
        ],
        None,
        prec,
    )
    g = AffineMap.from_entries(2, d_model, (), [prec.max_num, prec.max_num], prec)
    return GdnHeadParams(
        q=q,
        k=k,
        v=v,
        decay=decay,
        strength=strength,
        g=g,
        phi_decay=ActivationRamp.identity(prec),
        phi_strength=ActivationRamp.identity(prec),
        s0=((0, 1), (0, 0)),  # even parity state (0, step)
    )


def _dead_gdn_head(d_model: int, prec: Precision) -> GdnHeadParams:
    zero2 = AffineMap.zero(2, d_model, prec)
    zero1 = AffineMap.zero(1, d_model, prec)
    return GdnHeadParams(
        q=zero2,
        k=zero2,
        v=zero2,
        decay=zero1,
        strength=zero1,
        g=zero2,
        phi_decay=ActivationRamp.identity(prec),
        phi_strength=ActivationRamp.identity(prec),
        s0=((0, 0), (0, 0)),
    )


def _dead_ga_head(d_head: int, d_model: int, prec: Precision) -> GaHeadParams:
    zero = AffineMap.zero(d_head, d_model, prec)
    return GaHeadParams(q=zero, k=zero, v=zero, g=zero)


def parity_readout_num(prec: Precision) -> int:
    """Numerator of the nonzero parity readout: the RMS-normalized active
    coordinate, a rounded square root of two (always exceeds one)."""
    return round_div_sqrt_num(Fraction(1), Fraction(1, 2), prec)


def _parity_threshold_mlp(
    d_model: int, read_idx: int, bit_idx: int, prec: Precision
) -> MlpParams:
    """hidden = relu(read + (1 - w)) maps the readout {0, w} to the exact
    parity bit {0, 1}; w > 1 makes the bias strictly negative."""
    sc = prec.scale
    w_num = parity_readout_num(prec)
    w_in = AffineMap.from_entries(
        1, d_model, [(0, read_idx, sc)], [sc - w_num], prec
    )
    w_out = AffineMap.from_entries(d_model, 1, [(bit_idx, 0, sc)], None, prec)
    return MlpParams(w_in, w_out)


def build_parity_only_decoder(
    prec: Precision, *, max_context: int = 64, meta: dict | None = None
) -> DecoderSpec:
    """Pure-recurrent decoder that answers YES exactly when the table parity
    is odd.  It ignores the queried address entirely, which is the point:
    its two reachable post-table states cannot distinguish enough response
    patterns, and the census harness exhibits executable witnesses."""
    lay = ParityLayout()
    d = lay.d_model
    sc = prec.scale
    cell = build_parity_cell(
        prec,
        d_model=d,
        hold_idx=lay.MACRO_HOLD,
        toggle_a_idx=lay.MACRO_TOGGLE_A,
        toggle_b_idx=lay.MACRO_TOGGLE_B,
    )
    heads = (cell,) + tuple(_dead_gdn_head(d, prec) for _ in range(d // 2 - 1))
    w_o = AffineMap.from_entries(d, d, [(lay.PAR_READ, 0, sc)], None, prec)
    layer = LayerSpec(
        kind=GDN,
        heads=heads,
        w_o=w_o,
        mlp=_parity_threshold_mlp(d, lay.PAR_READ, lay.PAR_BIT, prec),
    )
    output = AffineMap.from_entries(
        len(VOCAB),
        d,
        [(0, lay.PAR_BIT, sc), (1, lay.PAR_BIT, -sc)],
        [0, sc] + [-prec.max_num] * 4,
        prec,
    )
    return DecoderSpec(
        prec=prec,
        vocab=VOCAB,
        yes_token=TOK_YES,
        no_token=TOK_NO,
        scratch=SCRATCH,
        max_context=max_context,
        embedding=ParityLayoutEmbedding(prec=prec, vocab=VOCAB),
        layers=(layer,),
        output_map=output,
        tie_order=tuple(range(len(VOCAB))),
        meta=meta or {"kind": "parity_only", "s": prec.frac_bits},
    )


# ---------------------------------------------------------------------------
# Hybrid retrieval decoder
# ---------------------------------------------------------------------------


def _interleaved_query_map(
    source_idx: int, m: int, d_model: int, prec: Precision
) -> AffineMap:
    """Head query map placing an m-wide raw code slot into the query
    interleave (c1, 1, c2, 1, ...)."""
    sc = prec.scale
    entries = [(2 * t, source_idx + t, sc) for t in range(m)]
    bias = [0, sc] * m
    return AffineMap.from_entries(2 * m, d_model, entries, bias, prec)


def _interleaved_key_map(
    source_idx: int, m: int, d_model: int, prec: Precision
) -> AffineMap:
    """Head key map placing a raw code slot into (c1, -1, c2, -1, ...)."""
    sc = prec.scale
    entries = [(2 * t, source_idx + t, sc) for t in range(m)]
    bias = [0, -sc] * m
    return AffineMap.from_entries(2 * m, d_model, entries, bias, prec)


def _token_keyed_code_map(
    code: CodeTable, lay: PcrLayout, prec: Precision
) -> AffineMap:
    """Key map of the address-retrieval layer: key code chosen by token type
    (marker and filler tokens carry their own codes, table tokens the DUMMY
    code), interleaved with -1 filler."""
    sc = prec.scale
    m = code.m
    d = lay.d_model
    mark = code.word(MARK)
    blank = code.word(BLANK)
    dummy = code.word(DUMMY)
    entries = []
    for t in range(m):
        entries.append((2 * t, lay.TMARK, int(mark[t]) * sc))
        entries.append((2 * t, lay.TBLANK, int(blank[t]) * sc))
        entries.append((2 * t, lay.T0, int(dummy[t]) * sc))
        entries.append((2 * t, lay.T1, int(dummy[t]) * sc))
    bias = [0, -sc] * m
    return AffineMap.from_entries(2 * m, d, entries, bias, prec)


def _xor_mlp(d_model: int, a_idx: int, b_idx: int, out_idx: int, prec: Precision) -> MlpParams:
    """Four-case lookup of (a, b) in {0,1}^2 via ReLU indicators; the output
    row sums the two mixed cases, so out = a xor b exactly."""
    sc = prec.scale
    w_in = AffineMap.from_entries(
        4,
        d_model,
        [
            (0, a_idx, -sc), (0, b_idx, -sc),   # 1 - a - b   -> case 00
            (1, a_idx, -sc), (1, b_idx, sc),    # b - a       -> case 01
            (2, a_idx, sc), (2, b_idx, -sc),    # a - b       -> case 10
            (3, a_idx, sc), (3, b_idx, sc),     # a + b - 1   -> case 11
        ],
        [sc, 0, 0, -sc],
        prec,
    )
    w_out = AffineMap.from_entries(
        d_model, 4, [(out_idx, 1, sc), (out_idx, 2, sc)], None, prec
    )
    return MlpParams(w_in, w_out)


def build_hybrid_decoder(
    n: int,
    prec: Precision,
    seed: int,
    *,
    context_slack: int = 8,
    code: CodeTable | None = None,
) -> DecoderSpec:
    """The full zero-scratch retrieval decoder for table length n.

    Layer 0 (recurrent) tracks the table parity in a two-coordinate cell and
    thresholds the readout into a protected parity bit.  Layer 1 (attention)
    queries the marker's code against token-keyed codes; exactly the marked
    position matches, so the head copies that position's offset code into
    the protected address slot.  Layer 2 (attention) queries the retrieved
    address against per-block key codes carried by the first token of each
    table pair, copying the selected table bit; its MLP writes the final
    exclusive-or.  All selections are exact one-hots by the code separation,
    so every decode is bit-exact and answers immediately.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    code = code if code is not None else build_code(n, prec, seed)
    m = code.m
    lay = PcrLayout(m)
    d = lay.d_model
    sc = prec.scale

    # --- layer 0: recurrent parity ---
    cell = build_parity_cell(
        prec,
        d_model=d,
        hold_idx=lay.MACRO_HOLD,
        toggle_a_idx=lay.MACRO_TOGGLE_A,
        toggle_b_idx=lay.MACRO_TOGGLE_B,
    )
    gdn_heads = (cell,) + tuple(_dead_gdn_head(d, prec) for _ in range(d // 2 - 1))
    gdn_layer = LayerSpec(
        kind=GDN,
        heads=gdn_heads,
        w_o=AffineMap.from_entries(d, d, [(lay.PAR_READ, 0, sc)], None, prec),
        mlp=_parity_threshold_mlp(d, lay.PAR_READ, lay.PAR_BIT, prec),
    )

    # --- layer 1: address retrieval ---
    d_head = 2 * m
    mark_q_bias = []
    mark = code.word(MARK)
    for t in range(m):
        mark_q_bias.extend((int(mark[t]) * sc, sc))
    addr_head = GaHeadParams(
        q=AffineMap.from_entries(d_head, d, (), mark_q_bias, prec),
        k=_token_keyed_code_map(code, lay, prec),
        v=AffineMap.from_entries(
            d_head, d, [(t, lay.addr_code + t, sc) for t in range(m)], None, prec
        ),
        g=AffineMap.from_entries(d_head, d, (), [prec.max_num] * d_head, prec),
    )
    ga1 = LayerSpec(
        kind=GA,
        heads=(addr_head, _dead_ga_head(d_head, d, prec)),
        w_o=AffineMap.from_entries(
            d, d, [(lay.retr_addr + t, t, sc) for t in range(m)], None, prec
        ),
        mlp=MlpParams.passthrough(d, prec),
    )

    # --- layer 2: bit retrieval + exclusive-or ---
    bit_head = GaHeadParams(
        q=_interleaved_query_map(lay.retr_addr, m, d, prec),
        k=_interleaved_key_map(lay.key_code, m, d, prec),
        v=AffineMap.from_entries(d_head, d, [(0, lay.T1, sc)], None, prec),
        g=AffineMap.from_entries(d_head, d, (), [prec.max_num] * d_head, prec),
    )
    ga2 = LayerSpec(
        kind=GA,
        heads=(bit_head, _dead_ga_head(d_head, d, prec)),
        w_o=AffineMap.from_entries(d, d, [(lay.RETR_BIT, 0, sc)], None, prec),
        mlp=_xor_mlp(d, lay.PAR_BIT, lay.RETR_BIT, lay.ANSWER, prec),
    )

    output = AffineMap.from_entries(
        len(VOCAB),
        d,
        [(0, lay.ANSWER, sc), (1, lay.ANSWER, -sc)],
        [0, sc] + [-prec.max_num] * 4,
        prec,
    )
    return DecoderSpec(
        prec=prec,
        vocab=VOCAB,
        yes_token=TOK_YES,
        no_token=TOK_NO,
        scratch=SCRATCH,
        max_context=3 * n + context_slack,
        embedding=PcrLayoutEmbedding(prec=prec, n=n, code=code, vocab=VOCAB),
        layers=(gdn_layer, ga1, ga2),
        output_map=output,
        tie_order=tuple(range(len(VOCAB))),
        meta={
            "kind": "hybrid",
            "n": n,
            "s": prec.frac_bits,
            "seed": seed,
            "m": m,
            "d_model": d,
        },
    )


def delete_gdn_layers(spec: DecoderSpec) -> DecoderSpec:
    """Pure-attention variant: drop every recurrent layer, keep the rest.
    The parity bit is never written, so the answer degrades to the retrieved
    bit alone."""
    layers = tuple(l for l in spec.layers if l.kind == GA)
    if not layers:
        raise NotPureGa("no attention layers to keep")
    return replace(
        spec,
        layers=layers,
        meta={**spec.meta, "kind": "ga_only"},
    )


def extract_gdn_layers(spec: DecoderSpec) -> DecoderSpec:
    """Pure-recurrent variant: keep only the recurrent layers (used to
    census the hybrid's own parity layer in isolation)."""
    layers = tuple(l for l in spec.layers if l.kind == GDN)
    if not layers:
        raise NotPureGdn("no recurrent layers to keep")
    return replace(
        spec,
        layers=layers,
        meta={**spec.meta, "kind": "gdn_only"},
    )
