"""Hypothesis strategies for random small decoder specs."""

import numpy as np
from hypothesis import strategies as st

from pcrsim.fixed import Precision
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
    TableEmbedding,
)

VOCAB = ("YES", "NO", "a", "b")
MAX_POSITIONS = 8


def _affine(draw, rows, cols, prec, density=0.4, coef_lo=-6, coef_hi=6):
    entries = []
    for r in range(rows):
        for c in range(cols):
            if draw(st.floats(0, 1)) < density:
                k = draw(st.integers(coef_lo, coef_hi))
                if k:
                    entries.append((r, c, k))
    bias = [draw(st.integers(-4, 4)) for _ in range(rows)]
    return AffineMap.from_entries(rows, cols, entries, bias, prec)


@st.composite
def decoder_specs(draw):
    """Small random decoders: 1-2 layers of either kind, tiny dims."""
    s = draw(st.integers(2, 3))
    prec = Precision(s)
    d_model = draw(st.sampled_from([2, 4]))
    n_layers = draw(st.integers(1, 2))
    layers = []
    for _ in range(n_layers):
        kind = draw(st.sampled_from([GA, GDN]))
        n_heads = draw(st.sampled_from([1, 2])) if d_model == 4 else 1
        d_head = d_model // n_heads
        heads = []
        for _ in range(n_heads):
            if kind == GA:
                heads.append(
                    GaHeadParams(
                        q=_affine(draw, d_head, d_model, prec),
                        k=_affine(draw, d_head, d_model, prec),
                        v=_affine(draw, d_head, d_model, prec),
                        g=_affine(draw, d_head, d_model, prec),
                    )
                )
            else:
                s0 = tuple(
                    tuple(draw(st.integers(-2, 2)) for _ in range(d_head))
                    for _ in range(d_head)
                )
                heads.append(
                    GdnHeadParams(
                        q=_affine(draw, d_head, d_model, prec),
                        k=_affine(draw, d_head, d_model, prec),
                        v=_affine(draw, d_head, d_model, prec),
                        decay=_affine(draw, 1, d_model, prec),
                        strength=_affine(draw, 1, d_model, prec),
                        g=_affine(draw, d_head, d_model, prec),
                        phi_decay=ActivationRamp.identity(prec),
                        phi_strength=ActivationRamp.identity(prec),
                        s0=s0,
                    )
                )
        hidden = draw(st.integers(0, 2))
        mlp = MlpParams(
            _affine(draw, hidden, d_model, prec),
            _affine(draw, d_model, hidden, prec) if hidden else
            AffineMap.zero(d_model, 0, prec),
        )
        layers.append(
            LayerSpec(
                kind=kind,
                heads=tuple(heads),
                w_o=_affine(draw, d_model, d_model, prec),
                mlp=mlp,
            )
        )
    table = np.array(
        [
            [
                [draw(st.integers(-3, 3)) for _ in range(d_model)]
                for _ in range(MAX_POSITIONS)
            ]
            for _ in VOCAB
        ],
        dtype=np.int64,
    )
    return DecoderSpec(
        prec=prec,
        vocab=VOCAB,
        yes_token="YES",
        no_token="NO",
        scratch=frozenset(("a", "b")),
        max_context=MAX_POSITIONS,
        embedding=TableEmbedding(prec=prec, table=table),
        layers=tuple(layers),
        output_map=_affine(draw, len(VOCAB), d_model, prec),
        tie_order=(0, 1, 2, 3),
        meta={"kind": "random"},
    )


token_seqs = st.lists(st.sampled_from(VOCAB), min_size=1, max_size=6)
