"""Versioned JSON serialization of decoder specs and reports.

Dumps are canonical (sorted keys, fixed separators) so identical specs and
identical run configurations produce byte-identical artifacts.
"""

from __future__ import annotations

import json

import numpy as np

from pcrsim.codes import CodeTable
from pcrsim.fixed import Precision
from pcrsim.nn_core.embedding import (
    ParityLayoutEmbedding,
    PcrLayoutEmbedding,
    TableEmbedding,
)
from pcrsim.nn_core.params import (
    GA,
    ActivationRamp,
    AffineMap,
    DecoderSpec,
    GaHeadParams,
    GdnHeadParams,
    LayerSpec,
    MlpParams,
)

DECODER_FORMAT = "pcrsim-decoder"
DECODER_VERSION = 1


def canonical_json(obj) -> str:
    """Deterministic JSON rendering (one trailing newline)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _affine_dict(m: AffineMap) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[r, c, k] for r, c, k in m.entries],
        "bias": list(m.bias),
    }


def _affine_from(d: dict, prec: Precision) -> AffineMap:
    return AffineMap.from_entries(
        d["rows"], d["cols"], [tuple(e) for e in d["entries"]], d["bias"], prec
    )


def _ramp_dict(r: ActivationRamp) -> dict:
    return {"scale": r.scale_num, "shift": r.shift_num}


def _head_dict(head) -> dict:
    if isinstance(head, GaHeadParams):
        return {
            "q": _affine_dict(head.q),
            "k": _affine_dict(head.k),
            "v": _affine_dict(head.v),
            "g": _affine_dict(head.g),
        }
    return {
        "q": _affine_dict(head.q),
        "k": _affine_dict(head.k),
        "v": _affine_dict(head.v),
        "decay": _affine_dict(head.decay),
        "strength": _affine_dict(head.strength),
        "g": _affine_dict(head.g),
        "phi_decay": _ramp_dict(head.phi_decay),
        "phi_strength": _ramp_dict(head.phi_strength),
        "s0": [list(row) for row in head.s0],
    }


def _head_from(d: dict, kind: str, prec: Precision):
    if kind == GA:
        return GaHeadParams(
            q=_affine_from(d["q"], prec),
            k=_affine_from(d["k"], prec),
            v=_affine_from(d["v"], prec),
            g=_affine_from(d["g"], prec),
        )
    return GdnHeadParams(
        q=_affine_from(d["q"], prec),
        k=_affine_from(d["k"], prec),
        v=_affine_from(d["v"], prec),
        decay=_affine_from(d["decay"], prec),
        strength=_affine_from(d["strength"], prec),
        g=_affine_from(d["g"], prec),
        phi_decay=ActivationRamp(d["phi_decay"]["scale"], d["phi_decay"]["shift"]),
        phi_strength=ActivationRamp(
            d["phi_strength"]["scale"], d["phi_strength"]["shift"]
        ),
        s0=tuple(tuple(row) for row in d["s0"]),
    )


def _layer_dict(layer: LayerSpec) -> dict:
    return {
        "kind": layer.kind,
        "heads": [_head_dict(h) for h in layer.heads],
        "w_o": _affine_dict(layer.w_o),
        "mlp": {
            "w_in": _affine_dict(layer.mlp.w_in),
            "w_out": _affine_dict(layer.mlp.w_out),
        },
    }


def _layer_from(d: dict, prec: Precision) -> LayerSpec:
    kind = d["kind"]
    return LayerSpec(
        kind=kind,
        heads=tuple(_head_from(h, kind, prec) for h in d["heads"]),
        w_o=_affine_from(d["w_o"], prec),
        mlp=MlpParams(
            w_in=_affine_from(d["mlp"]["w_in"], prec),
            w_out=_affine_from(d["mlp"]["w_out"], prec),
        ),
    )


def _code_dict(code: CodeTable) -> dict:
    return {
        "n": code.n,
        "m": code.m,
        "s": code.s,
        "seed": code.seed,
        "words": {str(sym): [int(v) for v in code.word(sym)] for sym in code.symbols},
    }


def _code_from(d: dict) -> CodeTable:
    words = {}
    for name, row in d["words"].items():
        sym: int | str = int(name) if name.isdigit() else name
        words[sym] = np.array(row, dtype=np.int8)
    return CodeTable(d["n"], d["m"], d["s"], d["seed"], words)


def _embedding_dict(emb) -> dict:
    if isinstance(emb, PcrLayoutEmbedding):
        return {
            "kind": "pcr_layout",
            "n": emb.n,
            "code": _code_dict(emb.code),
            "vocab": list(emb.vocab),
        }
    if isinstance(emb, ParityLayoutEmbedding):
        return {"kind": "parity_layout", "vocab": list(emb.vocab)}
    if isinstance(emb, TableEmbedding):
        return {"kind": "table", "table": emb.table.tolist()}
    raise TypeError(f"unknown embedding type {type(emb).__name__}")


def _embedding_from(d: dict, prec: Precision):
    kind = d["kind"]
    if kind == "pcr_layout":
        return PcrLayoutEmbedding(
            prec=prec, n=d["n"], code=_code_from(d["code"]), vocab=tuple(d["vocab"])
        )
    if kind == "parity_layout":
        return ParityLayoutEmbedding(prec=prec, vocab=tuple(d["vocab"]))
    if kind == "table":
        return TableEmbedding(
            prec=prec, table=np.array(d["table"], dtype=np.int64)
        )
    raise ValueError(f"unknown embedding kind {kind!r}")


def spec_to_dict(spec: DecoderSpec) -> dict:
    return {
        "format": DECODER_FORMAT,
        "version": DECODER_VERSION,
        "s": spec.prec.frac_bits,
        "vocab": list(spec.vocab),
        "yes": spec.yes_token,
        "no": spec.no_token,
        "scratch": sorted(spec.scratch),
        "tie_order": list(spec.tie_order),
        "max_context": spec.max_context,
        "embedding": _embedding_dict(spec.embedding),
        "layers": [_layer_dict(l) for l in spec.layers],
        "output_map": _affine_dict(spec.output_map),
        "meta": spec.meta,
    }


def spec_from_dict(d: dict) -> DecoderSpec:
    if d.get("format") != DECODER_FORMAT:
        raise ValueError("not a decoder document")
    if d.get("version") != DECODER_VERSION:
        raise ValueError(f"unsupported decoder version {d.get('version')}")
    prec = Precision(d["s"])
    return DecoderSpec(
        prec=prec,
        vocab=tuple(d["vocab"]),
        yes_token=d["yes"],
        no_token=d["no"],
        scratch=frozenset(d["scratch"]),
        max_context=d["max_context"],
        embedding=_embedding_from(d["embedding"], prec),
        layers=tuple(_layer_from(l, prec) for l in d["layers"]),
        output_map=_affine_from(d["output_map"], prec),
        tie_order=tuple(d["tie_order"]),
        meta=d.get("meta", {}),
    )


def spec_to_json(spec: DecoderSpec) -> str:
    return canonical_json(spec_to_dict(spec))


def spec_from_json(text: str) -> DecoderSpec:
    return spec_from_dict(json.loads(text))
