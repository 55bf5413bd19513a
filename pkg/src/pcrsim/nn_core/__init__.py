"""Token-mixing blocks, decoder stacks and greedy decoding over the grid."""

from pcrsim.nn_core.decode import (
    ANSWERED,
    BUDGET_EXCEEDED,
    Transcript,
    argmax_with_ties,
    greedy_decode,
)
from pcrsim.nn_core.embedding import (
    ParityLayout,
    ParityLayoutEmbedding,
    PcrLayout,
    PcrLayoutEmbedding,
    TableEmbedding,
)
from pcrsim.nn_core.forward import (
    ForwardResult,
    decoder_forward,
    ga_layer_forward,
    gdn_cell_update,
    gdn_layer_step,
    run_stack,
)
from pcrsim.nn_core.params import (
    GA,
    GDN,
    ActivationRamp,
    AffineMap,
    DecoderSpec,
    GaHeadParams,
    GdnHeadParams,
    GdnState,
    LayerSpec,
    MlpParams,
)
from pcrsim.nn_core.serialize import (
    canonical_json,
    spec_from_dict,
    spec_from_json,
    spec_to_dict,
    spec_to_json,
)

__all__ = [
    "GA",
    "GDN",
    "AffineMap",
    "ActivationRamp",
    "MlpParams",
    "GaHeadParams",
    "GdnHeadParams",
    "LayerSpec",
    "DecoderSpec",
    "GdnState",
    "TableEmbedding",
    "PcrLayout",
    "PcrLayoutEmbedding",
    "ParityLayout",
    "ParityLayoutEmbedding",
    "decoder_forward",
    "ga_layer_forward",
    "gdn_layer_step",
    "gdn_cell_update",
    "run_stack",
    "ForwardResult",
    "greedy_decode",
    "argmax_with_ties",
    "Transcript",
    "ANSWERED",
    "BUDGET_EXCEEDED",
    "canonical_json",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
]
