"""Exception types shared across the package."""


class PcrsimError(Exception):
    """Base class for all package-specific errors."""


class AmbiguousRounding(PcrsimError):
    """A certified enclosure of an irrational value still straddles a rounding
    boundary at the maximum working precision."""


class EmptyInput(PcrsimError):
    """An operation that requires at least one element received none."""


class DimensionMismatch(PcrsimError):
    """Operands have incompatible lengths or shapes."""


class PrecisionMismatch(PcrsimError):
    """Operands belong to grids with different fractional-bit counts."""


class ContextOverflow(PcrsimError):
    """A token sequence exceeds the decoder's maximum context length."""


class NonScratchNonAnswerEmission(PcrsimError):
    """Greedy decoding produced a token outside the scratch alphabet and the
    answer pair; flags a malformed decoder."""


class CodeSearchExhausted(PcrsimError):
    """Random code sampling failed to reach the distance target within the
    retry budget; the caller should increase the code length."""


class NotPureGdn(PcrsimError):
    """The operation requires a decoder whose layers are all recurrent."""


class NotPureGa(PcrsimError):
    """The operation requires a decoder whose layers are all attention."""
