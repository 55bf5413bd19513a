"""Hot grid-arithmetic kernels with two interchangeable backends.

The compiled backend (Cython) is used when its extension module is present;
otherwise the NumPy backend takes over.  Results are bit-identical either
way.  Set ``PCRSIM_KERNEL_BACKEND=py`` to force the pure backend (used by
the benchmark and the backend-equivalence tests).
"""

import os

from pcrsim._kernels import _py

_FORCED = os.environ.get("PCRSIM_KERNEL_BACKEND", "").strip().lower()

if _FORCED == "py":
    _impl = _py
else:
    try:
        from pcrsim._kernels import _cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _FORCED == "cy":
            raise ImportError(
                "PCRSIM_KERNEL_BACKEND=cy but the compiled kernels are not "
                "built; run `python setup.py build_ext --inplace`"
            )
        _impl = _py

round_shifted = _impl.round_shifted
fold_rows = _impl.fold_rows
dot_strict_rows = _impl.dot_strict_rows
segsum_strict = _impl.segsum_strict


def backend_name() -> str:
    return "cython" if _impl is not _py else "python"
