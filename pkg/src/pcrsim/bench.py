"""Benchmark of the kernel backends and the end-to-end decode path.

Both backends must return identical bits on identical inputs; the benchmark
asserts that while timing them, so a speedup that changed results would be
reported as a failure, not a win.
"""

from __future__ import annotations

import time

import numpy as np

from pcrsim._kernels import _py


def _load_compiled():
    try:
        from pcrsim._kernels import _cy

        return _cy
    except ImportError:
        return None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_kernel_benchmark(size: int = 200_000, repeat: int = 5, echo=print) -> bool:
    """Time each kernel on both backends; returns False on any mismatch."""
    cy = _load_compiled()
    s = 8
    kmax = (1 << (2 * s)) - 1
    rng = np.random.default_rng(0)
    flat = rng.integers(-kmax, kmax, size=size, dtype=np.int64)
    rows = flat[: (size // 64) * 64].reshape(-1, 64)
    other = rng.integers(-kmax, kmax, size=rows.shape, dtype=np.int64)
    starts = np.arange(0, 65, 8, dtype=np.int64)

    cases = [
        ("round_shifted", lambda b: b.round_shifted(flat, s, s)),
        ("fold_rows", lambda b: b.fold_rows(rows, s)),
        ("dot_strict_rows", lambda b: b.dot_strict_rows(rows, other, s)),
        ("segsum_strict", lambda b: b.segsum_strict(rows, starts, s)),
    ]
    ok = True
    echo(f"kernel benchmark: size={size}, repeat={repeat}")
    if cy is None:
        echo("compiled backend not built; timing pure backend only")
    for name, call in cases:
        t_py = _time(lambda: call(_py), repeat)
        line = f"  {name:16s} python {t_py * 1e3:8.2f} ms"
        if cy is not None:
            t_cy = _time(lambda: call(cy), repeat)
            same = np.array_equal(call(_py), call(cy))
            ok &= same
            line += (
                f"   cython {t_cy * 1e3:8.2f} ms   speedup {t_py / t_cy:5.1f}x"
                f"   match={same}"
            )
        echo(line)
    return ok


def run_decode_benchmark(n: int = 6, s: int = 2, seed: int = 7, echo=print) -> None:
    """Time full greedy decodes of the hybrid decoder under each backend.

    Backend selection happens at import, so this times the currently loaded
    backend; run with PCRSIM_KERNEL_BACKEND=py to time the pure path.
    """
    from pcrsim import _kernels
    from pcrsim.construct import build_hybrid_decoder
    from pcrsim.fixed import Precision
    from pcrsim.nn_core import greedy_decode
    from pcrsim.pcr import encode_prompt, enumerate_instances

    spec = build_hybrid_decoder(n, Precision(s), seed)
    instances = list(enumerate_instances(n))
    t0 = time.perf_counter()
    for inst in instances:
        greedy_decode(spec, encode_prompt(inst), 0)
    dt = time.perf_counter() - t0
    echo(
        f"decode benchmark [{_kernels.backend_name()}]: n={n} s={s} "
        f"{len(instances)} decodes in {dt:.2f}s "
        f"({1e3 * dt / len(instances):.2f} ms/decode)"
    )
