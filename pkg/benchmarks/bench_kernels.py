#!/usr/bin/env python3
"""Compare the compiled and pure kernel backends, then time full decodes.

Run twice to see both decode paths:

    python benchmarks/bench_kernels.py
    PCRSIM_KERNEL_BACKEND=py python benchmarks/bench_kernels.py
"""

import sys

from pcrsim.bench import run_decode_benchmark, run_kernel_benchmark

if __name__ == "__main__":
    ok = run_kernel_benchmark()
    run_decode_benchmark()
    sys.exit(0 if ok else 2)
