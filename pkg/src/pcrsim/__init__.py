"""pcrsim: bit-exact simulation of constant-precision hybrid sequence decoders.

Everything in this package computes over a finite grid of scaled integers.
There is no floating point on any value-bearing path; two runs with the same
inputs produce identical bits on any platform.
"""

__version__ = "0.1.0"
