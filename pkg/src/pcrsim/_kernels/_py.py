"""Pure-Python/NumPy kernel backend.

Semantics are the strict grid convention: round every product onto the grid
(round to nearest, ties toward zero, saturate), and accumulate with a left
fold that saturates at every step.  The vectorized fast paths exploit the
fact that a saturating fold whose running sums never leave the representable
range equals the plain exact sum; rows or segments that would saturate fall
back to an explicit loop.

All arrays are int64 numerators.  Callers guarantee the documented bounds
(fractional bits <= 14, products below 2**56), under which no intermediate
int64 arithmetic here can overflow.
"""

from __future__ import annotations

import numpy as np


def _kmax(s: int) -> int:
    return (1 << (2 * s)) - 1


def round_shifted(a: np.ndarray, extra: int, s: int) -> np.ndarray:
    """Round values ``a * 2**-(s+extra)`` onto the grid with ``s`` fractional
    bits; returns grid numerators.  ``extra = 0`` reduces to saturation."""
    a = np.asarray(a, dtype=np.int64)
    kmax = _kmax(s)
    if extra == 0:
        return np.clip(a, -kmax, kmax)
    if extra < 0:
        raise ValueError("extra shift must be >= 0")
    half = np.int64(1) << np.int64(extra - 1)
    mag = np.abs(a)
    q = (mag + half - 1) >> np.int64(extra)
    return np.clip(np.sign(a) * q, -kmax, kmax)


def fold_rows(x: np.ndarray, s: int) -> np.ndarray:
    """Saturating left-fold sum along the last axis of a 2-d array of grid
    numerators.  Rows of length zero fold to zero."""
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 2:
        raise ValueError("fold_rows expects a 2-d array")
    rows, length = x.shape
    if length == 0:
        return np.zeros(rows, dtype=np.int64)
    kmax = _kmax(s)
    cs = np.cumsum(x, axis=1)
    out = cs[:, -1].copy()
    bad = np.abs(cs).max(axis=1) > kmax
    for r in np.nonzero(bad)[0]:
        out[r] = _fold_one(x[r], kmax)
    return out


def _fold_one(row: np.ndarray, kmax: int) -> int:
    acc = 0
    for v in row:
        acc += int(v)
        if acc > kmax:
            acc = kmax
        elif acc < -kmax:
            acc = -kmax
    return acc


def dot_strict_rows(a: np.ndarray, b: np.ndarray, s: int) -> np.ndarray:
    """Row-wise strict inner product: per-element products are rounded onto
    the grid, then folded with saturating adds."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError("dot_strict_rows expects equal 2-d shapes")
    prods = round_shifted(a * b, s, s)
    return fold_rows(prods, s)


def segsum_strict(vals: np.ndarray, starts: np.ndarray, s: int) -> np.ndarray:
    """Segmented saturating fold.

    ``vals`` has shape (L, N) of grid numerators; ``starts`` has R+1
    monotone offsets into the N axis.  Returns (L, R): for each row the
    strict fold of each segment.  Empty segments fold to zero.
    """
    vals = np.asarray(vals, dtype=np.int64)
    starts = np.asarray(starts, dtype=np.int64)
    if vals.ndim != 2:
        raise ValueError("segsum_strict expects a 2-d value array")
    L, N = vals.shape
    R = len(starts) - 1
    if N == 0 or R == 0:
        return np.zeros((L, R), dtype=np.int64)
    kmax = _kmax(s)
    cs0 = np.zeros((L, N + 1), dtype=np.int64)
    np.cumsum(vals, axis=1, out=cs0[:, 1:])
    out = cs0[:, starts[1:]] - cs0[:, starts[:-1]]

    lens = np.diff(starts)
    seg_of_col = np.repeat(np.arange(R), lens)
    running = cs0[:, 1:] - np.repeat(cs0[:, starts[:-1]], lens, axis=1)
    bad_rows, bad_cols = np.nonzero(np.abs(running) > kmax)
    if bad_rows.size:
        for r, seg in {(int(r), int(seg_of_col[c])) for r, c in zip(bad_rows, bad_cols)}:
            lo, hi = int(starts[seg]), int(starts[seg + 1])
            out[r, seg] = _fold_one(vals[r, lo:hi], kmax)
    return out
