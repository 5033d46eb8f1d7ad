"""Hot kernels: numba when available, pure numpy otherwise.

Set ``PRIORFREE_NO_NUMBA=1`` before import to force the numpy path.  Both
paths return identical arrays; ``tests/test_accel.py`` checks that.
"""
from __future__ import annotations

import logging
import os

import numpy as np

_DISABLED = os.environ.get("PRIORFREE_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# -- numpy reference path ---------------------------------------------------

def _np_pair_counts(rows, view, view_size, row_size):
    rows = np.asarray(rows, dtype=np.int64)
    n_rows = rows.shape[0]
    k = row_size * view_size
    idx = rows * view_size + np.asarray(view, dtype=np.int64)[None, :]
    idx += (np.arange(n_rows, dtype=np.int64) * k)[:, None]
    return np.bincount(idx.ravel(), minlength=n_rows * k).reshape(n_rows, k)


def _np_multiset_permutations(counts):
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    rows = np.zeros((1, 0), dtype=np.int64)
    rem = counts[None, :].copy()
    for _ in range(n):
        parent, sym = np.nonzero(rem > 0)
        rows = np.concatenate([rows[parent], sym[:, None]], axis=1)
        rem = rem[parent]
        rem[np.arange(len(sym)), sym] -= 1
    if n == 0:
        return rows
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def _np_apply_swaps(values, swaps):
    out = np.array(values, copy=True)
    top = len(out) - 1
    for step, j in enumerate(swaps):
        i = top - step
        out[i], out[j] = out[j], out[i]
    return out


def _np_l1_rows(counts, n, center):
    return np.abs(np.asarray(counts, dtype=np.float64) / n - center[None, :]).sum(axis=1)


def _np_decode(codes, base, n):
    codes = np.asarray(codes, dtype=np.int64)
    powers = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % base


# -- numba path -------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _nb_pair_counts(rows, view, view_size, row_size):
        n_rows, n = rows.shape
        out = np.zeros((n_rows, row_size * view_size), dtype=np.int64)
        for r in range(n_rows):
            for t in range(n):
                out[r, rows[r, t] * view_size + view[t]] += 1
        return out

    @numba.njit(cache=True)
    def _nb_multiset_permutations(counts, total):
        n = 0
        for c in counts:
            n += c
        out = np.empty((total, n), dtype=np.int64)
        cur = np.empty(n, dtype=np.int64)
        pos = 0
        for s in range(len(counts)):
            for _ in range(counts[s]):
                cur[pos] = s
                pos += 1
        for r in range(total):
            out[r] = cur
            # next lexicographic permutation
            i = n - 2
            while i >= 0 and cur[i] >= cur[i + 1]:
                i -= 1
            if i < 0:
                break
            j = n - 1
            while cur[j] <= cur[i]:
                j -= 1
            cur[i], cur[j] = cur[j], cur[i]
            lo, hi = i + 1, n - 1
            while lo < hi:
                cur[lo], cur[hi] = cur[hi], cur[lo]
                lo += 1
                hi -= 1
        return out

    @numba.njit(cache=True)
    def _nb_apply_swaps(values, swaps):
        out = values.copy()
        top = len(out) - 1
        for step in range(len(swaps)):
            i = top - step
            j = swaps[step]
            tmp = out[i]
            out[i] = out[j]
            out[j] = tmp
        return out

    @numba.njit(cache=True)
    def _nb_l1_rows(counts, n, center):
        n_rows, k = counts.shape
        out = np.zeros(n_rows)
        for r in range(n_rows):
            acc = 0.0
            for c in range(k):
                acc += abs(counts[r, c] / n - center[c])
            out[r] = acc
        return out

    @numba.njit(cache=True)
    def _nb_decode(codes, base, n):
        out = np.empty((len(codes), n), dtype=np.int64)
        for r in range(len(codes)):
            v = codes[r]
            for t in range(n - 1, -1, -1):
                out[r, t] = v % base
                v //= base
        return out


# -- public dispatch --------------------------------------------------------

def pair_counts(rows, view, view_size: int, row_size: int) -> np.ndarray:
    """Per-row joint counts of (row symbol, view symbol), cell = r*view_size + v."""
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    view = np.ascontiguousarray(view, dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_pair_counts(rows, view, int(view_size), int(row_size))
    return _np_pair_counts(rows, view, int(view_size), int(row_size))


def multiset_permutations(counts) -> np.ndarray:
    """Every sequence with the given symbol counts, in lexicographic order."""
    from math import factorial, prod

    counts = np.ascontiguousarray(counts, dtype=np.int64)
    total = factorial(int(counts.sum())) // prod(factorial(int(c)) for c in counts)
    if HAVE_NUMBA:
        return _nb_multiset_permutations(counts, total)
    return _np_multiset_permutations(counts)


def apply_swaps(values, swaps) -> np.ndarray:
    """Fisher-Yates: step k swaps position len-1-k with swaps[k]."""
    values = np.ascontiguousarray(values)
    swaps = np.ascontiguousarray(swaps, dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_apply_swaps(values, swaps)
    return _np_apply_swaps(values, swaps)


def l1_rows(counts, n: int, center) -> np.ndarray:
    """||counts[r]/n - center||_1 for every row."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    center = np.ascontiguousarray(center, dtype=np.float64).ravel()
    if HAVE_NUMBA:
        return _nb_l1_rows(counts, float(n), center)
    return _np_l1_rows(counts, n, center)


def decode(codes, base: int, n: int) -> np.ndarray:
    """Integer codes -> (len, n) symbol rows, most significant symbol first."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if HAVE_NUMBA:
        return _nb_decode(codes, int(base), int(n))
    return _np_decode(codes, int(base), int(n))


def encode(rows, base: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    n = rows.shape[1]
    powers = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return rows @ powers
