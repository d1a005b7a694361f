"""Compiled Whittaker-Shannon interpolation kernels.

Every kernel computes, for output index n, the sum over the window around
c = rint(n * alpha) of x[k] * sinc(n * alpha - k), with x zero outside
[0, N-1]. Each output is owned by one worker and summed in ascending k, so
results do not depend on the thread count.
"""

import math
import os

import numba
import numpy as np
from numba import njit, prange

if os.environ.get("NUMBA_THREADING_LAYER") is None and numba.config.THREADING_LAYER == "default":
    # the TBB probe warns on older runtimes; omp is thread-safe for concurrent callers
    numba.config.THREADING_LAYER = "omp"

TILE = 256


@njit(cache=True, inline="always")
def sinc(x):
    if x == 0.0:
        return 1.0
    if x == math.floor(x):
        return 0.0
    px = math.pi * x
    return math.sin(px) / px


@njit(cache=True, inline="always")
def _lut_value(lut, inv_spacing, x):
    return lut[int(abs(x) * inv_spacing + 0.5)]


@njit(cache=True, nogil=True)
def windowed_serial(x, alpha, n_out, half):
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    for n in range(n_out):
        t = n * alpha
        c = int(np.rint(t))
        acc = 0j
        for k in range(max(c - half, 0), min(c + half, n_in - 1) + 1):
            acc += x[k] * sinc(t - k)
        out[n] = acc
    return out


@njit(parallel=True, cache=True, nogil=True)
def windowed_parallel(x, alpha, n_out, half):
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    for n in prange(n_out):
        t = n * alpha
        c = int(np.rint(t))
        acc = 0j
        for k in range(max(c - half, 0), min(c + half, n_in - 1) + 1):
            acc += x[k] * sinc(t - k)
        out[n] = acc
    return out


@njit(parallel=True, cache=True, nogil=True)
def windowed_lut(x, alpha, n_out, half, lut, inv_spacing):
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    for n in prange(n_out):
        t = n * alpha
        c = int(np.rint(t))
        acc = 0j
        for k in range(max(c - half, 0), min(c + half, n_in - 1) + 1):
            acc += x[k] * _lut_value(lut, inv_spacing, t - k)
        out[n] = acc
    return out


@njit(cache=True, inline="always")
def _tile_span(first, last, alpha, half, n_in):
    lo = int(np.rint(first * alpha)) - half
    hi = int(np.rint((last - 1) * alpha)) + half
    return max(lo, 0), min(hi, n_in - 1)


@njit(parallel=True, cache=True, nogil=True)
def windowed_tiled(x, alpha, n_out, half, tile):
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    n_tiles = (n_out + tile - 1) // tile
    for b in prange(n_tiles):
        first = b * tile
        last = min(first + tile, n_out)
        lo, hi = _tile_span(first, last, alpha, half, n_in)
        local = np.empty(max(hi - lo + 1, 0), dtype=np.complex128)
        for j in range(local.shape[0]):
            local[j] = x[lo + j]
        for n in range(first, last):
            t = n * alpha
            c = int(np.rint(t))
            acc = 0j
            for k in range(max(c - half, 0), min(c + half, n_in - 1) + 1):
                acc += local[k - lo] * sinc(t - k)
            out[n] = acc
    return out


@njit(parallel=True, cache=True, nogil=True)
def windowed_lut_tiled(x, alpha, n_out, half, lut, inv_spacing, tile):
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    n_tiles = (n_out + tile - 1) // tile
    for b in prange(n_tiles):
        first = b * tile
        last = min(first + tile, n_out)
        lo, hi = _tile_span(first, last, alpha, half, n_in)
        local = np.empty(max(hi - lo + 1, 0), dtype=np.complex128)
        for j in range(local.shape[0]):
            local[j] = x[lo + j]
        for n in range(first, last):
            t = n * alpha
            c = int(np.rint(t))
            acc = 0j
            for k in range(max(c - half, 0), min(c + half, n_in - 1) + 1):
                acc += local[k - lo] * _lut_value(lut, inv_spacing, t - k)
            out[n] = acc
    return out


@njit(parallel=True, cache=True, nogil=True)
def exact(x, alpha, n_out):
    """Unwindowed sum over all input samples.

    sin(pi (t - k)) = (-1)^(k - c) sin(pi (t - c)), so one sine per output.
    """
    n_in = x.shape[0]
    out = np.empty(n_out, dtype=np.complex128)
    for n in prange(n_out):
        t = n * alpha
        c = int(np.rint(t))
        mu = t - c
        if mu == 0.0 and 0 <= c < n_in:
            out[n] = x[c]
            continue
        if mu == 0.0:
            out[n] = 0j
            continue
        s = math.sin(math.pi * mu) / math.pi
        acc = 0j
        for k in range(n_in):
            term = x[k] * (s / (t - k))
            if (k - c) % 2:
                acc -= term
            else:
                acc += term
        out[n] = acc
    return out
