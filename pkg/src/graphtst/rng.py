"""Deterministic counter-based random streams.

All randomness in this package is derived from 64-bit keys through the
splitmix64 finalizer. A stream is the counter sequence

    out_t = mix64(key + (t + 1) * GAMMA)   (mod 2**64)

so any draw is a pure function of (key, t). Sub-keys for independent
tasks (permutation i, repetition r, ...) come from :func:`derive`, which
makes parallel execution order-independent: each task owns a key and
never shares mutable generator state.

Uniform doubles are ((out >> 11) + 0.5) * 2**-53, strictly inside (0, 1).
Normal variates use the Box-Muller transform on consecutive uniforms.
Shuffles are Fisher-Yates driven by ``out_t mod k`` (the modulo bias is
negligible for k far below 2**64).

Everything here is numba-jitted so the exact same streams are observed
from plain Python calls and from inside compiled loops.
"""

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def mix64(z):
    """splitmix64 finalizer: bijective avalanche mixing of a uint64."""
    z = np.uint64(z)
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def derive(key, index):
    """Sub-key for task `index` under `key`; deterministic and collision-free
    in `index` for a fixed key."""
    return mix64(np.uint64(key) + (np.uint64(index) + np.uint64(1)) * GAMMA)


def key_of(value) -> np.uint64:
    """Coerce any integer (numpy or Python, any sign/size) to a uint64 key."""
    return np.uint64(int(value) % 2**64)


def derive_key(key, index) -> np.uint64:
    """Python-side wrapper of :func:`derive`.

    Compiled code boxes uint64 returns as arbitrary-size Python ints,
    which the dispatcher would then refuse as int64 arguments; routing
    Python call sites through here keeps keys usable on both sides.
    """
    return np.uint64(derive(key_of(key), key_of(index)))


@njit(cache=True, nogil=True)
def stream_u64(key, t):
    """t-th raw 64-bit output of the stream owned by `key`."""
    return mix64(np.uint64(key) + (np.uint64(t) + np.uint64(1)) * GAMMA)


@njit(cache=True, nogil=True)
def stream_uniform(key, t):
    """t-th uniform double in the open interval (0, 1)."""
    bits = stream_u64(key, t) >> np.uint64(11)
    return (np.float64(bits) + 0.5) * (2.0 ** -53)


@njit(cache=True, nogil=True)
def normals(key, out):
    """Fill `out` (1-D float64) with standard normals via Box-Muller.

    Pairs of consecutive uniforms (u1, u2) map to
    sqrt(-2 ln u1) * (cos, sin)(2 pi u2); for odd lengths the final sine
    is discarded.
    """
    n = out.shape[0]
    t = np.uint64(0)
    i = 0
    while i < n:
        u1 = stream_uniform(key, t)
        u2 = stream_uniform(key, t + np.uint64(1))
        t += np.uint64(2)
        r = np.sqrt(-2.0 * np.log(u1))
        out[i] = r * np.cos(2.0 * np.pi * u2)
        i += 1
        if i < n:
            out[i] = r * np.sin(2.0 * np.pi * u2)
            i += 1
    return out


@njit(cache=True, nogil=True)
def shuffle(key, arr):
    """In-place Fisher-Yates shuffle of a 1-D array, driven by `key`."""
    n = arr.shape[0]
    t = np.uint64(0)
    for i in range(n - 1, 0, -1):
        j = int(stream_u64(key, t) % np.uint64(i + 1))
        t += np.uint64(1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp
    return arr


@njit(cache=True, nogil=True)
def permutation(key, n):
    """Uniformly random permutation of range(n) as an int64 array."""
    idx = np.arange(n)
    shuffle(key, idx)
    return idx
