"""Counter-based random numbers (Philox4x32-10) for order-independent draws.

Every draw is a pure function of ``(seed, run, lineage, draw)``, so the
simulated process does not depend on traversal order or worker count.
"""

import math

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

ROOT_LINEAGE = np.uint64(0x5EED0F0A11BB0001)

_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / 9007199254740992.0
_INV_2_32 = 1.0 / 4294967296.0


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox4x32 block. All arguments are uint64 holding 32-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK32
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


@njit(cache=True, nogil=True)
def mix64(z):
    """SplitMix64 finalizer (a bijection on 64-bit words)."""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def child_lineage(parent, slot):
    return mix64(parent + (np.uint64(slot) + np.uint64(1)) * _GOLDEN)


@njit(cache=True, nogil=True)
def _open_unit(a, b):
    # 53 random bits mapped into the open interval (0, 1)
    return (float((a >> np.uint64(5)) * np.uint64(67108864) + (b >> np.uint64(6))) + 0.5) * _INV_2_53


@njit(cache=True, nogil=True)
def _open_unit32(a):
    return (float(a) + 0.5) * _INV_2_32


@njit(cache=True, nogil=True)
def segment_draws(key0, key1, run, lineage):
    """Return ``(radius, angle, u_clock)`` for one particle segment.

    ``radius * cos(angle)`` and ``radius * sin(angle)`` are independent
    standard normals (Box-Muller); the sine is only needed at query leaves,
    so callers evaluate it lazily.  The radius uses 53 random bits, the angle
    and the clock uniform 32 bits each, so lifetimes are capped near
    ``22.9 / rate`` (probability 2**-33 per segment).
    """
    a0, a1, a2, a3 = philox4x32(lineage & _MASK32, lineage >> _S32,
                                np.uint64(run) & _MASK32, np.uint64(0), key0, key1)
    radius = math.sqrt(-2.0 * math.log(_open_unit(a0, a1)))
    return radius, _TWO_PI * _open_unit32(a2), _open_unit32(a3)


@njit(cache=True, nogil=True)
def split_draw(key0, key1, run, lineage):
    """Uniform on (0, 1) deciding what happens at the end of a type-1 segment."""
    b0, b1, _, _ = philox4x32(lineage & _MASK32, lineage >> _S32,
                              np.uint64(run) & _MASK32, np.uint64(1), key0, key1)
    return _open_unit(b0, b1)


def split_seed(seed):
    """Split a 64-bit seed into the two 32-bit Philox key words."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32)


def derive_seed(seed, index):
    """Deterministic 64-bit child seed, used to decorrelate experiment arms."""
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    return int(mix64(np.uint64(z)))
