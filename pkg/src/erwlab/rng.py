"""Counter-based random streams (Philox4x32-10).

A stream is addressed by ``(seed, index)``: the 64-bit master seed is the
Philox key and the 64-bit stream index fills the upper half of the 128-bit
counter. The lower half counts blocks, so draw ``d`` of a stream is a pure
function of ``(seed, index, d)``. Each block gives four 32-bit words, which
become two 53-bit uniforms on [0, 1).
"""
from __future__ import annotations

import numpy as np
from numba import njit

RNG_FAMILY = "philox4x32-10; key=seed(64b); counter=(block lo, block hi, stream lo, stream hi); 2 x 53-bit uniforms per block"

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_SHIFT32 = np.uint64(32)
_TWO_M53 = 1.0 / 9007199254740992.0


@njit(nogil=True, cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox4x32 bijection; every argument is a uint64 holding 32 bits."""
    for _ in range(10):
        prod0 = _M0 * c0
        prod1 = _M1 * c2
        hi0 = prod0 >> _SHIFT32
        lo0 = prod0 & _MASK32
        hi1 = prod1 >> _SHIFT32
        lo1 = prod1 & _MASK32
        c0 = (hi1 ^ c1 ^ k0) & _MASK32
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & _MASK32
        c3 = lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


@njit(nogil=True, cache=True)
def uniform_pair(seed, stream, block):
    """Two uniforms on [0, 1) for one counter block (draws 2*block and 2*block + 1)."""
    seed = np.uint64(seed)
    stream = np.uint64(stream)
    block = np.uint64(block)
    w0, w1, w2, w3 = philox4x32(
        block & _MASK32,
        block >> _SHIFT32,
        stream & _MASK32,
        stream >> _SHIFT32,
        seed & _MASK32,
        seed >> _SHIFT32,
    )
    u0 = ((w0 >> np.uint64(5)) * np.uint64(67108864) + (w1 >> np.uint64(6))) * _TWO_M53
    u1 = ((w2 >> np.uint64(5)) * np.uint64(67108864) + (w3 >> np.uint64(6))) * _TWO_M53
    return u0, u1


@njit(nogil=True, cache=True)
def uniform_at(seed, stream, draw):
    u0, u1 = uniform_pair(seed, stream, np.uint64(draw) >> np.uint64(1))
    if draw & 1:
        return u1
    return u0


@njit(nogil=True, cache=True)
def _fill_uniforms(seed, stream, start, out):
    for i in range(out.shape[0]):
        out[i] = uniform_at(seed, stream, start + i)


def _as_u64(value: int, what: str) -> int:
    value = int(value)
    if not 0 <= value < 2**64:
        raise ValueError(f"{what} must fit in 64 unsigned bits, got {value}")
    return value


class RngStream:
    """Deterministic uniform stream for one ``(seed, index)`` pair.

    ``position`` is the number of draws consumed so far; simulation kernels
    read from it and advance it, so mixing scalar and bulk use stays
    consistent.
    """

    family = RNG_FAMILY

    def __init__(self, seed: int, index: int = 0, position: int = 0):
        self.seed = _as_u64(seed, "seed")
        self.index = _as_u64(index, "stream index")
        self.position = int(position)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, index={self.index}, position={self.position})"

    def uniform(self) -> float:
        u = uniform_at(np.uint64(self.seed), np.uint64(self.index), np.uint64(self.position))
        self.position += 1
        return float(u)

    def uniforms(self, k: int) -> np.ndarray:
        out = np.empty(int(k), dtype=np.float64)
        _fill_uniforms(np.uint64(self.seed), np.uint64(self.index), np.uint64(self.position), out)
        self.position += int(k)
        return out

    def advance(self, k: int) -> None:
        self.position += int(k)

    def spawn(self, index: int) -> "RngStream":
        """A fresh stream under the same seed."""
        return RngStream(self.seed, index)
