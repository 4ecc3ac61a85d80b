"""Counter-based random streams.

Every random draw in bhlab is a pure function of ``(seed, tag, index)``.
The recipe is fixed so that other implementations can reproduce it
bit for bit:

* ``tag(name)`` is the ASCII bytes of ``name`` read as a little-endian
  integer (at most 8 bytes), e.g. ``tag("res") == 0x736572``.
* the stream key is ``splitmix64(seed ^ tag ^ (index mod 2**64))``, where
  ``splitmix64(x)`` is the first output of a SplitMix64 generator whose
  state starts at ``x``.
* a xoshiro256++ generator is seeded with the next four SplitMix64
  outputs of a generator whose state starts at the key, and the stream is
  its output sequence.

Uniform integers below ``n`` use rejection: accept a word ``u`` when
``u < n * floor(2**64 / n)`` and return ``u % n``.  A Bernoulli(q) draw
accepts when the first word is below ``floor(q * 2**64)``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def tag(name: str) -> int:
    raw = name.encode("ascii")
    if len(raw) > 8:
        raise ValueError("tags are at most 8 ASCII characters")
    return int.from_bytes(raw, "little")


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """First SplitMix64 output for state ``x``."""
    return _mix((x + GOLDEN) & MASK64)


def stream_key(seed: int, name: str, index: int) -> int:
    return splitmix64((seed ^ tag(name) ^ index) & MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256pp:
    """xoshiro256++ seeded from a 64-bit key through SplitMix64."""

    __slots__ = ("s",)

    def __init__(self, key: int):
        state = key & MASK64
        s = []
        for _ in range(4):
            state = (state + GOLDEN) & MASK64
            s.append(_mix(state))
        self.s = s

    def next64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Unbiased uniform integer in ``[0, n)`` for ``1 <= n <= 2**64``."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = n * ((1 << 64) // n)
        while True:
            u = self.next64()
            if u < limit:
                return u % n


def stream(seed: int, name: str, index: int) -> Xoshiro256pp:
    return Xoshiro256pp(stream_key(seed, name, index))


def bernoulli_threshold(q: float) -> int:
    """``floor(q * 2**64)`` clipped to ``[0, 2**64]``."""
    if q <= 0.0:
        return 0
    if q >= 1.0:
        return 1 << 64
    return int(q * 18446744073709551616.0)


def bernoulli(seed: int, name: str, index: int, q: float) -> bool:
    return stream(seed, name, index).next64() < bernoulli_threshold(q)


# --- vectorized first word -------------------------------------------------

_U = np.uint64


def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


def first_words(seed: int, name: str, indices) -> np.ndarray:
    """First stream word for many indices at once (uint64 array).

    Agrees exactly with ``stream(seed, name, i).next64()``.
    """
    idx = np.asarray(indices)
    if idx.dtype == object:
        idx = np.array([int(i) & MASK64 for i in idx], dtype=np.uint64)
    else:
        idx = idx.astype(np.uint64)
    base = _U((seed ^ tag(name)) & MASK64)
    with np.errstate(over="ignore"):
        key = _mix_vec((idx ^ base) + _U(GOLDEN))
        s0 = _mix_vec(key + _U(GOLDEN))
        s3 = _mix_vec(key + _U((4 * GOLDEN) & MASK64))
        t = s0 + s3
        return ((t << _U(23)) | (t >> _U(41))) + s0


def bernoulli_thresholds(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized thresholds as (uint64 threshold, always-accept mask)."""
    q = np.asarray(q, dtype=np.float64)
    always = q >= 1.0
    clipped = np.where(always | (q <= 0.0), 0.0, q)
    thr = np.floor(clipped * 18446744073709551616.0).astype(np.uint64)
    return thr, always


def bernoulli_many(seed: int, name: str, indices, q) -> np.ndarray:
    words = first_words(seed, name, indices)
    thr, always = bernoulli_thresholds(q)
    return always | (words < thr)
