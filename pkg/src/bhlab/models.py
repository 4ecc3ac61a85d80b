"""Seeded random sets modelling the primes.

Five models are available:

``cramer``     each n >= 3 independently with probability 1/log n
``granville``  0 if n has a prime factor <= y, else 1/(Theta_y log n)
``m1``         0 if n has a prime factor <= t(n), else 1/(Theta_t(n) log n)
``m2``         n avoids 0 mod p for p <= t(n) and a_p mod p for t(n) < p <= z(n)
``bft_r``      n avoids a_p mod p for every p <= z(n)

Membership of an integer depends only on (spec, integer): Bernoulli draws
and residues a_p come from the counter-based streams in :mod:`bhlab.rng`.
The point path (:meth:`SetInstance.member`) and the bulk paths
(:meth:`SetInstance.materialize`, :meth:`SetInstance.members`) agree exactly.
"""
from __future__ import annotations

import math
import struct
import threading
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import rng
from .errors import KindMismatch, NotPrime, ProfileInvalid, RangeTooLarge
from .sieve import _run_segments, clear_classes, has_small_factor, is_prime, primes
from .singular import ThresholdProfile, theta

KINDS = ("cramer", "granville", "m1", "m2", "bft_r")
BERNOULLI_KINDS = ("cramer", "granville", "m1")
N_MIN = {"cramer": 3, "granville": 3, "m1": 10, "m2": 10, "bft_r": 8}
DEFAULT_BUDGET = 200_000_000


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    seed: int = 0
    profile: ThresholdProfile = field(default_factory=ThresholdProfile.desk)
    granville_y: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_min(self) -> int:
        return N_MIN[self.kind]

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        if self.kind in ("m1", "m2", "bft_r"):
            out["profile"] = self.profile.to_dict()
        if self.kind == "granville":
            out["granville_y"] = self.granville_y
        return out


@lru_cache(maxsize=1 << 16)
def _residue(seed: int, p: int) -> int:
    return rng.stream(seed, "res", p).below(p)


def residue_for_prime(seed: int, p: int) -> int:
    """The class a_p mod p drawn for ``seed``."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return _residue(seed, int(p))


def _first_at_least(func, target: float, lo: int, hi: int) -> int:
    """Smallest m in [lo, hi] with func(m) >= target (func nondecreasing); hi + 1 if none."""
    if func(hi) < target:
        return hi + 1
    if func(lo) >= target:
        return lo
    a, b = lo, hi  # func(a) < target <= func(b)
    while b - a > 1:
        mid = (a + b) // 2
        if func(mid) >= target:
            b = mid
        else:
            a = mid
    return b


class SetInstance:
    """One realization of a model; immutable apart from the clamp record."""

    def __init__(self, spec: ModelSpec, budget: int = DEFAULT_BUDGET):
        self.spec = spec
        self.budget = budget
        self._clamped: set = set()
        self._lock = threading.Lock()

    def __repr__(self):
        return f"SetInstance({self.spec.kind}, seed={self.spec.seed})"

    # -- thresholds ----------------------------------------------------------
    def _t(self, m) -> float:
        if self.spec.kind == "granville":
            return self.spec.granville_y
        return self.spec.profile.t(m)

    def _z(self, m) -> float:
        return self.spec.profile.z(m)

    @property
    def clamp_count(self) -> int:
        """Number of distinct integers whose probability was clamped to 1."""
        return len(self._clamped)

    def _record_clamps(self, ms) -> None:
        if not ms:
            return
        if self.spec.profile.clamp == "raise":
            raise ProfileInvalid(f"inclusion probability exceeds 1 at n = {ms[0]}")
        with self._lock:
            self._clamped.update(ms)

    def _raw_probability(self, n) -> float:
        kind = self.spec.kind
        if kind == "cramer":
            return 1.0 / math.log(n)
        t = self._t(n)
        if has_small_factor(n, t):
            return 0.0
        return 1.0 / (theta(t) * math.log(n))

    def include_probability(self, n) -> float:
        if self.spec.kind not in BERNOULLI_KINDS:
            raise KindMismatch(f"{self.spec.kind} has no Bernoulli component")
        if n < self.spec.n_min:
            raise ValueError(f"n must be >= {self.spec.n_min}")
        q = self._raw_probability(n)
        if q > 1.0:
            self._record_clamps([int(n)])
            return 1.0
        return q

    def residue(self, p: int) -> int:
        return _residue(self.spec.seed, int(p))

    # -- point path ------------------------------------------------------------
    def member(self, m) -> bool:
        m = int(m)
        spec = self.spec
        if m < spec.n_min:
            return False
        if spec.kind in BERNOULLI_KINDS:
            q = self.include_probability(m)
            if q <= 0.0:
                return False
            return rng.stream(spec.seed, "bern", m).next64() < rng.bernoulli_threshold(q)
        z = self._z(m)
        t = self._t(m) if spec.kind == "m2" else 0.0
        for p in primes(max(z, t)):
            p = int(p)
            if p <= t:
                if m % p == 0:
                    return False
            elif p <= z:
                if m % p == self.residue(p):
                    return False
        return True

    def __contains__(self, m) -> bool:
        return self.member(m)

    # -- bulk paths -------------------------------------------------------------
    def _zero_starts(self, lo: int, hi: int) -> list:
        """(p, first m >= lo with p <= t(m)) for primes that matter on [lo, hi]."""
        if self.spec.kind == "granville":
            return [(int(p), lo) for p in primes(self.spec.granville_y)]
        if self.spec.kind not in ("m1", "m2"):
            return []
        return [(int(p), _first_at_least(self._t, p, lo, hi)) for p in primes(self._t(hi))]

    def _random_ranges(self, lo: int, hi: int) -> list:
        """(p, a_p, first, stop): m in [first, stop) is sieved by a_p."""
        kind = self.spec.kind
        if kind not in ("m2", "bft_r"):
            return []
        out = []
        for p in primes(self._z(hi)):
            p = int(p)
            first = _first_at_least(self._z, p, lo, hi)
            stop = hi + 1 if kind == "bft_r" else _first_at_least(self._t, p, lo, hi)
            if first < stop:
                out.append((p, self.residue(p), first, stop))
        return out

    def _segment(self, a: int, b: int, zero, ranges) -> np.ndarray:
        seg = np.ones(b - a, dtype=bool)
        for p, start in zero:
            if start < b:
                clear_classes(seg, a, p, (0,), start)
        for p, r, first, stop in ranges:
            if first < b and stop > a:
                view = seg[: min(stop, b) - a]
                clear_classes(view, a, p, (r,), first)
        if self.spec.kind in BERNOULLI_KINDS:
            idx = np.flatnonzero(seg)
            if len(idx):
                seg[idx] = self._bernoulli_bulk(idx + a)
        return seg

    def _bernoulli_bulk(self, ms: np.ndarray) -> np.ndarray:
        """Bernoulli outcomes for integers already known to pass the sieve part."""
        kind = self.spec.kind
        qs = np.empty(len(ms))
        clamped = []
        for i, m in enumerate(ms.tolist()):
            if kind == "cramer":
                q = 1.0 / math.log(m)
            else:
                q = 1.0 / (theta(self._t(m)) * math.log(m))
            if q > 1.0:
                clamped.append(m)
                q = 1.0
            qs[i] = q
        self._record_clamps(clamped)
        return rng.bernoulli_many(self.spec.seed, "bern", ms.astype(np.uint64), qs)

    def materialize(self, lo: int, hi: int, threads: int = 1) -> np.ndarray:
        """Boolean array whose entry m - lo says whether m is a member."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError("need lo <= hi")
        if hi - lo + 1 > self.budget:
            raise RangeTooLarge(f"range of {hi - lo + 1} integers exceeds budget {self.budget}")
        out = np.zeros(hi - lo + 1, dtype=bool)
        start = max(lo, self.spec.n_min)
        if start > hi:
            return out
        zero = self._zero_starts(start, hi)
        ranges = self._random_ranges(start, hi)
        parts = _run_segments(lambda a, b: self._segment(a, b, zero, ranges), start, hi, threads)
        out[start - lo :] = np.concatenate(parts)
        return out

    def deterministic_mask(self, lo: int, hi: int) -> np.ndarray:
        """Seed-independent part of membership over [lo, hi] (no small factor)."""
        out = np.zeros(hi - lo + 1, dtype=bool)
        start = max(lo, self.spec.n_min)
        if start > hi:
            return out
        seg = np.ones(hi - start + 1, dtype=bool)
        for p, first in self._zero_starts(start, hi):
            clear_classes(seg, start, p, (0,), first)
        out[start - lo :] = seg
        return out

    def members(self, values) -> np.ndarray:
        """Membership for an arbitrary array of integers (bulk, vectorized)."""
        vals = np.asarray(values)
        if vals.size == 0:
            return np.zeros(0, dtype=bool)
        if vals.dtype == object or int(vals.max()) >= 1 << 62:
            return np.array([self.member(int(v)) for v in vals.ravel()], dtype=bool).reshape(vals.shape)
        vals = vals.astype(np.int64)
        lo, hi = int(vals.min()), int(vals.max())
        start = max(lo, self.spec.n_min)
        out = vals >= self.spec.n_min
        if start > hi:
            return out
        for p, first in self._zero_starts(start, hi):
            out &= ~((vals % p == 0) & (vals >= first))
        for p, r, first, stop in self._random_ranges(start, hi):
            out &= ~((vals % p == r) & (vals >= first) & (vals < stop))
        if self.spec.kind in BERNOULLI_KINDS:
            idx = np.flatnonzero(out.ravel())
            if len(idx):
                flat = out.ravel()
                flat[idx] = self._bernoulli_bulk(vals.ravel()[idx])
                out = flat.reshape(vals.shape)
        return out

    def probabilities(self, values) -> np.ndarray:
        """Clamped inclusion probabilities for an array of integers."""
        if self.spec.kind not in BERNOULLI_KINDS:
            raise KindMismatch(f"{self.spec.kind} has no Bernoulli component")
        vals = np.asarray(values, dtype=np.int64)
        out = np.zeros(vals.shape)
        ok = vals >= self.spec.n_min
        if not ok.any():
            return out
        lo, hi = int(vals[ok].min()), int(vals[ok].max())
        for p, first in self._zero_starts(lo, hi):
            ok &= ~((vals % p == 0) & (vals >= first))
        idx = np.flatnonzero(ok)
        clamped = []
        for i, m in zip(idx.tolist(), vals[idx].tolist()):
            if self.spec.kind == "cramer":
                q = 1.0 / math.log(m)
            else:
                q = 1.0 / (theta(self._t(m)) * math.log(m))
            if q > 1.0:
                clamped.append(m)
                q = 1.0
            out[i] = q
        self._record_clamps(clamped)
        return out


def instance(spec: ModelSpec, budget: int = DEFAULT_BUDGET) -> SetInstance:
    return SetInstance(spec, budget)


def include_probability(spec_or_instance, n) -> float:
    inst = spec_or_instance if isinstance(spec_or_instance, SetInstance) else SetInstance(spec_or_instance)
    return inst.include_probability(n)


def member(inst: SetInstance, m) -> bool:
    return inst.member(m)


def materialize(spec: ModelSpec, lo: int, hi: int, threads: int = 1, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    return SetInstance(spec, budget).materialize(lo, hi, threads)


# --- bitmap files ------------------------------------------------------------------

BITMAP_MAGIC = b"BHLB"
BITMAP_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def write_bitmap(path, lo: int, hi: int, bits: np.ndarray) -> None:
    """16-byte header (magic, version, lo, hi) then little-endian packed bits."""
    if len(bits) != hi - lo + 1:
        raise ValueError("bitmap length does not match range")
    if not 0 <= lo <= hi < 1 << 32:
        raise RangeTooLarge("bitmap files hold ranges below 2**32")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(BITMAP_MAGIC, BITMAP_VERSION, lo, hi))
        fh.write(np.packbits(bits.astype(bool), bitorder="little").tobytes())


def read_bitmap(path) -> tuple:
    with open(path, "rb") as fh:
        magic, version, lo, hi = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != BITMAP_MAGIC or version != BITMAP_VERSION:
            raise ValueError(f"{path} is not a bh-lab bitmap")
        raw = np.frombuffer(fh.read(), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[: hi - lo + 1].astype(bool)
    return lo, hi, bits
