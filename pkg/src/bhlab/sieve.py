"""Prime tables and segmented residue-class sieving."""
from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError

SEGMENT = 1 << 20
PRIME_CACHE_HEADER = "# primes<={bound} v1"


def simple_sieve(limit: int) -> np.ndarray:
    """Plain sieve of Eratosthenes; the reference for the segmented one."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def _segment_primes(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) given all base primes up to sqrt(hi)."""
    seg = np.ones(hi - lo, dtype=bool)
    if lo < 2:
        seg[: 2 - lo] = False
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        seg[start - lo :: p] = False
    return np.flatnonzero(seg).astype(np.int64) + lo


def segmented_primes(bound: int, segment: int = SEGMENT) -> np.ndarray:
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    base = simple_sieve(math.isqrt(bound) + 1)
    chunks = []
    for lo in range(0, bound + 1, segment):
        chunks.append(_segment_primes(lo, min(lo + segment, bound + 1), base))
    return np.concatenate(chunks)


@dataclass
class PrimeTable:
    bound: int
    primes: np.ndarray
    path: Path | None = None

    def __len__(self):
        return len(self.primes)

    def upto(self, x) -> np.ndarray:
        return self.primes[: np.searchsorted(self.primes, x, side="right")]

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
        with open(tmp, "w") as fh:
            fh.write(PRIME_CACHE_HEADER.format(bound=self.bound) + "\n")
            np.savetxt(fh, self.primes, fmt="%d")
        os.replace(tmp, path)
        self.path = path
        return path

    @classmethod
    def load(cls, path) -> "PrimeTable":
        path = Path(path)
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("# primes<=") or not header.endswith(" v1"):
                raise ValueError(f"{path} is not a prime cache file")
            bound = int(header[len("# primes<=") : -3])
            primes = np.loadtxt(fh, dtype=np.int64, ndmin=1)
        return cls(bound, primes, path)


def primes_up_to(bound: int, cache_path=None) -> PrimeTable:
    """All primes <= bound, optionally read from or written to a cache file."""
    if bound < 2:
        raise ValueError("bound must be >= 2")
    if cache_path is not None and Path(cache_path).exists():
        table = PrimeTable.load(cache_path)
        if table.bound >= bound:
            return PrimeTable(bound, table.upto(bound), table.path)
    table = PrimeTable(bound, segmented_primes(bound))
    if cache_path is not None:
        table.save(cache_path)
    return table


_lock = threading.Lock()
_shared = PrimeTable(1, np.zeros(0, dtype=np.int64))


def primes(bound) -> np.ndarray:
    """Primes <= bound from a process-wide table that grows on demand."""
    global _shared
    bound = int(math.floor(bound))
    if bound > _shared.bound:
        with _lock:
            if bound > _shared.bound:
                new = max(bound, 2 * _shared.bound, 1 << 16)
                _shared = PrimeTable(new, segmented_primes(new))
    return _shared.upto(bound)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 13 prime bases; deterministic below 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_bitmap(lo: int, hi: int) -> np.ndarray:
    """Boolean array with entry m - lo true iff m is prime, for lo <= m <= hi."""
    base = primes(math.isqrt(hi) + 1)
    out = np.empty(hi - lo + 1, dtype=bool)
    for start in range(lo, hi + 1, SEGMENT):
        end = min(start + SEGMENT, hi + 1)
        seg = np.zeros(end - start, dtype=bool)
        ps = _segment_primes(start, end, base)
        seg[ps - start] = True
        out[start - lo : end - lo] = seg
    return out


# --- residue-class marking -----------------------------------------------------

def clear_classes(bitmap: np.ndarray, lo: int, p: int, residues, start=None) -> None:
    """Set ``bitmap[m - lo] = False`` for every m ≡ r (mod p), r in residues,
    with m >= start.  bitmap covers lo .. lo + len(bitmap) - 1."""
    first = lo if start is None else max(lo, int(start))
    if first >= lo + len(bitmap):
        return
    for r in residues:
        m0 = first + ((int(r) - first) % p)
        bitmap[m0 - lo :: p] = False


def _run_segments(func, lo: int, hi: int, threads: int = 1, segment: int = SEGMENT):
    bounds = [(s, min(s + segment, hi + 1)) for s in range(lo, hi + 1, segment)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: func(*b), bounds))
    else:
        parts = [func(a, b) for a, b in bounds]
    return parts


# --- residue families / fundamental lemma ----------------------------------

@dataclass(frozen=True)
class ResidueFamily:
    """For each prime p <= z a set I_p of at most min(p - 1, K) residues."""

    z: float
    classes: tuple  # ((p, (r1, r2, ...)), ...) ascending in p
    K: int = 64

    def __post_init__(self):
        for p, rs in self.classes:
            if p > self.z:
                raise ValueError(f"prime {p} exceeds z = {self.z}")
            if len(rs) > min(p - 1, self.K):
                raise ValueError(f"|I_{p}| = {len(rs)} exceeds min(p-1, K)")
            if len(set(rs)) != len(rs) or any(not 0 <= r < p for r in rs):
                raise ValueError(f"bad residues for p = {p}")

    @classmethod
    def from_dict(cls, z, mapping, K=64):
        items = tuple(sorted((int(p), tuple(sorted(int(r) for r in rs))) for p, rs in mapping.items()))
        return cls(z, items, K)

    @classmethod
    def zero_classes(cls, z):
        """I_p = {0} for every p <= z."""
        return cls(z, tuple((int(p), (0,)) for p in primes(z)), 1)

    @classmethod
    def random(cls, z, K, rng: np.random.Generator):
        items = []
        for p in primes(z):
            p = int(p)
            size = min(p - 1, K)
            items.append((p, tuple(sorted(int(r) for r in rng.choice(p, size=size, replace=False)))))
        return cls(z, tuple(items), K)

    def density(self) -> Fraction:
        out = Fraction(1)
        for p, rs in self.classes:
            out *= Fraction(p - len(rs), p)
        return out


def _avoid_segment(family: ResidueFamily, a: int, b: int) -> np.ndarray:
    seg = np.ones(b - a, dtype=bool)
    for p, rs in family.classes:
        clear_classes(seg, a, p, rs)
    return seg


def sieve_avoid(family: ResidueFamily, v: int, w: int, threads: int = 1) -> np.ndarray:
    """Survivor bitmap over (v, v + w]; entry i stands for n = v + 1 + i."""
    if w < 1:
        raise ValueError("w must be >= 1")
    parts = _run_segments(lambda a, b: _avoid_segment(family, a, b), v + 1, v + w, threads)
    return np.concatenate(parts)


def count_avoiding(family: ResidueFamily, v: int, w: int, threads: int = 1) -> int:
    """Survivor count over (v, v + w] without keeping the whole bitmap."""
    if w < 1:
        raise ValueError("w must be >= 1")
    counts = _run_segments(
        lambda a, b: int(np.count_nonzero(_avoid_segment(family, a, b))), v + 1, v + w, threads
    )
    return sum(counts)


@dataclass(frozen=True)
class SegmentReport:
    v: int
    w: int
    z: float
    count: int
    predicted: float
    predicted_exact: Fraction
    ratio: float
    u: float

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "w": self.w,
            "z": self.z,
            "count": self.count,
            "predicted": self.predicted,
            "predicted_exact": f"{self.predicted_exact.numerator}/{self.predicted_exact.denominator}",
            "ratio": self.ratio,
            "u": self.u,
        }


def sifted_count_report(family: ResidueFamily, v: int, w: int, threads: int = 1) -> SegmentReport:
    """Exact sifted count against the product main term w * prod(1 - |I_p|/p)."""
    if w < 1 or family.z < 10:
        raise ValueError("need w >= 1 and z >= 10")
    count = count_avoiding(family, v, w, threads)
    exact = w * family.density()
    predicted = float(exact)
    ratio = count / predicted if predicted > 0 else math.nan
    return SegmentReport(v, w, family.z, count, predicted, exact, ratio, math.log(w) / math.log(family.z))


# --- small prime factors ------------------------------------------------------

def has_small_factor(m: int, t: float) -> bool:
    """True iff some prime p <= t divides m."""
    if m == 0:
        raise DomainError("0 is divisible by every prime")
    m = abs(int(m))
    if m == 1 or t < 2:
        return False
    for p in primes(t):
        p = int(p)
        if m % p == 0:
            return True
        if p * p > m:
            # m > 1 has no factor below sqrt(m), so m itself is prime
            return m <= t
    return False


def small_factor_mask(lo: int, hi: int, t: float, threads: int = 1) -> np.ndarray:
    """Bulk form of has_small_factor over lo..hi (lo >= 1)."""
    if lo < 1:
        raise DomainError("range must start at 1 or above")
    ps = primes(t) if t >= 2 else np.zeros(0, dtype=np.int64)

    def segment(a, b):
        seg = np.zeros(b - a, dtype=bool)
        for p in ps:
            p = int(p)
            first = -(-a // p) * p
            seg[first - a :: p] = True
        return seg

    return np.concatenate(_run_segments(segment, lo, hi, threads))
