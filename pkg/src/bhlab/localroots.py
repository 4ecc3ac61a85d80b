"""Root counts of integer polynomials modulo primes.

``rho_p(f, p)`` counts residues n mod p with f(n) ≡ 0, ``nu_p`` does the
same for the product of a tuple, and ``roots_mod_p`` returns the root set
itself.  Small primes are scanned exhaustively; larger ones go through
``gcd(X^p - X, f)`` over F_p.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from filelock import FileLock

from . import _gfp, rng
from ._kernels import batch_root_counts, linear_local_table
from .errors import NotPrime
from .polyarith import Polynomial, PolyTuple, poly_mul
from .sieve import is_prime

EXHAUSTIVE_COUNT = 50
EXHAUSTIVE_ROOTS = 10_000
SPLIT_SEED = 0x5EED_B4_1AB


def _check_prime(p):
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")


def _exhaustive_roots(coeffs, p) -> list:
    x = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * x + (int(c) % p)) % p
    return np.flatnonzero(acc == 0).tolist()


def _count(coeffs, p) -> int:
    g = _gfp.reduce(coeffs, p)
    if not g:
        return p
    if len(g) == 1:
        return 0
    if p < EXHAUSTIVE_COUNT:
        return sum(1 for x in range(p) if _gfp.evaluate(g, x, p) == 0)
    return _gfp.count_distinct_roots(g, p)


def rho_p(f, p: int) -> int:
    """Number of residues n mod p with f(n) ≡ 0 (mod p)."""
    _check_prime(p)
    return _count(Polynomial.coerce(f).coeffs, p)


def nu_p(tup, p: int) -> int:
    """Number of residues n mod p killing f_1(n)...f_k(n)."""
    _check_prime(p)
    coeffs = tup.product_coeffs() if isinstance(tup, PolyTuple) else _product(tup)
    return _count(coeffs, p)


def _product(polys):
    out = [1]
    for f in polys:
        out = poly_mul(out, Polynomial.coerce(f).coeffs)
    return out


def _split(g, p, gen):
    """Split a monic squarefree product of distinct linear factors."""
    if len(g) == 2:
        return [(-g[0]) % p]
    if p == 2:
        return [x for x in range(2) if _gfp.evaluate(g, x, p) == 0]
    while True:
        a = gen.below(p)
        h = _gfp.powmod([a, 1], (p - 1) // 2, g, p)
        d = _gfp.gcd(g, _gfp.sub(h, [1], p), p)
        if 1 < len(d) < len(g):
            q, _ = _gfp.divmod_(g, d, p)
            return _split(d, p, gen) + _split(_gfp.monic(q, p), p, gen)


@lru_cache(maxsize=65536)
def _roots_cached(coeffs: tuple, p: int) -> frozenset:
    g = _gfp.reduce(coeffs, p)
    if not g:
        return frozenset(range(p))
    if len(g) == 1:
        return frozenset()
    if p < EXHAUSTIVE_ROOTS:
        return frozenset(_exhaustive_roots(g, p))
    g = _gfp.monic(g, p)
    lin = _gfp.gcd(g, _gfp.sub(_gfp.x_pow_mod(p, g, p), [0, 1], p), p)
    if len(lin) <= 1:
        return frozenset()
    # fixed seed: root sets must not depend on simulation seeds
    gen = rng.stream(SPLIT_SEED, "edf", p)
    return frozenset(_split(lin, p, gen))


def roots_mod_p(f, p: int) -> frozenset:
    """The root set of f modulo p."""
    _check_prime(p)
    return _roots_cached(Polynomial.coerce(f).coeffs, int(p))


@dataclass(frozen=True)
class LocalData:
    p: int
    rho: tuple
    nu: int
    roots: tuple | None = None


def local_data(tup: PolyTuple, p: int, with_roots: bool = False) -> LocalData:
    roots = tuple(roots_mod_p(f, p) for f in tup.polys) if with_roots else None
    return LocalData(p, tuple(rho_p(f, p) for f in tup.polys), nu_p(tup, p), roots)


# --- batch tables ---------------------------------------------------------------

def rho_table(f, primes) -> np.ndarray:
    """rho_p(f) for every prime in an ascending array (no primality check)."""
    return batch_root_counts(Polynomial.coerce(f).coeffs, primes)


def nu_table(tup: PolyTuple, primes) -> np.ndarray:
    return batch_root_counts(tup.product_coeffs(), primes)


def local_table(tup: PolyTuple, primes, cache: "LocalDataCache | None" = None) -> tuple:
    """(rho matrix of shape (len(primes), k), nu vector) for ascending primes."""
    primes = np.asarray(primes, dtype=np.int64)
    if cache is not None:
        hit = cache.lookup(tup, primes)
        if hit is not None:
            return hit
    if len(primes) == 0:
        rho, nu = np.zeros((0, tup.k), np.int64), np.zeros(0, np.int64)
    elif all(f.degree == 1 for f in tup.polys):
        # a degree-1 factor has its root in closed form; same counts as the gcd route
        rho, nu = linear_local_table([f.coeffs for f in tup.polys], primes)
    else:
        rho = np.stack([rho_table(f, primes) for f in tup.polys], axis=1)
        nu = nu_table(tup, primes)
    if cache is not None:
        cache.store(tup, primes, rho, nu)
    return rho, nu


def disjointness_violations(tup: PolyTuple, bound: int) -> list:
    """Primes p <= bound at which some root sets overlap (nu_p < sum rho_p)."""
    from .sieve import primes as prime_list

    ps = prime_list(bound)
    rho, nu = local_table(tup, ps)
    return [int(p) for p, r, n in zip(ps, rho, nu) if n < r.sum()]


class LocalDataCache:
    """On-disk cache of local data, one text file per tuple hash.

    Lines are ``p,rho_1,...,rho_k,nu`` in ascending p after a header
    ``# bh-lab localdata v1 <hash> k=<k>``.  Writes go through a file
    lock and an atomic rename, so readers never see partial files.
    """

    VERSION = "v1"
    MAX_P = 10**6

    def __init__(self, directory):
        self.directory = Path(directory)

    def path(self, tup: PolyTuple) -> Path:
        return self.directory / f"localdata-{tup.hash}.csv"

    def read(self, tup: PolyTuple):
        path = self.path(tup)
        if not path.exists():
            return None
        with open(path) as fh:
            header = fh.readline().split()
            if header[:4] != ["#", "bh-lab", "localdata", self.VERSION] or header[4] != tup.hash:
                return None
            data = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
        return data

    def lookup(self, tup: PolyTuple, primes: np.ndarray):
        if len(primes) == 0 or primes[-1] > self.MAX_P:
            return None
        data = self.read(tup)
        if data is None or len(data) == 0 or data[-1, 0] < primes[-1]:
            return None
        idx = np.searchsorted(data[:, 0], primes)
        if np.any(idx >= len(data)) or np.any(data[idx, 0] != primes):
            return None
        rows = data[idx]
        return rows[:, 1:-1], rows[:, -1]

    def store(self, tup: PolyTuple, primes: np.ndarray, rho: np.ndarray, nu: np.ndarray):
        keep = primes <= self.MAX_P
        if not np.any(keep):
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(tup)
        with FileLock(str(path) + ".lock"):
            existing = self.read(tup)
            rows = np.column_stack([primes[keep], rho[keep], nu[keep]])
            if existing is not None and len(existing):
                rows = np.concatenate([existing, rows])
                _, first = np.unique(rows[:, 0], return_index=True)
                rows = rows[first]
            tmp = path.with_suffix(f".tmp{os.getpid()}")
            with open(tmp, "w") as fh:
                fh.write(f"# bh-lab localdata {self.VERSION} {tup.hash} k={tup.k}\n")
                np.savetxt(fh, rows, fmt="%d", delimiter=",")
            os.replace(tmp, path)

    def clear(self):
        if self.directory.exists():
            for path in self.directory.glob("localdata-*"):
                path.unlink()

