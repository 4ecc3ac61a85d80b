"""Compiled batch root counting over many primes at once.

All arithmetic is int64 with p < 2**31, so products stay below 2**62.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MAX_PRIME = 1 << 31


@njit(cache=True)
def _inv(a, p):
    r = 1
    e = p - 2
    b = a % p
    while e:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


@njit(cache=True)
def _sqrmod(r, f, d, p, tmp):
    # r <- r*r mod monic f, in place; tmp has length >= 2d
    for i in range(2 * d - 1):
        tmp[i] = 0
    for i in range(d):
        ri = r[i]
        if ri == 0:
            continue
        for j in range(d):
            tmp[i + j] = (tmp[i + j] + ri * r[j]) % p
    for i in range(2 * d - 2, d - 1, -1):
        c = tmp[i]
        if c != 0:
            for j in range(d):
                tmp[i - d + j] = (tmp[i - d + j] - c * f[j]) % p
    for i in range(d):
        r[i] = tmp[i]


@njit(cache=True)
def _shift_x(r, f, d, p):
    # r <- r*X mod monic f, in place
    top = r[d - 1]
    for i in range(d - 1, 0, -1):
        r[i] = (r[i - 1] - top * f[i]) % p
    r[0] = (-top * f[0]) % p


@njit(cache=True)
def _degree(a, n):
    for i in range(n - 1, -1, -1):
        if a[i] != 0:
            return i
    return -1


@njit(cache=True)
def _gcd_degree(a, da, b, db, p):
    # degree of gcd of a (deg da) and b (deg db) over F_p; arrays are modified
    while db >= 0:
        inv = _inv(b[db], p)
        while da >= db:
            c = a[da] * inv % p
            if c != 0:
                for j in range(db + 1):
                    a[da - db + j] = (a[da - db + j] - c * b[j]) % p
            da = _degree(a, da)
            if da < 0:
                break
        a, b = b, a
        da, db = db, da
    return da


@njit(cache=True)
def _count_one(c, p):
    # c: coefficients already reduced mod p, ascending, fixed length
    d = _degree(c, c.shape[0])
    if d < 0:
        return p
    if d == 0:
        return 0
    if p < 50:
        n_roots = 0
        for x in range(p):
            acc = 0
            for i in range(d, -1, -1):
                acc = (acc * x + c[i]) % p
            if acc == 0:
                n_roots += 1
        return n_roots
    inv = _inv(c[d], p)
    f = np.empty(d + 1, np.int64)
    for i in range(d + 1):
        f[i] = c[i] * inv % p
    tmp = np.zeros(2 * d, np.int64)
    r = np.zeros(d, np.int64)
    r[0] = 1 % p
    # left-to-right square and multiply for X^p
    nbits = 0
    e = p
    while e:
        nbits += 1
        e >>= 1
    for k in range(nbits - 1, -1, -1):
        _sqrmod(r, f, d, p, tmp)
        if (p >> k) & 1:
            _shift_x(r, f, d, p)
    # h = X^p - X mod f
    h = np.zeros(d + 1, np.int64)
    for i in range(d):
        h[i] = r[i]
    if d >= 2:
        h[1] = (h[1] - 1) % p
    else:
        # d == 1: X mod f is -f[0]
        h[0] = (h[0] + f[0]) % p
    dh = _degree(h, d)
    if dh < 0:
        return d
    a = f.copy()
    return _gcd_degree(a, d, h, dh, p)


@njit(cache=True)
def count_roots_batch(coeffs, primes):
    """Distinct root counts; row i of coeffs holds the polynomial mod primes[i]."""
    n = primes.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        out[i] = _count_one(coeffs[i], primes[i])
    return out


def reduce_coeffs(coeffs, primes: np.ndarray) -> np.ndarray:
    """Matrix of coefficients reduced mod each prime (rows: primes)."""
    primes = np.asarray(primes, dtype=np.int64)
    out = np.empty((len(primes), len(coeffs)), dtype=np.int64)
    for j, c in enumerate(coeffs):
        c = int(c)
        if -(1 << 62) < c < (1 << 62):
            out[:, j] = np.int64(c) % primes
        else:
            out[:, j] = [c % int(p) for p in primes]
    return out


def batch_root_counts(coeffs, primes) -> np.ndarray:
    primes = np.asarray(primes, dtype=np.int64)
    if len(primes) and primes.max() >= MAX_PRIME:
        raise ValueError("batch kernel needs primes below 2**31")
    if len(primes) == 0:
        return np.zeros(0, dtype=np.int64)
    return count_roots_batch(reduce_coeffs(coeffs, primes), primes)


@njit(cache=True)
def _linear_batch(a, b, primes):
    # a, b: (n, k) reduced coefficients of a_j X + b_j; returns (rho, nu)
    n, k = a.shape
    rho = np.empty((n, k), np.int64)
    nu = np.empty(n, np.int64)
    roots = np.empty(k, np.int64)
    for i in range(n):
        p = primes[i]
        everything = False
        m = 0
        for j in range(k):
            if a[i, j] == 0:
                if b[i, j] == 0:
                    rho[i, j] = p
                    everything = True
                else:
                    rho[i, j] = 0
                continue
            rho[i, j] = 1
            r = (-b[i, j] * _inv(a[i, j], p)) % p
            seen = False
            for q in range(m):
                if roots[q] == r:
                    seen = True
                    break
            if not seen:
                roots[m] = r
                m += 1
        nu[i] = p if everything else m
    return rho, nu


def _monic_linear_table(shifts, primes):
    # roots of X + b are -b mod p: count distinct entries per row, no compilation needed
    roots = np.stack([(-np.int64(b)) % primes for b in shifts], axis=1)
    roots.sort(axis=1)
    nu = 1 + np.count_nonzero(np.diff(roots, axis=1), axis=1)
    return np.ones_like(roots), nu.astype(np.int64)


def linear_local_table(polys, primes):
    """(rho, nu) for a tuple of degree-1 polynomials given as coefficient pairs."""
    primes = np.asarray(primes, dtype=np.int64)
    if len(primes) and primes.max() >= MAX_PRIME:
        raise ValueError("batch kernel needs primes below 2**31")
    if all(c[1] == 1 and abs(c[0]) < 1 << 62 for c in polys):
        return _monic_linear_table([int(c[0]) for c in polys], primes)
    a = np.stack([reduce_coeffs([c[1]], primes)[:, 0] for c in polys], axis=1)
    b = np.stack([reduce_coeffs([c[0]], primes)[:, 0] for c in polys], axis=1)
    return _linear_batch(a, b, primes)
