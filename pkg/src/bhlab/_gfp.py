"""Dense polynomials over the field with p elements.

Polynomials are lists of ints in ascending degree order with no trailing
zeros; the zero polynomial is ``[]``.
"""
from __future__ import annotations


def trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def reduce(coeffs, p):
    return trim([c % p for c in coeffs])


def sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return trim(out)


def mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([c % p for c in out])


def monic(a, p):
    inv = pow(a[-1], -1, p)
    return [(c * inv) % p for c in a]


def divmod_(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    if len(a) <= db:
        return [], trim(a)
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = (a[i] * inv) % p
        if c:
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return trim(q), trim(a[:db])


def mod(a, b, p):
    return divmod_(a, b, p)[1]


def gcd(a, b, p):
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, mod(a, b, p)
    return monic(a, p) if a else []


def mulmod(a, b, f, p):
    return mod(mul(a, b, p), f, p)


def powmod(base, e, f, p):
    """``base**e mod f`` by square-and-multiply."""
    result = [1] if len(f) > 1 else []
    base = mod(base, f, p)
    while e:
        if e & 1:
            result = mulmod(result, base, f, p)
        e >>= 1
        if e:
            base = mulmod(base, base, f, p)
    return result


def x_pow_mod(e, f, p):
    """``X**e mod f``; multiplication by X is a shift so only squarings cost."""
    if len(f) <= 1:
        return []
    result = [1]
    for bit in bin(e)[2:]:
        result = mulmod(result, result, f, p)
        if bit == "1":
            result = mod([0] + result, f, p)
    return result


def evaluate(a, x, p):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def count_distinct_roots(f, p):
    """``deg gcd(X^p - X, f)`` for nonzero non-constant ``f`` over F_p."""
    h = sub(x_pow_mod(p, f, p), [0, 1], p)
    return len(gcd(f, h, p)) - 1


def is_irreducible(f, p):
    """Distinct-degree test: ``f`` (degree d, leading coeff nonzero mod p)
    is irreducible iff gcd(X^(p^i) - X, f) = 1 for every i <= d // 2."""
    d = len(f) - 1
    if d <= 0:
        return False
    if d == 1:
        return True
    f = monic(f, p)
    h = [0, 1]
    for _ in range(d // 2):
        h = powmod(h, p, f, p)
        g = gcd(f, sub(h, [0, 1], p), p)
        if len(g) > 1:
            return False
    return True
