"""Integer polynomials, tuple normalization, and an irreducibility certifier."""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import _gfp
from .errors import OrderingImpossible


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with integer coefficients, lowest degree first."""

    coeffs: tuple

    def __post_init__(self):
        c = [int(a) for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        if len(c) < 2:
            raise ValueError("polynomial must have degree >= 1")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        return cls(parse_coeffs(text))

    @classmethod
    def coerce(cls, obj) -> "Polynomial":
        if isinstance(obj, Polynomial):
            return obj
        if isinstance(obj, str):
            return cls.parse(obj)
        return cls(tuple(obj))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    @property
    def content(self) -> int:
        return math.gcd(*self.coeffs)

    def __call__(self, n):
        return evaluate(self, n)

    def shift(self, N: int) -> "Polynomial":
        """The polynomial ``X -> f(X + N)``."""
        return Polynomial(taylor_shift(self.coeffs, N))

    def to_list(self) -> list:
        return list(self.coeffs)

    def __str__(self):
        return format_coeffs(self.coeffs)

    def __repr__(self):
        return f"Polynomial({format_coeffs(self.coeffs)!r})"


def evaluate(f: Polynomial, n):
    """Horner evaluation; exact for Python ints."""
    acc = 0
    for c in reversed(f.coeffs):
        acc = acc * n + c
    return acc


def taylor_shift(coeffs: Sequence[int], N: int) -> tuple:
    out = list(coeffs)
    d = len(out) - 1
    # repeated synthetic division by (X - N) gives the Taylor coefficients at N
    for i in range(d):
        for j in range(d - 1, i - 1, -1):
            out[j] += N * out[j + 1]
    return tuple(out)


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_sub(a: Sequence[int], b: Sequence[int]) -> list:
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] -= c
    while out and out[-1] == 0:
        out.pop()
    return out


def exact_divide(a: Sequence[int], b: Sequence[int]) -> list:
    """Quotient ``a / b`` in Z[X]; raises ValueError if it is not exact."""
    a = list(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        raise ValueError("divisor has larger degree")
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c, r = divmod(a[i], b[-1])
        if r:
            raise ValueError("division is not exact over Z")
        q[i - db] = c
        for j in range(db + 1):
            a[i - db + j] -= c * b[j]
    if any(a[:db]):
        raise ValueError("division is not exact over Z")
    return q


# --- text form ---------------------------------------------------------------

_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(x(?:\s*\^\s*(\d+))?)?", re.IGNORECASE)


def parse_coeffs(text: str) -> list:
    """Parse strings such as ``"X^2+1"``, ``"2X^3 + X + 5"`` or ``"x-7"``."""
    s = text.replace(" ", "").replace("**", "^")
    if not s:
        raise ValueError("empty polynomial string")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {s[pos:]!r}")
        sign, digits, xpart, exp = m.groups()
        if pos > 0 and not sign:
            raise ValueError(f"missing operator in {text!r}")
        if not digits and not xpart:
            raise ValueError(f"cannot parse polynomial {text!r}")
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        power = 0 if not xpart else (int(exp) if exp else 1)
        coeffs[power] = coeffs.get(power, 0) + c
        pos = m.end()
    out = [0] * (max(coeffs) + 1)
    for k, v in coeffs.items():
        out[k] = v
    return out


def format_coeffs(coeffs: Sequence[int]) -> str:
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if k == 0:
            body = str(a)
        else:
            mono = "X" if k == 1 else f"X^{k}"
            body = mono if a == 1 else f"{a}{mono}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += sign + body
    return out


def parse_tuple(text: str) -> list:
    """Comma separated polynomials, e.g. ``"X,X+2"``."""
    return [Polynomial.parse(part) for part in text.split(",") if part.strip()]


# --- tuples ------------------------------------------------------------------

@dataclass(frozen=True)
class PolyTuple:
    polys: tuple
    shift: int = 0
    original: tuple = field(default=(), compare=False)

    @property
    def k(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> list:
        return [f.degree for f in self.polys]

    def values(self, n) -> list:
        return [f(n) for f in self.polys]

    def product_coeffs(self) -> list:
        out = [1]
        for f in self.polys:
            out = poly_mul(out, f.coeffs)
        return out

    def to_lists(self) -> list:
        return [f.to_list() for f in self.polys]

    @property
    def is_linear(self) -> bool:
        return all(f.degree == 1 for f in self.polys)

    @property
    def hash(self) -> str:
        return tuple_hash(self.polys)

    def __str__(self):
        return "(" + ", ".join(str(f) for f in self.polys) + ")"

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)


def tuple_hash(polys: Iterable[Polynomial]) -> str:
    payload = json.dumps([list(Polynomial.coerce(f).coeffs) for f in polys], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def cauchy_bound(coeffs: Sequence[int]) -> int:
    """Integer strictly above every real root of the polynomial."""
    lead = abs(coeffs[-1])
    return 1 + max((abs(c) + lead - 1) // lead for c in coeffs[:-1]) if len(coeffs) > 1 else 1


def positive_on_naturals(coeffs: Sequence[int], strict: bool = True) -> bool:
    """Decide whether ``g(n) > 0`` (or ``>= 0``) for every integer n >= 1."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    if not c:
        return not strict
    if all(a >= 0 for a in c):
        return True
    if c[-1] < 0:
        return False
    g = Polynomial(c) if len(c) > 1 else None
    if g is None:
        return c[0] > 0 or (not strict and c[0] == 0)
    # beyond the Cauchy bound g keeps the sign of its leading coefficient
    for n in range(1, cauchy_bound(c) + 1):
        v = g(n)
        if v < 0 or (strict and v == 0):
            return False
    return True


def _ordering_key(f: Polynomial):
    return (f.degree, f.coeffs[::-1])


def _chain_holds(polys: Sequence[Polynomial]) -> bool:
    if not positive_on_naturals(poly_sub(polys[0].coeffs, [0, 1]), strict=False):
        return False
    for a, b in zip(polys, polys[1:]):
        if not positive_on_naturals(poly_sub(b.coeffs, a.coeffs), strict=True):
            return False
    return True


def normalize_tuple(raw: Iterable, max_shift: int = 10**6) -> PolyTuple:
    """Shift and sort a tuple so every coefficient is nonnegative and
    ``n <= f_1(n) < f_2(n) < ... < f_k(n)`` for all n >= 1.

    The shift N is the smallest nonnegative integer for which both
    conditions are certified.
    """
    polys = [Polynomial.coerce(f) for f in raw]
    if not polys:
        raise ValueError("empty tuple")
    if len(set(polys)) != len(polys):
        raise OrderingImpossible("tuple contains duplicate polynomials")
    for f in polys:
        if f.leading <= 0:
            raise ValueError(f"{f} has a nonpositive leading coefficient")
    # sorting by eventual size; shifting never changes this order
    ordered = sorted(polys, key=_ordering_key)
    for N in range(max_shift + 1):
        shifted = [f.shift(N) for f in ordered] if N else ordered
        if all(c >= 0 for f in shifted for c in f.coeffs) and _chain_holds(shifted):
            return PolyTuple(tuple(shifted), N, tuple(polys))
    raise OrderingImpossible(f"no valid shift found below {max_shift}")


# --- irreducibility ----------------------------------------------------------

@dataclass(frozen=True)
class Irreducible:
    witness: int


@dataclass(frozen=True)
class Reducible:
    factor: tuple
    cofactor: tuple


@dataclass(frozen=True)
class Undetermined:
    primes_tried: tuple


def _divisors(n: int, limit: int = 10**12):
    n = abs(n)
    if n == 0 or n > limit:
        return None
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def rational_root(coeffs: Sequence[int]):
    """Some rational root ``r/s`` as (r, s) with s > 0, or None.

    Returns None also when the constant or leading term is too large to
    enumerate divisors.
    """
    if coeffs[0] == 0:
        return (0, 1)
    num = _divisors(coeffs[0])
    den = _divisors(coeffs[-1])
    if num is None or den is None:
        return None
    d = len(coeffs) - 1
    for s in den:
        for r in num:
            if math.gcd(r, s) != 1:
                continue
            for rr in (r, -r):
                if sum(c * rr**i * s ** (d - i) for i, c in enumerate(coeffs)) == 0:
                    return (rr, s)
    return None


def _small_primes():
    p = 2
    while True:
        if all(p % q for q in range(2, math.isqrt(p) + 1)):
            yield p
        p += 1


def irreducibility_status(f, budget: int = 20):
    """Best-effort certificate of irreducibility in Z[X]."""
    f = Polynomial.coerce(f)
    c = f.content
    if c > 1:
        return Reducible((c,), tuple(a // c for a in f.coeffs))
    if f.degree == 1:
        for p in _small_primes():
            if f.leading % p:
                return Irreducible(p)
    root = rational_root(f.coeffs)
    if root is not None:
        r, s = root
        factor = (-r, s)
        return Reducible(factor, tuple(exact_divide(f.coeffs, factor)))
    tried = []
    for p in _small_primes():
        if len(tried) >= budget:
            break
        if f.leading % p == 0:
            continue
        tried.append(p)
        if _gfp.is_irreducible(_gfp.reduce(f.coeffs, p), p):
            return Irreducible(p)
    return Undetermined(tuple(tried))
