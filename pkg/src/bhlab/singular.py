"""Mertens-type products, singular series, main terms and thresholds."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate

from .errors import DomainError, Inadmissible, ProfileInvalid
from .localroots import local_table, nu_p
from .polyarith import PolyTuple
from .sieve import primes

EULER_GAMMA = 0.57721566490153286061
EXP_MINUS_GAMMA = math.exp(-EULER_GAMMA)


# --- Theta_z ---------------------------------------------------------------------

_theta_lock = threading.Lock()
_theta_cache = {"bound": 0, "primes": None, "cum": None}


def _theta_arrays(z):
    z = int(math.floor(z))
    if z > _theta_cache["bound"]:
        with _theta_lock:
            if z > _theta_cache["bound"]:
                bound = max(z, 2 * _theta_cache["bound"], 1 << 16)
                ps = primes(bound)
                _theta_cache.update(bound=bound, primes=ps, cum=np.cumprod(1.0 - 1.0 / ps))
    return _theta_cache["primes"], _theta_cache["cum"]


def theta(z: float) -> float:
    """prod_{p <= z} (1 - 1/p); the empty product is 1."""
    if z < 2:
        return 1.0
    ps, cum = _theta_arrays(z)
    i = int(np.searchsorted(ps, math.floor(z), side="right"))
    return float(cum[i - 1]) if i else 1.0


def theta_many(zs) -> np.ndarray:
    zs = np.asarray(zs, dtype=np.float64)
    if zs.size == 0:
        return np.ones(0)
    ps, cum = _theta_arrays(max(2.0, float(zs.max())))
    idx = np.searchsorted(ps, np.floor(zs), side="right")
    out = np.ones(zs.shape)
    ok = idx > 0
    out[ok] = cum[idx[ok] - 1]
    return out


def theta_exact(z: float) -> Fraction:
    out = Fraction(1)
    for p in primes(z) if z >= 2 else []:
        out *= Fraction(int(p) - 1, int(p))
    return out


def v_H(shifts, z: float, exact: bool = False):
    """prod_{p <= z} (1 - |H mod p| / p)."""
    H = {int(h) for h in shifts}
    if not H:
        raise ValueError("H must be nonempty")
    out = Fraction(1) if exact else 1.0
    for p in primes(z) if z >= 2 else []:
        p = int(p)
        c = len({h % p for h in H})
        out *= Fraction(p - c, p) if exact else (1.0 - c / p)
    return out


# --- threshold profiles -----------------------------------------------------------

@dataclass(frozen=True)
class ThresholdProfile:
    """Inner threshold t(n) and outer threshold z(n) for the sieve models.

    t_kind: ``paper`` (exp((log n log log n)^(2/3))), ``exp_pow``
    (exp((log n)^t_param)) or ``fixed`` (t_param).
    z_kind: ``paper`` (n^(e^-gamma)), ``pow`` (n^z_param) or ``fixed``.
    ``start`` is the first n from which t(n) < z(n) is required.
    """

    t_kind: str = "exp_pow"
    t_param: float = 2.0 / 3.0
    z_kind: str = "pow"
    z_param: float = EXP_MINUS_GAMMA
    clamp: str = "count"
    start: int = 300
    name: str = "desk"

    def __post_init__(self):
        if self.t_kind not in ("paper", "exp_pow", "fixed"):
            raise ProfileInvalid(f"unknown t kind {self.t_kind!r}")
        if self.z_kind not in ("paper", "pow", "fixed"):
            raise ProfileInvalid(f"unknown z kind {self.z_kind!r}")
        if self.t_kind == "exp_pow" and not 0 < self.t_param <= 1:
            raise ProfileInvalid("exp_pow exponent must lie in (0, 1]")
        if self.z_kind == "pow" and not 0 < self.z_param <= 1:
            raise ProfileInvalid("pow exponent must lie in (0, 1]")
        if self.t_kind == "fixed" and self.t_param < 1:
            raise ProfileInvalid("fixed t must be >= 1")
        if self.z_kind == "fixed" and self.z_param < 1:
            raise ProfileInvalid("fixed z must be >= 1")
        if self.clamp not in ("count", "raise"):
            raise ProfileInvalid(f"unknown clamp policy {self.clamp!r}")

    @classmethod
    def desk(cls) -> "ThresholdProfile":
        return cls()

    @classmethod
    def paper(cls) -> "ThresholdProfile":
        return cls("paper", 0.0, "paper", EXP_MINUS_GAMMA, "count", 3, "paper")

    @classmethod
    def fixed(cls, t0: float, z0: float) -> "ThresholdProfile":
        """Constant thresholds: sieving primes are exactly those in (t0, z0]."""
        return cls("fixed", float(t0), "fixed", float(z0), "count", 1, "fixed")

    def t(self, n) -> float:
        if self.t_kind == "fixed":
            return self.t_param
        L = math.log(n)
        if self.t_kind == "exp_pow":
            return math.exp(L**self.t_param) if L > 0 else 1.0
        if L <= 1.0:
            return 1.0
        return math.exp((L * math.log(L)) ** (2.0 / 3.0))

    def z(self, n) -> float:
        if self.z_kind == "fixed":
            return self.z_param
        beta = EXP_MINUS_GAMMA if self.z_kind == "paper" else self.z_param
        return math.exp(beta * math.log(n))

    @property
    def is_paper(self) -> bool:
        return self.name == "paper"

    def validate(self, lo: int, hi: int) -> list:
        """Check t(n) < z(n) on [max(lo, start), hi]; returns warnings.

        The ``paper`` profile is never rejected: it is documented as infeasible
        at desk scale and only produces a warning.
        """
        if self.is_paper:
            return [
                "paper thresholds: t(n) >= z(n) and Bernoulli probabilities above 1 "
                "are expected at desk scale; probabilities are clamped and counted"
            ]
        a = max(int(lo), int(self.start), 3)
        if a > hi:
            return []
        bad = first_crossing(self, a, int(hi))
        if bad is not None:
            raise ProfileInvalid(f"t(n) >= z(n) at n = {bad}")
        return []

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "t": self.t_kind if self.t_kind == "paper" else {self.t_kind: self.t_param},
            "z": self.z_kind if self.z_kind == "paper" else {self.z_kind: self.z_param},
            "clamp": self.clamp,
            "start": self.start,
        }


def first_crossing(profile: ThresholdProfile, lo: int, hi: int):
    """Some integer n in [lo, hi] with t(n) >= z(n), or None.

    Checks both endpoints and a geometric grid; on each grid cell both
    thresholds are monotone, so t(right) < z(left) certifies the cell.
    """
    grid = sorted({lo, hi, *np.unique(np.geomspace(lo, hi, 2000).astype(np.int64)).tolist()})
    for a, b in zip(grid, grid[1:] + [grid[-1]]):
        if profile.t(a) >= profile.z(a):
            return a
        if profile.t(b) >= profile.z(a):
            for n in range(a, b + 1):
                if profile.t(n) >= profile.z(n):
                    return n
    return None


def error_scale(x: float) -> float:
    """exp(-(log x)^(1/3) (log log x)^(1/6)) for x > e."""
    L = math.log(x)
    return math.exp(-(L ** (1.0 / 3.0)) * math.log(L) ** (1.0 / 6.0))


def thresholds(x: float, profile: ThresholdProfile) -> tuple:
    """(t(x), z(x), error scale at x)."""
    if not x > math.e:
        raise DomainError("thresholds need x > e")
    t, z = profile.t(x), profile.z(x)
    if not profile.is_paper and x >= profile.start and t >= z:
        raise ProfileInvalid(f"t({x}) = {t} >= z({x}) = {z}")
    return t, z, error_scale(x)


# --- singular series -----------------------------------------------------------

@dataclass(frozen=True)
class SingularSeriesEstimate:
    value: float
    cutoff: int
    direct: float
    mertens: float
    spread: float


def check_admissible(tup: PolyTuple) -> None:
    """Raise Inadmissible(p) if some prime kills every residue class.

    For a primitive f, f mod p is a nonzero polynomial of degree <= deg f,
    so only primes up to sum(deg f_j) and primes dividing some content can
    have nu_p = p.
    """
    bound = sum(tup.degrees)
    candidates = {int(p) for p in primes(bound)} if bound >= 2 else set()
    for f in tup.polys:
        candidates |= prime_factors(f.content)
    for p in sorted(candidates):
        if nu_p(tup, p) == p:
            raise Inadmissible(p)


def prime_factors(n: int) -> set:
    n = abs(int(n))
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def is_admissible(tup: PolyTuple) -> bool:
    try:
        check_admissible(tup)
    except Inadmissible:
        return False
    return True


def singular_series(tup: PolyTuple, cutoff: int, precision: str = "double", cache=None) -> SingularSeriesEstimate:
    """Truncated product for the singular series with two estimators.

    direct  = prod_{p<=P} (1 - nu_p/p)(1 - 1/p)^-k
    mertens = e^(gamma k) (log P)^k prod_{p<=P} (1 - nu_p/p)
    """
    check_admissible(tup)
    P = int(cutoff)
    if P < 2:
        raise ValueError("cutoff must be >= 2")
    ps = primes(P)
    _, nu = local_table(tup, ps, cache)
    if np.any(nu >= ps):
        raise Inadmissible(int(ps[np.argmax(nu >= ps)]))
    k = tup.k
    if precision == "extended":
        with mpmath.workdps(50):
            local = mpmath.fsum(mpmath.log(1 - mpmath.mpf(int(n)) / int(p)) for p, n in zip(ps, nu))
            base = mpmath.fsum(mpmath.log(1 - mpmath.mpf(1) / int(p)) for p in ps)
            direct = mpmath.exp(local - k * base)
            mertens = mpmath.exp(k * mpmath.euler + k * mpmath.log(mpmath.log(P)) + local)
            direct, mertens = float(direct), float(mertens)
    else:
        pf = ps.astype(np.float64)
        local_terms = np.log1p(-nu / pf)
        direct_log = math.fsum(local_terms - k * np.log1p(-1.0 / pf))
        direct = math.exp(direct_log)
        mertens = math.exp(k * EULER_GAMMA + k * math.log(math.log(P)) + math.fsum(local_terms))
    return SingularSeriesEstimate(mertens, P, direct, mertens, abs(direct - mertens))


# --- main term -------------------------------------------------------------------

def _integrand(tup: PolyTuple):
    coeffs = [tuple(float(c) for c in f.coeffs[::-1]) for f in tup.polys]

    def g(u):
        out = 1.0
        for cs in coeffs:
            v = 0.0
            for c in cs:
                v = v * u + c
            out *= math.log(v)
        return 1.0 / out

    return g


def _check_domain(tup: PolyTuple, a: float, b: float) -> None:
    pts = [a, b]
    if any(c < 0 for f in tup.polys for c in f.coeffs):
        pts += list(np.linspace(a, b, 1001))
    for u in pts:
        for f in tup.polys:
            v = sum(float(c) * u**i for i, c in enumerate(f.coeffs))
            if v <= 1.0:
                raise DomainError(f"{f} takes value {v} <= 1 at u = {u}")


def log_integral(tup: PolyTuple, a: float, b: float, precision: str = "double") -> float:
    """Integral of du / prod_j log f_j(u) over [a, b]."""
    if b <= a:
        return 0.0
    _check_domain(tup, a, b)
    if precision == "extended":
        polys = [f.coeffs for f in tup.polys]
        with mpmath.workdps(50):
            def g(u):
                out = mpmath.mpf(1)
                for cs in polys:
                    out *= mpmath.log(mpmath.polyval(list(cs[::-1]), u))
                return 1 / out
            pts = [a] + [x for x in np.geomspace(max(a, 2.0), b, 24)[1:-1] if a < x < b] + [b]
            return float(mpmath.quad(g, pts))
    # bisect the range geometrically so each piece is well resolved
    pts = np.unique(np.concatenate([[a, b], np.geomspace(a, b, 2 + int(math.log2(b / a)))]))
    g = _integrand(tup)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(g, lo, hi, epsabs=1e-15, epsrel=1e-10, limit=200)
        total += val
    return total


def main_term(tup: PolyTuple, S: float, x: float, y: float | None = None, precision: str = "double") -> float:
    """M(x) = S * int_2^x du / prod log f_j(u); with y, M(x + y) - M(x)."""
    if x < 2:
        raise DomainError("x must be >= 2")
    if y is None:
        return S * log_integral(tup, 2.0, float(x), precision)
    if y <= 0:
        raise DomainError("y must be positive")
    return S * log_integral(tup, float(x), float(x) + float(y), precision)


# --- convergence diagnostics ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    x: int
    estimate: float
    difference: float


def series_convergence(f, checkpoints) -> list:
    """e^gamma log x prod_{p<=x}(1 - rho_p/p) at each checkpoint.

    The values approach the singular series of f; ``difference`` is the
    change from the previous checkpoint (nan for the first).
    """
    from .localroots import rho_table

    xs = sorted(int(x) for x in checkpoints)
    ps = primes(xs[-1])
    rho = rho_table(f, ps)
    logs = np.cumsum(np.log1p(-rho / ps.astype(np.float64)))
    rows, prev = [], math.nan
    for x in xs:
        i = int(np.searchsorted(ps, x, side="right"))
        val = math.exp(EULER_GAMMA + float(logs[i - 1])) * math.log(x)
        rows.append(ConvergenceRow(x, val, val - prev))
        prev = val
    return rows
