"""Hit counts, exact expectations and Monte Carlo experiments for tuples.

For a tuple (f_1, ..., f_k) and a random set, X_n is the indicator that
every f_j(n) lies in the set.  For the sieve models X_n = D_n * R_n where
D_n (no small prime factor) is seed-invariant and R_n carries the random
residue conditions.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rng
from .errors import DomainError, RangeTooLarge
from .localroots import roots_mod_p
from .models import BERNOULLI_KINDS, DEFAULT_BUDGET, ModelSpec, SetInstance, _first_at_least
from .polyarith import PolyTuple
from .sieve import clear_classes, has_small_factor, prime_bitmap, primes
from .singular import ThresholdProfile, main_term, singular_series

ORACLE = "oracle"
DEFAULT_CUTOFF = 10**6


# --- tuple values -------------------------------------------------------------------

def tuple_values(tup: PolyTuple, ns: np.ndarray) -> list:
    """[f_j(ns) for each j]; int64 arrays when every value fits, else object arrays."""
    ns = np.asarray(ns, dtype=np.int64)
    if len(ns) == 0:
        return [np.zeros(0, dtype=np.int64) for _ in tup.polys]
    top = int(ns.max())
    if all(f(top) < 1 << 62 for f in tup.polys):
        out = []
        for f in tup.polys:
            acc = np.zeros(len(ns), dtype=np.int64)
            for c in reversed(f.coeffs):
                acc = acc * ns + c
            out.append(acc)
        return out
    return [np.array([f(int(n)) for n in ns], dtype=object) for f in tup.polys]


def _membership_bitmap(source, lo: int, hi: int, threads: int, budget: int) -> np.ndarray:
    if hi - lo + 1 > budget:
        raise RangeTooLarge(f"membership needed up to {hi}, beyond the budget of {budget} integers")
    if source == ORACLE or source is None:
        return prime_bitmap(lo, hi)
    return source.materialize(lo, hi, threads)


def _indicators(source, tup: PolyTuple, ns: np.ndarray, threads: int = 1, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """X_n for each n in ns (ascending)."""
    vals = tuple_values(tup, ns)
    if len(ns) == 0:
        return np.zeros(0, dtype=bool)
    lo = max(1, int(min(int(v.min()) for v in vals)))
    hi = int(max(int(v.max()) for v in vals))
    bits = _membership_bitmap(source, lo, hi, threads, budget)
    out = np.ones(len(ns), dtype=bool)
    for v in vals:
        v = v.astype(np.int64)
        ok = v >= lo
        out &= ok
        out[ok] &= bits[v[ok] - lo]
    return out


def count_hits(source, tup: PolyTuple, x: int, threads: int = 1, budget: int = DEFAULT_BUDGET) -> int:
    """Number of 1 <= n <= x with every f_j(n) in the set.

    ``source`` is a :class:`SetInstance` or ``"oracle"`` for the true primes.
    """
    x = int(x)
    if x < 1:
        return 0
    return int(np.count_nonzero(_indicators(source, tup, np.arange(1, x + 1), threads, budget)))


@dataclass(frozen=True)
class HitSeries:
    tuple_hash: str
    spec: dict
    S: float
    rows: tuple  # (x, count, M(x), count - M(x))

    def to_csv(self) -> str:
        lines = ["x,count,M,delta"]
        lines += [f"{x},{c},{m:.6f},{d:.6f}" for x, c, m, d in self.rows]
        return "\n".join(lines) + "\n"


def hit_series(source, tup: PolyTuple, xs, S: float | None = None, cutoff: int = DEFAULT_CUTOFF,
               threads: int = 1, budget: int = DEFAULT_BUDGET) -> HitSeries:
    """Counts at several x from a single membership pass."""
    xs = sorted(int(x) for x in xs)
    if not xs or xs[0] < 2:
        raise DomainError("series points must be >= 2")
    if S is None:
        S = singular_series(tup, cutoff).value
    hits = _indicators(source, tup, np.arange(1, xs[-1] + 1), threads, budget)
    cum = np.cumsum(hits)
    rows = []
    for x in xs:
        c = int(cum[x - 1])
        m = main_term(tup, S, x)
        rows.append((x, c, m, c - m))
    spec = {"kind": ORACLE} if source in (ORACLE, None) else source.spec.to_dict()
    return HitSeries(tup.hash, spec, S, tuple(rows))


# --- deterministic part --------------------------------------------------------------

def deterministic_part(tup: PolyTuple, n: int, profile: ThresholdProfile) -> int:
    """D_n: 1 iff no f_j(n) has a prime factor <= t(f_j(n))."""
    if n < 1:
        raise DomainError("n must be >= 1")
    for v in tup.values(int(n)):
        if has_small_factor(v, profile.t(v)):
            return 0
    return 1


def deterministic_block(tup: PolyTuple, v: int, w: int, profile: ThresholdProfile) -> np.ndarray:
    """D_n for n in (v, v + w]; entry i stands for n = v + 1 + i.

    Each f_j is sieved by its root classes mod p, for p <= t(f_j(n)).
    """
    lo, hi = int(v) + 1, int(v) + int(w)
    if lo < 1 or w < 1:
        raise DomainError("need v >= 0 and w >= 1")
    out = np.ones(hi - lo + 1, dtype=bool)
    for f in tup.polys:
        t_of = lambda n, f=f: profile.t(f(n))  # noqa: E731  (nondecreasing in n)
        for p in primes(t_of(hi)):
            p = int(p)
            start = _first_at_least(t_of, p, lo, hi)
            if start <= hi:
                clear_classes(out, lo, p, roots_mod_p(f, p), start)
    return out


def in_degenerate_set(tup: PolyTuple, n1: int, n2: int) -> bool:
    """True iff f_i(n1) = f_j(n2) for some i, j."""
    if n1 < 1 or n2 < 1:
        raise DomainError("n1, n2 must be >= 1")
    return bool(set(tup.values(int(n1))) & set(tup.values(int(n2))))


# --- exact expectations -------------------------------------------------------------

def _active_values(values, p: int, profile: ThresholdProfile, sieve_all: bool):
    return [v for v in values if (sieve_all or profile.t(v) < p) and p <= profile.z(v)]


def _sieving_primes(values, profile: ThresholdProfile):
    return primes(max(profile.z(v) for v in values))


def expected_Rn_exact(tup: PolyTuple, n: int, profile: ThresholdProfile, kind: str = "m2") -> Fraction:
    """E R_n as an exact product over sieving primes of (1 - c_p/p).

    ``kind="bft_r"`` sieves every p <= z (inner threshold t = 1).
    """
    return expected_pair_exact(tup, n, n, profile, kind)


def expected_pair_exact(tup: PolyTuple, n1: int, n2: int, profile: ThresholdProfile, kind: str = "m2") -> Fraction:
    """E R_{n1} R_{n2}: product of (1 - psi_p/p), psi_p the number of distinct
    residues f_j(n_i) mod p over the active index pairs (i, j)."""
    values = sorted(set(tup.values(int(n1)) + tup.values(int(n2))))
    sieve_all = kind == "bft_r"
    out = Fraction(1)
    for p in _sieving_primes(values, profile):
        p = int(p)
        psi = len({v % p for v in _active_values(values, p, profile, sieve_all)})
        if psi:
            out *= Fraction(p - psi, p)
    return out


def brute_force_pair(tup: PolyTuple, n1: int, n2: int, profile: ThresholdProfile, kind: str = "m2") -> Fraction:
    """E R_{n1} R_{n2} by enumerating every residue assignment (a_p) over the sieving primes."""
    values = sorted(set(tup.values(int(n1)) + tup.values(int(n2))))
    sieve_all = kind == "bft_r"
    # only primes that can remove some value carry a random class
    ps = [int(p) for p in _sieving_primes(values, profile) if _active_values(values, int(p), profile, sieve_all)]
    # for each value, the primes whose class a_p may remove it
    exposure = [[i for i, p in enumerate(ps) if (sieve_all or profile.t(v) < p) and p <= profile.z(v)] for v in values]
    good = total = 0
    for a in itertools.product(*(range(p) for p in ps)):
        total += 1
        if all(v % ps[i] != a[i] for v, idx in zip(values, exposure) for i in idx):
            good += 1
    return Fraction(good, total)


def expected_Rn_many(tup: PolyTuple, ns, profile: ThresholdProfile, kind: str = "m2") -> np.ndarray:
    """Floating-point E R_n over an array of n (int64 values only)."""
    ns = np.asarray(ns, dtype=np.int64)
    vals = tuple_values(tup, ns)
    if any(v.dtype == object for v in vals):
        return np.array([float(expected_Rn_exact(tup, int(n), profile, kind)) for n in ns])
    ts = [np.zeros(len(ns)) if kind == "bft_r" else np.array([profile.t(x) for x in v.tolist()]) for v in vals]
    zs = [np.array([profile.z(x) for x in v.tolist()]) for v in vals]
    log_r = np.zeros(len(ns))
    top = max(float(z.max()) for z in zs) if len(ns) else 0.0
    for p in primes(top):
        p = int(p)
        active = [(t < p) & (p <= z) for t, z in zip(ts, zs)]
        res = [v % p for v in vals]
        c = np.zeros(len(ns))
        for j in range(len(vals)):
            fresh = active[j].copy()
            for i in range(j):
                fresh &= ~(active[i] & (res[i] == res[j]))
            c += fresh
        log_r += np.log1p(-c / p)
    return np.exp(log_r)


# --- Monte Carlo -----------------------------------------------------------------------

def trial_seed(master: int, i: int) -> int:
    """Seed of trial i; adding trials extends the list without reshuffling it."""
    return rng.splitmix64((master ^ i) & rng.MASK64)


@dataclass(frozen=True)
class TrialSummary:
    spec: dict
    tuple: list
    x: int
    y: int
    trials: int
    counts: tuple
    mean: float
    variance: float
    exact_mean: float | None
    M: float
    var_over_M2: float
    clamp_count: int
    seeds_hash: str
    extra: dict = field(default_factory=dict)

    @property
    def z_score(self) -> float | None:
        if self.exact_mean is None or self.variance == 0:
            return None
        return (self.mean - self.exact_mean) / math.sqrt(self.variance / self.trials)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "tuple": self.tuple,
            "x": self.x,
            "y": self.y,
            "trials": self.trials,
            "mean": self.mean,
            "exact_mean": self.exact_mean,
            "variance": self.variance,
            "M": self.M,
            "var_over_M2": self.var_over_M2,
            "clamp_count": self.clamp_count,
            "seeds_hash": self.seeds_hash,
            "counts": list(self.counts),
        }


def monte_carlo(spec: ModelSpec, tup: PolyTuple, x: int, y: int, trials: int, threads: int = 1,
                S: float | None = None, cutoff: int = DEFAULT_CUTOFF, budget: int = DEFAULT_BUDGET) -> TrialSummary:
    """Counts of sum_{x < n <= x + y} X_n over ``trials`` independent seeds.

    Trial i uses seed ``splitmix64(spec.seed ^ i)``.
    """
    x, y, trials = int(x), int(y), int(trials)
    if not (y * y > x and y <= x):
        raise DomainError("need sqrt(x) < y <= x")
    if trials < 2:
        raise DomainError("need at least two trials")
    ns = np.arange(x + 1, x + y + 1, dtype=np.int64)
    vals = tuple_values(tup, ns)
    seeds = [trial_seed(spec.seed, i) for i in range(trials)]
    base = SetInstance(spec, budget)

    if spec.kind in BERNOULLI_KINDS:
        # D-part and probabilities do not depend on the seed: compute them once
        qs = [base.probabilities(v) for v in vals]
        live = np.ones(len(ns), dtype=bool)
        for q in qs:
            live &= q > 0
        idx = np.flatnonzero(live)
        lv = [v[idx] for v in vals]
        lq = [q[idx] for q in qs]
        exact = float(math.fsum(np.prod(np.stack(lq), axis=0).tolist())) if len(idx) else 0.0

        def run(seed):
            hit = np.ones(len(idx), dtype=bool)
            for v, q in zip(lv, lq):
                hit &= rng.bernoulli_many(seed, "bern", v, q)
            return int(np.count_nonzero(hit))

        clamp = base.clamp_count
    else:
        lo = max(1, int(min(int(v.min()) for v in vals)))
        hi = int(max(int(v.max()) for v in vals))
        if hi - lo + 1 > budget:
            raise RangeTooLarge(f"membership needed up to {hi}, beyond the budget of {budget} integers")
        if spec.kind == "m2":
            D = deterministic_block(tup, x, y, spec.profile)
            ER = expected_Rn_many(tup, ns[D], spec.profile, "m2")
        else:
            ER = expected_Rn_many(tup, ns, spec.profile, "bft_r")
        exact = float(math.fsum(ER.tolist()))

        def run(seed):
            bits = SetInstance(spec.with_seed(seed), budget).materialize(lo, hi)
            hit = np.ones(len(ns), dtype=bool)
            for v in vals:
                hit &= bits[v.astype(np.int64) - lo]
            return int(np.count_nonzero(hit))

        clamp = 0

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(run, seeds))
    else:
        counts = [run(s) for s in seeds]

    arr = np.array(counts, dtype=np.float64)
    mean = math.fsum(counts) / trials
    variance = math.fsum((arr - mean) ** 2) / (trials - 1)
    if S is None:
        S = singular_series(tup, cutoff).value
    M = main_term(tup, S, x, y)
    seeds_hash = hashlib.sha256(",".join(map(str, seeds)).encode()).hexdigest()[:16]
    return TrialSummary(spec.to_dict(), tup.to_lists(), x, y, trials, tuple(counts), mean, variance,
                        exact, M, variance / M**2, clamp, seeds_hash)


def factorization_check(spec: ModelSpec, tup: PolyTuple, lo: int, hi: int) -> int:
    """Number of n in [lo, hi] where X_n differs from D_n * [residue conditions].

    Membership comes from the bulk path; D_n and the residue conditions are
    evaluated pointwise and independently.
    """
    if spec.kind != "m2":
        raise DomainError("factorization check applies to m2")
    inst = SetInstance(spec)
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    X = _indicators(inst, tup, ns)
    bad = 0
    for n, xn in zip(ns.tolist(), X.tolist()):
        d = deterministic_part(tup, n, spec.profile)
        r = 1
        for v in tup.values(n):
            if v < inst.spec.n_min:
                r = 0
                break
            t, z = spec.profile.t(v), spec.profile.z(v)
            if any(v % int(p) == inst.residue(int(p)) for p in primes(z) if p > t):
                r = 0
                break
        bad += int(xn) != d * r
    return bad


# --- block sequence ---------------------------------------------------------------------

@dataclass(frozen=True)
class BlockSequence:
    K0: float
    points: tuple  # (x_m, delta_m)

    def count_in(self, X: float) -> int:
        """Number of x_m in (X, 2X]."""
        xs = np.array([p[0] for p in self.points])
        return int(np.count_nonzero((xs > X) & (xs <= 2 * X)))

    def dyadic_counts(self) -> list:
        """(X, count) for X = K0 * 2^i covering the sequence."""
        out = []
        X = self.K0
        top = self.points[-1][0]
        while X < top:
            out.append((X, self.count_in(X)))
            X *= 2
        return out


def block_delta(x: float) -> float:
    return x * math.exp(-(math.log(x) ** (1.0 / 3.0)))


def block_sequence(K0: float = 100, x_max: float = 1e6) -> BlockSequence:
    """x_0 = K0, x_{m+1} = x_m + delta_m with delta_m = x_m exp(-(log x_m)^(1/3))."""
    if K0 < 10 or x_max <= K0:
        raise DomainError("need K0 >= 10 and x_max > K0")
    pts = []
    x = float(K0)
    while x <= x_max:
        d = block_delta(x)
        pts.append((x, d))
        x += d
    return BlockSequence(float(K0), tuple(pts))


def block_deviations(source, tup: PolyTuple, seq: BlockSequence, S: float, threads: int = 1) -> list:
    """(x_m, delta_m, count over (x_m, x_m + delta_m], M(x_m, delta_m)) per block."""
    top = int(seq.points[-1][0] + seq.points[-1][1])
    hits = _indicators(source, tup, np.arange(1, top + 1), threads)
    cum = np.concatenate([[0], np.cumsum(hits)])
    out = []
    for xm, dm in seq.points:
        a, b = int(xm), int(xm + dm)
        out.append((xm, dm, int(cum[b] - cum[a]), main_term(tup, S, xm, dm)))
    return out
