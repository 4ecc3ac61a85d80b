import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bhlab.errors import NotPrime
from bhlab.localroots import (
    LocalDataCache,
    disjointness_violations,
    local_data,
    local_table,
    nu_p,
    rho_p,
    roots_mod_p,
)
from bhlab.polyarith import Polynomial
from bhlab.sieve import primes

from conftest import tup

SMALL_PRIMES = [int(p) for p in primes(200)]


def brute_roots(coeffs, p):
    f = Polynomial(coeffs)
    return {n for n in range(p) if f(n) % p == 0}


def test_examples():
    assert rho_p("X^2+1", 5) == 2
    assert rho_p("X^2+1", 3) == 0
    assert rho_p("X^2+1", 2) == 1
    assert nu_p(tup("X,X+2"), 2) == 1
    assert nu_p(tup("X,X+2"), 3) == 2
    assert roots_mod_p("X^2+1", 13) == {5, 8}


def test_not_prime():
    with pytest.raises(NotPrime):
        rho_p("X", 9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-100, 100), min_size=2, max_size=5).filter(lambda c: c[-1] != 0),
       st.sampled_from(SMALL_PRIMES))
def test_rho_matches_brute_force(c, p):
    expected = brute_roots(c, p)
    assert rho_p(c, p) == len(expected)
    assert roots_mod_p(c, p) == expected


def test_roots_large_prime_use_splitting():
    # p above the exhaustive limit: roots must still be exact
    p = 10009
    f = Polynomial([-1, 0, 0, 0, 1])  # X^4 - 1, p = 1 mod 4 gives four roots
    roots = roots_mod_p(f, p)
    assert len(roots) == 4
    assert all(f(r) % p == 0 for r in roots)
    assert roots_mod_p(f, p) == roots  # fixed internal seed


def test_batch_table_matches_point_queries():
    t = tup("X^2+1,X^2+X+1")
    ps = primes(3000)
    rho, nu = local_table(t, ps)
    for i in range(0, len(ps), 37):
        p = int(ps[i])
        d = local_data(t, p)
        assert tuple(rho[i]) == d.rho and nu[i] == d.nu


def test_linear_fast_path_matches_gcd_route():
    t = tup("X,X+2,X+6,3X+1")
    ps = primes(5000)
    rho, nu = local_table(t, ps)
    from bhlab.localroots import nu_table, rho_table

    assert np.array_equal(nu, nu_table(t, ps))
    assert np.array_equal(rho[:, 3], rho_table(t.polys[3], ps))


def test_disjointness_violations():
    # X and X+2 share a root only mod 2
    assert disjointness_violations(tup("X,X+2"), 100) == [2]


def test_cache_round_trip(tmp_path):
    t = tup("X,X+2")
    cache = LocalDataCache(tmp_path)
    ps = primes(1000)
    rho, nu = local_table(t, ps, cache)
    assert cache.path(t).exists()
    assert cache.path(t).read_text().startswith(f"# bh-lab localdata v1 {t.hash} k=2")
    hit = cache.lookup(t, ps[:50])
    assert hit is not None and np.array_equal(hit[1], nu[:50])
    assert cache.lookup(t, primes(2000)) is None
    cache.clear()
    assert not cache.path(t).exists()


def test_monic_linear_path_matches_gcd_route():
    from bhlab.localroots import nu_table

    t = tup("X,X+2,X+6,X+8,X+30")
    ps = primes(20000)
    rho, nu = local_table(t, ps)
    assert np.array_equal(nu, nu_table(t, ps))
    assert (rho == 1).all()
