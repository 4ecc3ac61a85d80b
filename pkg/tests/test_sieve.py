import numpy as np
import pytest
from fractions import Fraction

from bhlab.errors import DomainError
from bhlab.sieve import (
    PrimeTable,
    ResidueFamily,
    count_avoiding,
    has_small_factor,
    is_prime,
    sifted_count_report,
    prime_bitmap,
    primes,
    primes_up_to,
    segmented_primes,
    sieve_avoid,
    simple_sieve,
    small_factor_mask,
)


def test_prime_counts():
    assert len(simple_sieve(100)) == 25
    assert len(segmented_primes(10**6, segment=1 << 12)) == 78498
    assert np.array_equal(segmented_primes(10**5, segment=1000), simple_sieve(10**5))


def test_shared_table_grows():
    assert primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(primes(2 * 10**6)) == 148933


def test_prime_table_cache(tmp_path):
    path = tmp_path / "p.txt"
    t = primes_up_to(1000, path)
    assert path.read_text().splitlines()[0] == "# primes<=1000 v1"
    again = PrimeTable.load(path)
    assert again.bound == 1000 and np.array_equal(again.primes, t.primes)
    assert len(primes_up_to(100, path)) == 25


def test_is_prime_against_sieve():
    ps = set(simple_sieve(20000).tolist())
    assert all(is_prime(n) == (n in ps) for n in range(20000))
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)


def test_prime_bitmap_window():
    bits = prime_bitmap(10**6, 10**6 + 1000)
    assert bits.sum() == len([n for n in range(10**6, 10**6 + 1001) if is_prime(n)])


def test_residue_family_validation():
    with pytest.raises(ValueError):
        ResidueFamily.from_dict(20, {3: [0, 1, 2]})
    with pytest.raises(ValueError):
        ResidueFamily.from_dict(20, {23: [0]})
    fam = ResidueFamily.from_dict(20, {3: [1], 5: [0, 2]})
    assert fam.density() == Fraction(2, 3) * Fraction(3, 5)


def test_sieve_avoid_brute_force():
    fam = ResidueFamily.from_dict(20, {2: [1], 7: [3, 4], 11: [0]})
    bits = sieve_avoid(fam, 100, 500)
    expected = [all(n % p not in rs for p, rs in fam.classes) for n in range(101, 601)]
    assert bits.tolist() == expected
    assert count_avoiding(fam, 100, 500) == sum(expected)


def test_threads_do_not_change_result():
    fam = ResidueFamily.random(50, 3, np.random.default_rng(1))
    assert count_avoiding(fam, 0, 3 * 10**6, threads=1) == count_avoiding(fam, 0, 3 * 10**6, threads=4)


def test_periodic_window_is_exact():
    rep = sifted_count_report(ResidueFamily.zero_classes(10), 0, 210)
    assert rep.count == 48 and rep.ratio == 1.0
    assert rep.predicted_exact == 48


def test_has_small_factor():
    assert has_small_factor(91, 7)
    assert not has_small_factor(91, 6)
    assert has_small_factor(7, 7)
    assert not has_small_factor(1, 100)
    with pytest.raises(DomainError):
        has_small_factor(0, 10)


def test_small_factor_mask_matches_point():
    mask = small_factor_mask(2, 5000, 30)
    assert mask.tolist() == [has_small_factor(m, 30) for m in range(2, 5001)]
