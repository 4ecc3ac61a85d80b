import math
from fractions import Fraction

import mpmath
import pytest

from bhlab.errors import DomainError, Inadmissible, ProfileInvalid
from bhlab.singular import (
    EULER_GAMMA,
    ThresholdProfile,
    check_admissible,
    error_scale,
    series_convergence,
    log_integral,
    main_term,
    singular_series,
    theta,
    theta_exact,
    thresholds,
    v_H,
)

from conftest import tup

TWIN_CONSTANT = 1.3203236316937391  # 2 * prod_{p>2} (1 - 1/(p-1)^2)


def test_theta():
    assert theta_exact(10) == Fraction(8, 35)
    assert theta(10) == pytest.approx(8 / 35, rel=1e-15)
    assert theta(1.5) == 1.0
    # Mertens: theta(z) log z -> e^-gamma
    assert theta(10**6) * math.log(10**6) == pytest.approx(math.exp(-EULER_GAMMA), rel=1e-2)


def test_v_H():
    assert v_H([0, 2], 3, exact=True) == Fraction(1, 6)
    assert v_H([0], 10, exact=True) == theta_exact(10)


def test_profiles():
    d = ThresholdProfile.desk()
    assert d.t(10**6) == pytest.approx(math.exp(math.log(10**6) ** (2 / 3)))
    assert d.z(10**6) == pytest.approx(2337.528, abs=1e-3)
    p = ThresholdProfile.paper()
    assert p.t(math.exp(math.e)) == pytest.approx(7.012779, abs=1e-6)
    f = ThresholdProfile.fixed(2, 5)
    assert f.t(10**9) == 2 and f.z(3) == 5
    d.validate(300, 10**6)
    with pytest.raises(ProfileInvalid):
        ThresholdProfile.desk().__class__(start=3).validate(3, 100)
    assert ThresholdProfile.paper().validate(1000, 10**4)  # warning only


def test_thresholds_and_error_scale():
    t, z, e = thresholds(math.exp(math.e), ThresholdProfile.paper())
    assert t == pytest.approx(7.012779, abs=1e-6)
    assert e == pytest.approx(0.247681, abs=1e-6)
    assert error_scale(math.exp(math.e)) == e
    with pytest.raises(DomainError):
        thresholds(2.0, ThresholdProfile.desk())


def test_admissibility():
    check_admissible(tup("X,X+2,X+6"))
    with pytest.raises(Inadmissible) as exc:
        check_admissible(tup("X,X+1"))
    assert exc.value.p == 2
    with pytest.raises(Inadmissible) as exc:
        check_admissible(tup("X,X+2,X+4"))
    assert exc.value.p == 3
    with pytest.raises(Inadmissible):
        check_admissible(tup("X^2+X+2"))  # always even


def test_single_prime_series_is_one():
    for P in (10**3, 10**4, 10**5):
        assert abs(singular_series(tup("X"), P).direct - 1.0) < 1e-12


def test_twin_series():
    est = singular_series(tup("X,X+2"), 10**6)
    assert est.direct == pytest.approx(TWIN_CONSTANT, abs=1e-6)
    assert est.spread == abs(est.direct - est.mertens)
    ext = singular_series(tup("X,X+2"), 10**4, precision="extended")
    dbl = singular_series(tup("X,X+2"), 10**4)
    assert ext.direct == pytest.approx(dbl.direct, rel=1e-12)


def test_spread_nonincreasing():
    spreads = [singular_series(tup("X^2+1"), P).spread for P in (10**3, 10**4, 10**5, 10**6)]
    assert all(a >= b for a, b in zip(spreads, spreads[1:]))


def test_main_term_single_is_li():
    expected = float(mpmath.li(100) - mpmath.li(2))
    assert main_term(tup("X"), 1.0, 100) == pytest.approx(expected, rel=1e-10)
    assert log_integral(tup("X"), 2, 100, precision="extended") == pytest.approx(expected, rel=1e-12)


def test_main_term_window():
    t = tup("X,X+2")
    a = main_term(t, 1.3, 10**5, 10**5)
    assert a == pytest.approx(main_term(t, 1.3, 2 * 10**5) - main_term(t, 1.3, 10**5), rel=1e-9)
    with pytest.raises(DomainError):
        main_term(t, 1.0, 1)


def test_series_convergence():
    rows = series_convergence("X^2+1", [10**4, 10**6])
    assert abs(rows[-1].estimate - 1.3728134628) < 1e-2
    assert math.isnan(rows[0].difference)
    assert abs(rows[-1].difference) < 1e-2
