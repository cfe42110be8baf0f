from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galcohom.localarith import (CURVE_F, REAL, LocalSolubilityError, Place, algebra_entry, conic_solvable,
                                 creutz_sum, discriminant, find_local_point, hilbert_symbol, invariant_sum,
                                 is_prime, local_invariant, poly_eval, prime_factors, sqrt_unit, vp)

nonzero = st.integers(-2000, 2000).filter(lambda n: n != 0)


def test_is_prime_against_trial_division():
    def slow(n):
        return n > 1 and all(n % d for d in range(2, int(n ** 0.5) + 1))
    assert all(is_prime(n) == slow(n) for n in range(2000))
    assert is_prime(2 ** 61 - 1) and not is_prime(2 ** 61 + 1)


def test_place_parsing():
    assert Place.parse("inf") == REAL and REAL.is_real
    assert Place.parse("17") == Place(17)
    with pytest.raises(ValueError):
        Place.parse("15")


def test_minus_one_minus_one():
    assert hilbert_symbol(-1, -1, REAL) == -1
    assert hilbert_symbol(-1, -1, Place(2)) == -1
    assert all(hilbert_symbol(-1, -1, Place(p)) == 1 for p in (3, 5, 7, 11))
    assert local_invariant(-1, -1, Place(2)) == Fraction(1, 2)


def test_two_five_at_five():
    # 2 is not a square mod 5, so (2, 5)_5 = -1
    assert hilbert_symbol(2, 5, Place(5)) == -1
    assert not conic_solvable(2, 5, Place(5))


@settings(max_examples=300, deadline=None)
@given(nonzero, nonzero)
def test_product_formula(a, b):
    # zero in Q/Z: an even number of places carry 1/2
    assert invariant_sum(a, b).denominator == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(-40, 40).filter(bool), st.integers(-40, 40).filter(bool),
       st.sampled_from([0, 2, 3, 5, 7]))
def test_symbol_matches_conic(a, b, p):
    v = Place(p)
    assert (hilbert_symbol(a, b, v) == 1) == conic_solvable(a, b, v)


def test_symbol_accepts_fractions():
    assert hilbert_symbol(Fraction(-1, 4), -1, REAL) == -1
    assert hilbert_symbol(Fraction(3, 25), 5, Place(5)) == hilbert_symbol(3, 5, Place(5))


def test_sqrt_unit():
    y = sqrt_unit(17, 2, 10)
    assert (y * y - 17) % 2 ** 10 == 0
    assert sqrt_unit(3, 2, 5) is None
    y = sqrt_unit(2, 7, 4)
    assert (y * y - 2) % 7 ** 4 == 0
    assert sqrt_unit(3, 7, 4) is None


def test_curve_polynomial_discriminant():
    assert CURVE_F == (-289, 0, -289, 0, 1, 0, 1)
    assert sorted(prime_factors(discriminant(list(CURVE_F)))) == [2, 3, 17]


def test_real_point():
    r = find_local_point(3, CURVE_F, REAL)
    assert r.status == "found"
    pt = r.points[0]
    assert pt.check() and 3 * poly_eval(CURVE_F, pt.x) > 0


def test_point_at_seven():
    # 3 f(1) = -1728 = 1 mod 7, a square unit
    assert (3 * poly_eval(CURVE_F, 1)) % 7 == 1
    r = find_local_point(3, CURVE_F, Place(7), want=2)
    assert r.status == "found"
    assert all(pt.check() for pt in r.points)
    assert any(pt.x == 1 for pt in r.points)


def test_points_at_three_keep_entry_a_unit():
    r = find_local_point(3, CURVE_F, Place(3), want=3)
    assert r.status == "found"
    for pt in r.points:
        assert pt.check()
        assert pt.x % 3 in (1, 2)
        assert vp(algebra_entry(pt), 3) == 0


def test_insoluble_curve_reports_none():
    # 3(x^2 + 1) has odd 3-adic valuation for every x, since -1 is not a square mod 3
    assert find_local_point(3, [1, 0, 1], Place(3)).status == "none"
    assert find_local_point(-1, [1, 0, 1], REAL).status != "found"


def test_creutz_sum_is_one_half():
    rep = creutz_sum()
    assert rep.total == Fraction(1, 2)
    assert rep.rerun_total == rep.total
    assert rep.bad_primes == [2, 3, 17]
    assert not rep.notes
    by_place = {row["place"]: row["invariant"] for row in rep.per_place}
    assert by_place == {"inf": "0", "2": "1/2", "3": "0", "17": "0"}


def test_trivial_algebra_sums_to_zero():
    assert creutz_sum(l_sign=1).total == 0


@pytest.mark.parametrize("c,total", [(5, Fraction(0)), (7, Fraction(1, 2))])
def test_creutz_other_twists(c, total):
    assert creutz_sum(c).total == total


def test_creutz_requires_bad_primes():
    with pytest.raises(ValueError):
        creutz_sum(places=[REAL, Place(2), Place(3)])


def test_creutz_raises_without_local_points():
    with pytest.raises(LocalSolubilityError):
        creutz_sum(c=3, f=(1, 0, 1))
