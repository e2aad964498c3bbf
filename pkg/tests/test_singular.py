import math

import pytest
from hypothesis import given, settings, strategies as st

from hlav.correlation import TupleSpec
from hlav.errors import InvalidTupleError, NotPrimeError, PreconditionError, UnsupportedOrderError
from hlav.singular import (
    gallagher_average,
    ktuple_gallagher_average,
    nu,
    pair_constant,
    tuple_constant,
    twin_half_constant,
    weighted_singular_average,
)

from conftest import trial_division_is_prime

TWIN_HALF_REFERENCE = 0.6601618158468696  # classical twin prime constant


def oracle_euler_product(shifts, P):
    """Plain product over primes <= P with nu counted by listing residues."""
    K = len(shifts) + 1
    prod = 1.0
    for p in range(2, P + 1):
        if trial_division_is_prime(p):
            v = len({0, *(s % p for s in shifts)})
            prod *= (1 - v / p) * (1 - 1 / p) ** (-K)
    return prod


def test_twin_half_single_factor():
    assert twin_half_constant(3).value == pytest.approx(0.75, rel=1e-15)


def test_twin_half_at_1e6_within_tail():
    sv = twin_half_constant(10**6)
    assert abs(sv.value - TWIN_HALF_REFERENCE) <= sv.tail_bound
    assert sv.value == pytest.approx(0.660161816, abs=1e-7)


def test_twin_half_precondition():
    with pytest.raises(PreconditionError):
        twin_half_constant(2)


def test_pair_constant_examples():
    c2 = pair_constant(1)
    assert pair_constant(2).value == c2.value
    assert pair_constant(3).value == 2 * c2.value
    assert c2.value == pytest.approx(1.320323632, abs=1e-6)
    assert not c2.exactly_zero


def test_pair_constant_precondition():
    with pytest.raises(PreconditionError):
        pair_constant(7, prime_bound=5)
    with pytest.raises(PreconditionError):
        pair_constant(0)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 15, 30, 105, 210, 1001])
def test_multiplicativity_in_odd_part(k):
    odd_primes = [p for p in range(3, k + 1) if k % p == 0 and trial_division_is_prime(p)]
    factor = math.prod((p - 1) / (p - 2) for p in odd_primes)
    assert pair_constant(k).value == 2.0 * twin_half_constant(10**6).value * factor
    assert pair_constant(k, 10**4).value == pytest.approx(oracle_euler_product((2 * k,), 10**4), rel=1e-11)


def test_nu_examples():
    assert nu(TupleSpec((2, 4)), 3) == 3
    assert nu(TupleSpec((2, 6)), 3) == 2
    assert nu(TupleSpec((2,)), 2) == 1
    with pytest.raises(NotPrimeError):
        nu(TupleSpec((2,)), 9)


def test_tuple_constant_examples():
    zero = tuple_constant((2, 4))
    assert zero.exactly_zero and zero.value == 0 and zero.tail_bound == 0
    single = tuple_constant((2,))
    c2 = pair_constant(1)
    assert abs(single.value - c2.value) <= single.tail_bound + c2.tail_bound
    triple = tuple_constant((2, 6))
    assert triple.value == pytest.approx(2.858, abs=5e-4)
    assert abs(triple.value - tuple_constant((2, 6), 10**7).value) <= triple.tail_bound


def test_tuple_constant_precondition():
    with pytest.raises(PreconditionError):
        tuple_constant((2, 6), prime_bound=2)
    with pytest.raises(PreconditionError):
        tuple_constant((14,), prime_bound=5)  # 7 | 14
    with pytest.raises(InvalidTupleError):
        tuple_constant((6, 2))


@pytest.mark.parametrize("shifts", [(2,), (4,), (2, 6), (4, 6), (6, 12), (2, 8), (4, 10, 12), (2, 6, 8),
                                    (2, 6, 8, 12), (30,), (6, 30)])
def test_matches_direct_euler_product(shifts):
    got = tuple_constant(shifts, 5000).value
    assert got == pytest.approx(oracle_euler_product(shifts, 5000), rel=1e-11)


@pytest.mark.parametrize("shifts", [(2,), (6,), (2, 6), (4, 6), (2, 6, 8), (2, 6, 8, 12), (210,), (6, 12)])
@pytest.mark.parametrize("P", [211, 1000, 10**4])
def test_tail_honesty(shifts, P):
    coarse = tuple_constant(shifts, P)
    fine = tuple_constant(shifts, 10 * P)
    assert abs(coarse.value - fine.value) <= coarse.tail_bound


def test_tail_honesty_near_minimum_bound():
    # P smaller than twice the tuple size uses the looser constant
    for shifts, P in [((2, 6), 3), ((2, 6, 8), 5), ((2,), 3)]:
        coarse = tuple_constant(shifts, P)
        fine = tuple_constant(shifts, 10**6)
        assert abs(coarse.value - fine.value) <= coarse.tail_bound


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 15), min_size=1, max_size=5))
def test_zero_detection_iff_full_coverage(halves):
    shifts = tuple(sorted(2 * h for h in halves))
    K = len(shifts) + 1
    covered = any(
        len({0, *(s % p for s in shifts)}) == p
        for p in range(2, K + 1) if trial_division_is_prime(p)
    )
    sv = tuple_constant(shifts, 1000)
    assert sv.exactly_zero == covered
    assert (sv.value == 0) == covered


def test_gallagher_examples():
    c = [pair_constant(k).value for k in (1, 2, 3)]
    assert gallagher_average(2) == pytest.approx(1.32032, abs=1e-5)
    assert gallagher_average(6) == pytest.approx((2 / 6) * sum(c), rel=1e-15)
    assert gallagher_average(6) == pytest.approx(1.7604, abs=1e-4)
    assert abs(gallagher_average(10**4) - 2) < 0.02


def test_gallagher_precondition():
    with pytest.raises(PreconditionError):
        gallagher_average(1)


def test_weighted_singular_examples():
    c2 = pair_constant(1).value
    assert weighted_singular_average(3) == pytest.approx(c2 / 3, rel=1e-15)
    assert weighted_singular_average(3) == pytest.approx(0.4401, abs=1e-4)
    assert weighted_singular_average(3.9) == weighted_singular_average(3)
    assert weighted_singular_average(1) == 0
    assert abs(weighted_singular_average(10**3) - 1) < 0.02
    with pytest.raises(PreconditionError):
        weighted_singular_average(0.5)


def test_ktuple_gallagher_examples():
    single = tuple_constant((2,))
    assert ktuple_gallagher_average(2, 2) == single.value
    assert ktuple_gallagher_average(2, 1) == gallagher_average(2)
    with pytest.raises(UnsupportedOrderError):
        ktuple_gallagher_average(10, 3)


def test_ktuple_gallagher_trend():
    values = [ktuple_gallagher_average(y, 2, 10**5) for y in (20, 60, 200)]
    assert all(abs(b - 4) < abs(a - 4) for a, b in zip(values, values[1:]))
    assert 3.5 < values[-1] < 4.0


def test_ktuple_gallagher_brute_force():
    y, P = 12, 1000
    terms = [tuple_constant(sorted({2 * a, 2 * b}), P).value for a in range(1, 7) for b in range(1, 7)]
    assert ktuple_gallagher_average(y, 2, P) == pytest.approx(math.fsum(terms) / 36, rel=1e-14)


def test_gallagher_deterministic():
    assert gallagher_average(2000) == gallagher_average(2000)
