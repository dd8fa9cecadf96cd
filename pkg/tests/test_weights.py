import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pottstm.weights import (
    CRTError, Mode, Weight, WeightError, adaptive_crt_run, crt_reconstruct, evaluate,
    format_weight, is_prime, iter_primes, one, parse_bivariate, parse_polynomial,
    prime_schedule, reduce_mod, scale_by_Q, scale_by_v, specialise_v, weight_add,
    weight_mul, weight_neg, zero,
)

U = Weight.univariate
P = 1_000_003

small_poly = st.lists(st.integers(-50, 50), max_size=6)
small_grid = st.lists(small_poly, max_size=4)


def test_trailing_zeros_trimmed():
    assert U([1, 2, 0, 0]).coeffs == (1, 2)
    assert U([0, 0]).coeffs == () and U([]).is_zero()
    assert U([0]).degree == -1
    assert Weight.bivariate([[1], [], [0, 0]]).coeffs == ((1,),)


def test_spec_arithmetic():
    assert weight_mul(U([1, 1]), U([-1, 1])) == U([-1, 0, 1])
    assert weight_add(Weight.modular([5, 3], 7), Weight.modular([4, 4], 7)) == Weight.modular([2], 7)
    # (1 + vQ) * v = v + v^2 Q
    a = Weight.bivariate([[1], [0, 1]])
    v = Weight.bivariate([[], [1]])
    assert weight_mul(a, v) == Weight.bivariate([[], [1], [0, 1]])


def test_scaling():
    assert scale_by_Q(U([3, 0, 1])) == U([0, 3, 0, 1])
    assert scale_by_v(U([2, 1]), -1) == U([-2, -1])
    assert scale_by_v(Weight.bivariate([[0, 1]])) == Weight.bivariate([[], [0, 1]])
    assert scale_by_Q(Weight.scalar(2.0), 3.0).coeffs == 6.0
    with pytest.raises(WeightError):
        scale_by_Q(Weight.scalar(2.0))
    with pytest.raises(WeightError):
        scale_by_v(U([1]))


def test_mode_and_prime_mismatch():
    with pytest.raises(WeightError):
        weight_add(U([1]), Weight.bivariate([[1]]))
    with pytest.raises(WeightError):
        weight_mul(Weight.modular([1], 7), Weight.modular([1], 11))
    with pytest.raises(WeightError):
        Weight(Mode.UNIVARIATE, [1], 7)


def test_modular_residues_in_range():
    w = Weight.modular([-1, 15, 6], 7)
    assert w.coeffs == (6, 1, 6)


@given(small_poly, small_poly, small_poly)
def test_ring_axioms_univariate(a, b, c):
    a, b, c = U(a), U(b), U(c)
    assert weight_add(a, b) == weight_add(b, a)
    assert weight_mul(a, b) == weight_mul(b, a)
    assert weight_mul(weight_mul(a, b), c) == weight_mul(a, weight_mul(b, c))
    assert weight_mul(a, weight_add(b, c)) == weight_add(weight_mul(a, b), weight_mul(a, c))
    assert weight_add(a, weight_neg(a)) == zero(Mode.UNIVARIATE)
    assert weight_mul(a, one(Mode.UNIVARIATE)) == a


@given(small_poly, small_poly, small_poly)
def test_ring_axioms_modular(a, b, c):
    a, b, c = (Weight.modular(x, 13) for x in (a, b, c))
    assert weight_mul(a, weight_add(b, c)) == weight_add(weight_mul(a, b), weight_mul(a, c))
    assert weight_mul(weight_mul(a, b), c) == weight_mul(a, weight_mul(b, c))
    assert weight_add(a, weight_neg(a)).is_zero()


@given(small_grid, small_grid, small_grid)
def test_ring_axioms_bivariate(a, b, c):
    a, b, c = (Weight.bivariate(x) for x in (a, b, c))
    assert weight_mul(a, b) == weight_mul(b, a)
    assert weight_mul(a, weight_add(b, c)) == weight_add(weight_mul(a, b), weight_mul(a, c))
    assert weight_mul(weight_mul(a, b), c) == weight_mul(a, weight_mul(b, c))


@given(small_grid, small_grid, st.integers(-5, 5), st.integers(-5, 5))
def test_evaluation_is_a_homomorphism(a, b, q, v):
    a, b = Weight.bivariate(a), Weight.bivariate(b)
    assert evaluate(weight_mul(a, b), q, v) == evaluate(a, q, v) * evaluate(b, q, v)
    assert evaluate(weight_add(a, b), q, v) == evaluate(a, q, v) + evaluate(b, q, v)
    assert evaluate(U(specialise_v(a, v)), q) == evaluate(a, q, v)


def test_specialise_fraction():
    w = Weight.bivariate([[0, 0, 1], [0, 1]])  # Q^2 + vQ
    assert specialise_v(w, Fraction(1, 2)) == [0, Fraction(1, 2), 1]


def test_primes():
    ps = prime_schedule(5)
    assert ps[0] == 2**31 - 1
    assert ps == sorted(ps, reverse=True) and all(is_prime(p) for p in ps)
    assert list(iter_primes(20)) == [19, 17, 13, 11, 7, 5, 3, 2]
    assert not is_prime(561) and not is_prime(1) and is_prime(2)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_crt_examples():
    assert crt_reconstruct([(5, [4]), (7, [6])]) == U([-1])
    assert crt_reconstruct([(5, [0]), (7, [0])]).is_zero()
    chi = U([0, 2, -3, 1])
    residues = [(p, reduce_mod(chi, p).coeffs) for p in (11, 13)]
    assert crt_reconstruct(residues) == chi
    with pytest.raises(WeightError):
        crt_reconstruct([(5, [1]), (5, [1])])


@given(st.lists(st.integers(-(10**40), 10**40), min_size=1, max_size=8))
def test_crt_round_trip(coeffs):
    primes = prime_schedule(3)
    bound = math.prod(primes) // 2
    w = U(coeffs)
    if any(abs(c) >= bound for c in w.coeffs):
        return
    assert crt_reconstruct([(p, reduce_mod(w, p).coeffs) for p in primes]) == w


def test_adaptive_crt_small_target_uses_two_lifts():
    target = U([0, 2, -3, 1])
    calls = []

    def compute_mod(p):
        calls.append(p)
        return reduce_mod(target, p)

    out = adaptive_crt_run(compute_mod, lambda q0, p: evaluate(target, q0) % p)
    assert out == target and len(calls) == 2


def test_adaptive_crt_big_target():
    target = U([(-1) ** k * 7**(60 - k) for k in range(40)])
    out = adaptive_crt_run(lambda p: reduce_mod(target, p), lambda q0, p: evaluate(target, q0) % p)
    assert out == target


def test_adaptive_crt_inconsistent_fails(monkeypatch):
    counter = iter(range(10**6))
    with pytest.raises(CRTError):
        adaptive_crt_run(lambda p: [next(counter) % p], lambda q0, p: 0, max_primes=8)
    monkeypatch.setenv("POTTS_TM_PRIME_COUNT_MAX", "3")
    with pytest.raises(CRTError, match="3 primes"):
        adaptive_crt_run(lambda p: [next(counter) % p], lambda q0, p: 0)


def test_text_format():
    assert format_weight(U([0, 2, -3, 1])) == "0 2 -3 1"
    assert format_weight(U([])) == "0"
    assert format_weight(Weight.bivariate([[0, 0, 1], [0, 1]])) == "0 0 1\n0 1"
    assert format_weight(Weight.scalar(0.1)) == "0.10000000000000001"
    assert parse_polynomial("0 2 -3 1 0") == [0, 2, -3, 1]
    assert parse_bivariate("0 0 1\n0 1\n") == Weight.bivariate([[0, 0, 1], [0, 1]])
