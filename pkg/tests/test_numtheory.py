"""
test_numtheory.py

Exact checks of the elementary kernels and the exponent system a_N(t).
No external services; everything is integer arithmetic.

Run: python tests/test_numtheory.py
"""

import os
import sys
from fractions import Fraction
from math import gcd

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from x0n.numtheory import (Level, delta_exponent, delta_exponents, delta_exponents_triangular, divisors,
                           euler_phi, exponent_identities, is_square_free, moebius, ramanujan_sum,
                           square_free_levels)


# ------------------------------------------------------------------
# Helpers
# ------------------------------------------------------------------

def _ramanujan_by_roots(N: int, n: int) -> float:
    """C_N(n) as the sum of e(kn/N) over units k mod N."""
    k = np.array([k for k in range(1, N + 1) if gcd(k, N) == 1])
    return float(np.real(np.sum(np.exp(2j * np.pi * k * n / N))))


# ------------------------------------------------------------------
# Tests
# ------------------------------------------------------------------

def test_moebius_and_phi():
    """Small values of mu and phi."""
    print("\n-- Test: Moebius and Euler phi --")
    assert [moebius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]
    assert [euler_phi(n) for n in (1, 2, 6, 30)] == [1, 1, 2, 8]
    assert divisors(12) == (1, 2, 3, 4, 6, 12)
    assert is_square_free(30) and not is_square_free(12)
    print("  + mu, phi, divisors agree with hand values")


def test_ramanujan_sum_matches_roots_of_unity():
    """C_N(n) from Moebius inversion equals the exponential sum."""
    print("\n-- Test: Ramanujan Sums --")
    for N in (1, 2, 6, 10, 30):
        for n in range(0, 40):
            assert ramanujan_sum(N, n) == round(_ramanujan_by_roots(N, n)), (N, n)
    assert ramanujan_sum(6, 6) == 2
    print("  + C_N(n) verified for N <= 30, n < 40")


def test_level_invariants():
    """Index r = N prod(1 + 1/p) and weight k = 12 phi(N)."""
    print("\n-- Test: Level Invariants --")
    level = Level.of(6)
    assert level.primes == (2, 3)
    assert level.index == 12
    assert level.weight == 24
    assert level.delta_order == 24
    with pytest.raises(ValueError):
        Level.of(4)
    with pytest.raises(ValueError):
        Level.of(0)
    with pytest.raises(TypeError):
        Level.of(2.0)
    print("  + Level(6): r=12, k=24; non-square-free and bad types rejected")


def test_delta_exponents():
    """Both constructions of a_N(t) agree; N=6 matches the hand computation."""
    print("\n-- Test: Delta Exponents --")
    assert delta_exponents(6) == {1: 1, 2: -2, 3: -3, 6: 6}
    for N in square_free_levels(60):
        assert delta_exponents(N) == delta_exponents_triangular(N), N
    assert delta_exponent(2, 2) == 2
    print("  + closed form and triangular solve agree for N <= 60")


def test_exponent_identities_up_to_210():
    """sum a = phi(N), sum t a = N phi(N) prod(1 + 1/p), sum a/t = 0 for N > 1."""
    print("\n-- Test: Exponent Identities --")
    levels = square_free_levels(210)
    reports = [exponent_identities(N) for N in levels]
    assert all(r.ok for r in reports)
    assert reports[0].sum_a_over_t == Fraction(1)
    print(f"  + {len(levels)} square-free levels verified")


# ------------------------------------------------------------------
# Runner
# ------------------------------------------------------------------

def main():
    print("=" * 60)
    print("  NUMBER THEORY TESTS")
    print("=" * 60)
    test_moebius_and_phi()
    test_ramanujan_sum_matches_roots_of_unity()
    test_level_invariants()
    test_delta_exponents()
    test_exponent_identities_up_to_210()
    print("\n  + ALL NUMBER THEORY TESTS PASSED")


if __name__ == "__main__":
    main()
