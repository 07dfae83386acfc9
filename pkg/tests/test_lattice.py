"""
test_lattice.py

The lattice L for level N: vector enumeration against a brute-force box,
Heegner degrees against tabulated Hurwitz class numbers, cusp counts for
square discriminants, coset bookkeeping and the Weil representation.

Run: python tests/test_lattice.py
"""

import os
import sys
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from x0n.errors import CongruenceError
from x0n.lattice import (LatticeVector, WeilRep, alpha_count, coset_index, coset_representatives, cusp_data,
                         cusp_of, discriminant, enumerate_vectors, gamma_runs, gamma_to_word, heegner_classes,
                         heegner_degree, hurwitz_class_number, lift_sign, mat_mul, p1_reduce, pairing,
                         runs_matrix, weil_rep_check, weil_rep_element)
from x0n.numtheory import Level


# ------------------------------------------------------------------
# Helpers
# ------------------------------------------------------------------

# H(d) for small d, tabulated
HURWITZ = {3: Fraction(1, 3), 4: Fraction(1, 2), 7: Fraction(1), 8: Fraction(1), 11: Fraction(1),
           12: Fraction(4, 3), 15: Fraction(2), 16: Fraction(3, 2), 19: Fraction(1), 20: Fraction(2),
           23: Fraction(3)}

SAMPLE_MATRICES = [(1, 0, 0, 1), (-1, 0, 0, -1), (0, -1, 1, 0), (2, 1, 1, 1), (5, 3, 3, 2),
                   (1, 0, 6, 1), (7, -2, -10, 3), (-3, 1, -10, 3), (13, 5, -8, -3)]


def _brute_vectors(N: int, r: int, n: Fraction, bound: int):
    out = set()
    for a, b, c in product(range(-bound, bound + 1), repeat=3):
        v = LatticeVector(a, b, c, N, r)
        if v.Q == n:
            out.add(v)
    return out


def _form_at(form, z: complex) -> complex:
    A, B, C = form
    return A * z * z + B * z + C


# ------------------------------------------------------------------
# Tests
# ------------------------------------------------------------------

def test_discriminant_congruence():
    """n must be congruent to Q(mu_r) mod 1."""
    print("\n-- Test: Discriminant Congruence --")
    assert discriminant(Level.of(1), 1, Fraction(3, 4)) == -3
    assert discriminant(Level.of(2), 1, Fraction(7, 8)) == -7
    with pytest.raises(CongruenceError):
        discriminant(Level.of(2), 0, Fraction(-1, 8))
    with pytest.raises(CongruenceError):
        discriminant(Level.of(1), 0, Fraction(1, 3))
    print("  + D = -4Nn with D = r^2 mod 4N enforced")


def test_enumerate_vectors_matches_box():
    """The divisor walk finds exactly the vectors of the brute-force box."""
    print("\n-- Test: Vector Enumeration --")
    cases = [(1, 0, Fraction(-1), 3), (1, 0, Fraction(1), 3), (2, 1, Fraction(7, 8), 3),
             (6, 5, Fraction(-1, 24), 2)]
    for N, r, n, bound in cases:
        found = enumerate_vectors(Level.of(N), r, n, bound)
        assert set(found) == _brute_vectors(N, r, n, bound), f"N={N}, r={r}, n={n}"
        assert all(v.Q == n for v in found)
        print(f"  + N={N} r={r} n={n}: {len(found)} vectors")
    with pytest.raises(ValueError):
        enumerate_vectors(Level.of(1), 0, 1, 0)


def test_pairing_and_negation():
    """(w, w) = 2 Q(w) and -w lies in the coset of -mu."""
    print("\n-- Test: Pairing and Negation --")
    for v in enumerate_vectors(Level.of(6), 5, Fraction(-1, 24), 2)[:20]:
        assert pairing(v, v) == 2 * v.Q
        w = -v
        assert w.r == (-v.r) % 12
        assert (w.w1, w.w2, w.w3) == (-v.w1, -v.w2, -v.w3)
    print("  + norm and negation consistent")


def test_heegner_degree_level_one():
    """At N = 1 the degree is 2 H(|D|)."""
    print("\n-- Test: Heegner Degrees at N=1 --")
    level = Level.of(1)
    for d, H in HURWITZ.items():
        assert hurwitz_class_number(d) == H, f"H({d}) = {hurwitz_class_number(d)}"
        deg = heegner_degree(level, d % 2, Fraction(d, 4))
        assert deg == 2 * H, f"d={d}: degree {deg}, expected {2 * H}"
    assert hurwitz_class_number(0) == Fraction(-1, 12)
    assert hurwitz_class_number(5) == 0
    print(f"  + 2H(d) verified for d in {sorted(HURWITZ)}")


def test_heegner_degree_level_two():
    """Two Heegner points of discriminant -7 on X0(2), one per orientation."""
    print("\n-- Test: Heegner Degrees at N=2 --")
    level = Level.of(2)
    classes = heegner_classes(level, 1, Fraction(7, 8))
    assert len(classes) == 2
    assert heegner_degree(level, 1, Fraction(7, 8)) == 2
    assert heegner_degree(level, 3, Fraction(7, 8)) == 2
    for h in classes:
        assert abs(_form_at(h.form, h.cm_point)) < 1e-12
        assert h.form[0] % 2 == 0
    with pytest.raises(ValueError):
        heegner_classes(level, 1, Fraction(-1, 8))
    print("  + degree 2 for both r = 1 and r = 3")


def test_heegner_degree_symmetric_in_r():
    """Z(n, mu) = Z(n, -mu)."""
    print("\n-- Test: Heegner Degree r -> -r --")
    for N, D in ((3, -11), (5, -19), (6, -23), (10, -31)):
        level = Level.of(N)
        n = Fraction(-D, 4 * N)
        rs = [r for r in range(2 * N) if (r * r - D) % (4 * N) == 0]
        for r in rs:
            assert heegner_degree(level, r, n) == heegner_degree(level, (-r) % (2 * N), n)
        print(f"  + N={N}, D={D}: r in {rs}")


def test_alpha_counts():
    """Brute-force cusp pairs equal sqrt(D) times the compatible signs."""
    print("\n-- Test: Cusp Counts for Square D --")
    checked = 0
    for N in (1, 2, 3, 5, 6):
        level = Level.of(N)
        for r in range(2 * N):
            for root in range(1, 13):
                D = root * root
                if (D - r * r) % (4 * N):
                    continue
                n = Fraction(-D, 4 * N)
                for M in level.divisors:
                    a = alpha_count(level, r, n, M)
                    assert a.brute == a.closed_form
                    assert a.brute in (0, a.two_case), f"N={N} r={r} D={D} M={M}: {a}"
                    checked += 1
    with pytest.raises(CongruenceError):
        alpha_count(Level.of(6), 1, Fraction(-1, 24), 4)
    print(f"  + {checked} (N, r, D, M) cases agree")


def test_cosets_and_cusps():
    """Gamma0(N) g_j are distinct, and left multiplication by Gamma0(N) keeps the coset."""
    print("\n-- Test: Cosets and Cusps --")
    for N in (1, 2, 6, 10):
        level = Level.of(N)
        reps = coset_representatives(level)
        assert len(reps) == level.index
        gamma = (1 + 2 * N, 1, 2 * N, 1)
        for j, g in enumerate(reps):
            assert g[0] * g[3] - g[1] * g[2] == 1
            assert coset_index(level, g) == j
            assert coset_index(level, mat_mul(gamma, g)) == j
        cusps = cusp_data(level)
        assert len(cusps) == len(level.divisors)
        assert all(c.funke == N for c in cusps)
    six = Level.of(6)
    assert [cusp_of(six, p, q) for p, q in ((1, 0), (0, 1), (1, 2), (1, 3), (5, 12))] == [6, 1, 2, 3, 6]
    with pytest.raises(ValueError):
        cusp_of(six, 2, 4)
    with pytest.raises(ValueError):
        p1_reduce(6, 2, 4)
    print("  + coset tables consistent for N in (1, 2, 6, 10)")


def test_words_in_S_and_T():
    """gamma_runs multiplies back to gamma; lift signs are +-1."""
    print("\n-- Test: S/T Words --")
    for g in SAMPLE_MATRICES:
        runs = gamma_runs(g)
        assert runs_matrix(runs) == g, f"{g}: {runs}"
        assert lift_sign(runs) in (1, -1)
        assert all(letter in ('S', 'T', 'Ti') for letter in gamma_to_word(g))
    with pytest.raises(ValueError):
        gamma_runs((1, 1, 1, 1))
    print(f"  + {len(SAMPLE_MATRICES)} matrices decomposed")


def test_weil_representation():
    """Unitary, (ST)^3 = S^2 = iP and Z^2 = -1."""
    print("\n-- Test: Weil Representation --")
    for N in (1, 2, 3, 5, 6, 10, 30):
        check = weil_rep_check(Level.of(N))
        assert check.ok, f"N={N}: {check}"
    assert np.allclose(weil_rep_element(Level.of(2), ["S", "S"]), 1j * WeilRep(Level.of(2)).negation())
    rho = WeilRep(Level.of(6))
    vec = np.arange(12, dtype=complex) + 1j
    for g in SAMPLE_MATRICES:
        runs = gamma_runs(g)
        word = gamma_to_word(g)
        direct = np.linalg.solve(rho.element(word), vec)
        assert np.allclose(rho.apply_inverse(runs, vec), direct, atol=1e-10)
    print("  + relations hold for N <= 30; apply_inverse matches the matrix")


# ------------------------------------------------------------------
# Runner
# ------------------------------------------------------------------

def main():
    print("=" * 60)
    print("  LATTICE TESTS")
    print("=" * 60)
    test_discriminant_congruence()
    test_enumerate_vectors_matches_box()
    test_pairing_and_negation()
    test_heegner_degree_level_one()
    test_heegner_degree_level_two()
    test_heegner_degree_symmetric_in_r()
    test_alpha_counts()
    test_cosets_and_cusps()
    test_words_in_S_and_T()
    test_weil_representation()
    print("\n  + ALL LATTICE TESTS PASSED")


if __name__ == "__main__":
    main()
