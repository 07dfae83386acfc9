"""
test_arithgeom.py

The intersection table on X0(N): known pairings, principal vertical divisors,
the self-intersection of Delta_N hat, the Atkin-Lehner involution on classes,
the arithmetic Kudla divisors and their degrees.

Everything here is exact sympy arithmetic.

Run: python tests/test_arithgeom.py
"""

import os
import sys
from fractions import Fraction

import pytest
import sympy

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from x0n.analytic import ZETA1, ZETA_PRIME_MINUS1
from x0n.arithgeom import (C, ArithDivisor, Const, CuspSection, Hodge, Horizontal, LogVN, VertInf, VertZero,
                           _basic, assemble_Z_hat, basis, degree, degree_series, divisor_of_delta_N,
                           divisor_of_delta_N_zero, involution, numeric, pair, pairing_table, parse_divisor,
                           render, self_intersection_delta, self_intersection_delta_closed, vertical_constant,
                           vertical_pairing_identity)
from x0n.errors import CongruenceError, UndeterminedPairingError
from x0n.numtheory import Level
from x0n.qexp import PETERSSON_C


# ------------------------------------------------------------------
# Helpers
# ------------------------------------------------------------------

def _div(level: Level, comp, k=1) -> ArithDivisor:
    return ArithDivisor.of(level, comp, k)


def _same(a, b) -> bool:
    return sympy.simplify(sympy.expand_log(sympy.sympify(a) - sympy.sympify(b), force=True)) == 0


def _determined(level: Level, A, B) -> bool:
    try:
        _basic(level, A, B)
        return True
    except UndeterminedPairingError:
        return False


def _sample_divisor(level: Level) -> ArithDivisor:
    """A mix of every component kind at level N."""
    out = _div(level, Hodge(), 2) + _div(level, CuspSection(1)) + _div(level, Const(), Fraction(1, 3))
    out = out + _div(level, LogVN(sympy.Integer(3)), 5)
    for p in level.primes:
        out = out - _div(level, VertZero(p)) + _div(level, VertInf(p), 2)
    return out


# ------------------------------------------------------------------
# Tests: table
# ------------------------------------------------------------------

def test_divisor_of_delta():
    """Div Delta_2 = 3 P_inf - 24 X0_2, and its image at zero."""
    print("\n-- Test: Div Delta_N --")
    level = Level.of(2)
    d = divisor_of_delta_N(level)
    assert d.to_dict() == {'P_2': '3', 'X0_2': '-24'}, d.to_dict()
    d0 = divisor_of_delta_N_zero(level)
    assert d0.to_dict() == {'P_1': '3', 'X0_2': '-6', 'Xinf_2': '-18'}, d0.to_dict()
    print(f"  + {d.to_dict()}")


def test_vertical_pairings():
    """<Xinf_p, X0_p> = r(p-1)/(12(p+1)) log p; same components give minus that."""
    print("\n-- Test: Vertical Pairings --")
    level = Level.of(5)
    value = pair(level, _div(level, VertInf(5)), _div(level, VertZero(5)))
    assert _same(value, sympy.log(5) / 3)
    assert _same(pair(level, _div(level, VertInf(5)), _div(level, VertInf(5))), -sympy.log(5) / 3)
    assert _same(vertical_constant(Level.of(2), 2), sympy.log(2) / 12)
    for N in (2, 3, 5, 6, 10, 30):
        lv = Level.of(N)
        for p in lv.primes:
            assert _same(vertical_constant(lv, p), _basic(lv, VertInf(p), VertZero(p)))
            assert _same(_basic(lv, VertZero(p), VertZero(p)), -vertical_constant(lv, p))
    out = render(level, value)
    assert out.logp_terms == {'5': '1/3'} and out.rational == '0'
    print(f"  + <Xinf_5, X0_5> = {value}")


def test_hodge_self_intersection():
    """<omega hat, omega hat> at N = 1 is -1/24 + zeta'(-1) + C/12 ~ -0.0775778."""
    print("\n-- Test: Hodge Self-Intersection --")
    level = Level.of(1)
    w = _div(level, Hodge())
    value = pair(level, w, w)
    assert _same(value, sympy.Rational(-1, 24) + ZETA1 + C / 12)
    assert abs(numeric(value) + 0.0775778) < 1e-6, numeric(value)
    out = render(level, value)
    assert out.zeta_prime_coeff == '1' and out.C_coeff == '1/12' and out.rational == '-1/24'
    assert abs(numeric(value) - (-1 / 24 + ZETA_PRIME_MINUS1 + PETERSSON_C / 12)) < 1e-12
    print(f"  + {value} = {numeric(value):.7f}")


def test_vertical_fibres_are_principal():
    """<A, Xinf_p + X0_p> = deg(A) log p for every A."""
    print("\n-- Test: Principal Fibres --")
    for N in (2, 6, 10):
        level = Level.of(N)
        A = _sample_divisor(level)
        for p in level.primes:
            fibre = _div(level, VertInf(p)) + _div(level, VertZero(p))
            assert _same(pair(level, A, fibre), degree(level, A) * sympy.log(p)), f"N={N} p={p}"
        print(f"  + N={N}: deg A = {degree(level, A)}")


def test_pairing_symmetric():
    """<A, B> = <B, A> over the basis."""
    print("\n-- Test: Pairing Symmetry --")
    level = Level.of(6)
    comps = basis(level)
    checked = 0
    for A in comps:
        for B in comps:
            try:
                ab = _basic(level, A, B)
            except UndeterminedPairingError:
                with pytest.raises(UndeterminedPairingError):
                    _basic(level, B, A)
                continue
            assert _same(ab, _basic(level, B, A)), f"{A.label}, {B.label}"
            checked += 1
    assert len(pairing_table(level)) == (checked + sum(1 for A in comps if _determined(level, A, A))) // 2
    print(f"  + {checked} ordered pairs symmetric")


def test_undetermined_pairings():
    """<P_inf, P_inf> and <P_M, omega> are not in the table."""
    print("\n-- Test: Undetermined Pairings --")
    level = Level.of(2)
    P = _div(level, CuspSection(2))
    with pytest.raises(UndeterminedPairingError):
        pair(level, P, P)
    with pytest.raises(KeyError):
        pair(level, P, _div(level, Hodge()))
    assert pair(level, P, _div(level, CuspSection(1))) == 0
    print("  + raised as UndeterminedPairingError (a KeyError)")


def test_self_intersection_delta():
    """The table reproduces the closed form of <Delta_N hat, Delta_N hat>."""
    print("\n-- Test: Self-Intersection of Delta_N --")
    for N in (1, 2, 6, 10):
        level = Level.of(N)
        assert _same(self_intersection_delta(level), self_intersection_delta_closed(level)), f"N={N}"
        print(f"  + N={N}: {numeric(self_intersection_delta(level)):.6f}")


# ------------------------------------------------------------------
# Tests: involution
# ------------------------------------------------------------------

def test_involution_is_isometric_involution():
    """w_N^* squares to the identity and preserves every determined pairing."""
    print("\n-- Test: Atkin-Lehner Involution --")
    for N in (2, 6):
        level = Level.of(N)
        comps = basis(level)
        for A in comps:
            a = _div(level, A)
            assert involution(level, involution(level, a)).to_dict() == a.to_dict()
            for B in comps:
                if not _determined(level, A, B):
                    continue
                b = _div(level, B)
                assert _same(pair(level, involution(level, a), involution(level, b)), _basic(level, A, B)), \
                    f"N={N}: {A.label}, {B.label}"
    level = Level.of(6)
    Z0 = assemble_Z_hat(level, 0, 0, 1)
    assert involution(level, Z0).to_dict() == Z0.to_dict()
    print("  + isometry on the table, Z hat(0, 0, v) fixed")


# ------------------------------------------------------------------
# Tests: Kudla divisors
# ------------------------------------------------------------------

def test_constant_term_divisor():
    """Z hat(0, 0, v) at N = 1 is P/(2 pi sqrt v) - 2 omega - a(log v)."""
    print("\n-- Test: Z hat(0, 0, v) --")
    level = Level.of(1)
    Z = assemble_Z_hat(level, 0, 0, 1)
    assert _same(Z.coefficient(CuspSection(1)), 1 / (2 * sympy.pi))
    assert Z.coefficient(Hodge()) == -2
    assert Z.coefficient(LogVN(sympy.Integer(1))) == -1
    assert _same(degree(level, Z), 1 / (2 * sympy.pi) - sympy.Rational(1, 6))
    print(f"  + {Z.to_dict()}")


def test_kudla_divisor_kinds():
    """n > 0 is a Heegner divisor; congruence and sign of v are enforced."""
    print("\n-- Test: Z hat Kinds --")
    level = Level.of(1)
    Z = assemble_Z_hat(level, 0, 1, 1)
    assert Z.to_dict() == {'Z(1,0)': '1'}
    assert Z.coefficient(Horizontal(Fraction(1), 0)) == 1
    assert assemble_Z_hat(level, 0, -2, 1).is_zero
    six = Level.of(6)
    cusp = assemble_Z_hat(six, 1, Fraction(-25, 24), 1)
    assert sorted(c.M for c in cusp.coefficients) == [2, 3]
    with pytest.raises(CongruenceError):
        assemble_Z_hat(Level.of(2), 0, Fraction(-1, 8), 1)
    with pytest.raises(ValueError):
        assemble_Z_hat(level, 0, 0, -1)
    print("  + heegner, cusp and zero kinds")


def test_degree_series_level_one():
    """deg Z hat(n) = 2 H(4n) at N = 1 for n > 0."""
    print("\n-- Test: Degree Series --")
    rows = {(row.n, row.r): row for row in degree_series(Level.of(1), 1, 3)}
    expected = {("3/4", 1): "2/3", ("1", 0): "1", ("7/4", 1): "2", ("2", 0): "2",
                ("11/4", 1): "2", ("3", 0): "8/3"}
    for key, deg in expected.items():
        assert rows[key].degree == deg, f"{key}: {rows[key].degree}"
        assert rows[key].kind == 'heegner'
    assert rows[("0", 0)].kind == 'constant'
    assert abs(float(rows[("0", 0)].degree) - (1 / (2 * 3.141592653589793) - 1 / 6)) < 1e-12
    assert rows[("-1/4", 1)].kind == 'cusp'
    assert rows[("-2", 0)].kind == 'zero' and rows[("-2", 0)].degree == '0'
    print(f"  + {len(rows)} rows, Heegner degrees {list(expected.values())}")


def test_vertical_pairing_identity():
    """<Z hat, X0_p> = <Z hat, Xinf_p> = deg(Z hat) log p / 2, row by row."""
    print("\n-- Test: Vertical Pairing Identity --")
    for N in (2, 3, 5, 6, 10, 30):
        level = Level.of(N)
        for p in level.primes:
            report = vertical_pairing_identity(level, p, 1, 3)
            assert report.holds, [row for row in report.rows if not row.holds]
            assert any(row.n == 3 for row in report.rows)
            print(f"  + N={N} p={p}: {len(report.rows)} rows")
    with pytest.raises(CongruenceError):
        vertical_pairing_identity(Level.of(6), 5, 1, 1)


# ------------------------------------------------------------------
# Tests: parsing
# ------------------------------------------------------------------

def test_parse_divisor():
    """Sums over component labels, with Pinf and P0 aliases."""
    print("\n-- Test: Parse Divisor --")
    level = Level.of(2)
    A = parse_divisor(level, "2*omega - X0_2 + 1/2 Pinf + Z(7/8,3)")
    assert A.to_dict() == {'P_2': '1/2', 'X0_2': '-1', 'Z(7/8,1)': '1', 'omega': '2'}, A.to_dict()
    assert parse_divisor(level, "P0 - P_1").is_zero
    assert parse_divisor(level, "alog(4) + a1").to_dict() == {'a1': '1', 'alog(4)': '1'}
    for bad in ("", "2*omega +", "omega omega", "Y_2"):
        with pytest.raises(ValueError):
            parse_divisor(level, bad)
    with pytest.raises(CongruenceError):
        parse_divisor(level, "X0_3")
    print(f"  + {A.to_dict()}")


# ------------------------------------------------------------------
# Runner
# ------------------------------------------------------------------

def main():
    print("=" * 60)
    print("  ARITHMETIC INTERSECTION TESTS")
    print("=" * 60)
    test_divisor_of_delta()
    test_vertical_pairings()
    test_hodge_self_intersection()
    test_vertical_fibres_are_principal()
    test_pairing_symmetric()
    test_undetermined_pairings()
    test_self_intersection_delta()
    test_involution_is_isometric_involution()
    test_constant_term_divisor()
    test_kudla_divisor_kinds()
    test_degree_series_level_one()
    test_vertical_pairing_identity()
    test_parse_divisor()
    print("\n  + ALL ARITHMETIC INTERSECTION TESTS PASSED")


if __name__ == "__main__":
    main()
