"""
numtheory.py

Exact elementary number theory for levels N: Moebius, Euler phi, divisors,
Ramanujan sums and the exponent system a_N(t) of the generalized Delta
function Delta_N = prod_{t|N} Delta(tz)^{a_N(t)}.

Usage:
    from x0n.numtheory import Level, delta_exponents
    level = Level.of(6)
    delta_exponents(6)   # {1: 1, 2: -2, 3: -3, 6: 6}
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, prod
from typing import Dict, List, Tuple

from sympy import divisors as _sympy_divisors
from sympy import factorint

from x0n.errors import CongruenceError


# -- Elementary kernels --------------------------------------------------------

@lru_cache(maxsize=None)
def factor(n: int) -> Tuple[Tuple[int, int], ...]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return tuple(sorted(factorint(n).items()))


def moebius(n: int) -> int:
    exps = factor(n)
    if any(e > 1 for _, e in exps):
        return 0
    return -1 if len(exps) % 2 else 1


def euler_phi(n: int) -> int:
    return prod(p ** (e - 1) * (p - 1) for p, e in factor(n))


@lru_cache(maxsize=None)
def divisors(n: int) -> Tuple[int, ...]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return tuple(int(d) for d in _sympy_divisors(n))


def is_square_free(n: int) -> bool:
    return all(e == 1 for _, e in factor(n))


def ramanujan_sum(N: int, n: int) -> int:
    """C_N(n) = sum over a in (Z/N)^x of e(an/N), via Kluyver's formula."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    g = gcd(N, n) if n != 0 else N
    return sum(moebius(N // r) * r for r in divisors(g))


# -- Levels --------------------------------------------------------------------

@dataclass(frozen=True)
class Level:
    """A level N together with the invariants every other module keeps asking for."""
    N: int
    primes: Tuple[int, ...]

    @classmethod
    def of(cls, N: int, square_free: bool = True) -> "Level":
        if not isinstance(N, int) or isinstance(N, bool):
            raise TypeError("level must be an integer")
        if N < 1:
            raise ValueError(f"level must be >= 1, got {N}")
        if square_free and not is_square_free(N):
            raise ValueError(f"level {N} is not square-free")
        return cls(N=N, primes=tuple(p for p, _ in factor(N)))

    @property
    def phi(self) -> int:
        return euler_phi(self.N)

    @property
    def index(self) -> int:
        """r = [SL2(Z) : Gamma0(N)] = N prod (1 + 1/p)."""
        return self.N // prod(self.primes) * prod(p + 1 for p in self.primes)

    @property
    def weight(self) -> int:
        """k = 12 phi(N), the weight of Delta_N."""
        return 12 * self.phi

    @property
    def divisors(self) -> Tuple[int, ...]:
        return divisors(self.N)

    @property
    def delta_order(self) -> int:
        """Leading exponent of Delta_N at infinity, N phi(N) prod (1 + 1/p)."""
        return self.phi * self.index

    def __str__(self):
        return f"N={self.N}"


# -- Exponent system a_N(t) ----------------------------------------------------

def delta_exponent(N: int, t: int) -> int:
    """a_N(t) = sum_{r|t} mu(t/r) mu(N/r) phi(N)/phi(N/r)."""
    if N < 1 or t < 1 or N % t:
        raise CongruenceError(f"t={t} does not divide N={N}")
    phi_n = euler_phi(N)
    total = 0
    for r in divisors(t):
        phi_q = euler_phi(N // r)
        # phi(N/r) | phi(N) holds for square-free N; other N are not supported
        if phi_n % phi_q:
            raise ValueError(f"phi({N // r}) does not divide phi({N}); N must be square-free")
        total += moebius(t // r) * moebius(N // r) * (phi_n // phi_q)
    return total


@lru_cache(maxsize=None)
def delta_exponents(N: int) -> Dict[int, int]:
    return {t: delta_exponent(N, t) for t in divisors(N)}


def delta_exponents_triangular(N: int) -> Dict[int, int]:
    """Solve sum_{t|r} a(t) = (phi(N)/phi(N/r)) mu(N/r) for r | N from the bottom up."""
    phi_n = euler_phi(N)
    solved: Dict[int, int] = {}
    for r in divisors(N):
        rhs = phi_n // euler_phi(N // r) * moebius(N // r)
        solved[r] = rhs - sum(solved[t] for t in divisors(r) if t < r)
    return solved


@dataclass
class IdentityReport:
    N: int
    sum_a: int
    sum_ta: int
    sum_a_over_t: Fraction
    expected: Tuple[int, int, Fraction]
    ok: bool


def exponent_identities(N: int) -> IdentityReport:
    level = Level.of(N)
    a = delta_exponents(N)
    sums = (
        sum(a.values()),
        sum(t * e for t, e in a.items()),
        sum((Fraction(e, t) for t, e in a.items()), Fraction(0)),
    )
    # the third sum vanishes for N > 1; at N = 1 it is the single term a(1) = 1
    expected = (level.phi, level.phi * level.index, Fraction(1) if N == 1 else Fraction(0))
    return IdentityReport(
        N=N,
        sum_a=sums[0],
        sum_ta=sums[1],
        sum_a_over_t=sums[2],
        expected=expected,
        ok=sums == expected,
    )


def square_free_levels(limit: int) -> List[int]:
    return [n for n in range(1, limit + 1) if is_square_free(n)]
