"""
analytic.py

Special functions and the scalar Eisenstein series of Gamma0(N):

    beta_s(r) = int_1^inf e^{-rt} t^{-s} dt
    W(y, a, b) = Gamma(b)^-1 int_0^inf (1 + h)^{a-1} h^{b-1} e^{-yh} dh
    E(N, z, s) = y^s / (2 zeta^(N)(2s)) sum_{(N, n) = 1} |mNz + n|^{-2s}
    calE(N, z, s) = N^{2s} pi^{-s} Gamma(s) zeta^(N)(2s) E(N, z, s)

plus both sides of the Kronecker limit formula (at infinity and at zero) and
the Laurent data of the scattering function at s = 1.

Usage:
    from x0n.analytic import eisenstein_fourier, kronecker_limit_pair
    kronecker_limit_pair(Level.of(6), 0.3 + 1.1j).residual
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import ceil, cos, exp, floor, log, pi, sqrt
from typing import Union

import mpmath
import numpy as np
import scipy.special as sp
import sympy

from x0n.models import KLFResult
from x0n.numtheory import Level, divisors, moebius, ramanujan_sum
from x0n.qexp import (EULER_GAMMA, coefficient_growth, delta_N_log_abs, delta_N_zero, eval_at,
                      required_order)

logger = logging.getLogger(__name__)

Number = Union[float, complex]

# zeta'(-1) = 1/12 - log(Glaisher's constant)
ZETA_PRIME_MINUS1 = -0.16542114370045092921


def _num(x) -> Number:
    """mpmath scalar -> float, or complex when the imaginary part is nonzero."""
    c = complex(x)
    return c.real if c.imag == 0 else c


# -- Constants -----------------------------------------------------------------

@dataclass(frozen=True)
class SpecialValueTable:
    gamma_euler: float
    C: float
    f0: float
    gamma1_0: float
    zeta_prime_minus1: float
    zeta_star_residue: float
    zeta_star_constant: float

    def consistent(self, tol: float = 1e-14) -> bool:
        """f0 = gamma - log 4 pi, C = (log 4 pi + gamma)/2 and the Laurent constant of zeta* is f0/2."""
        return (
            abs(self.f0 - (self.gamma_euler - log(4 * pi))) < tol
            and abs(self.C + self.f0 / 2 - self.gamma_euler) < tol
            and abs(self.zeta_star_constant - self.f0 / 2) < tol
            and abs(self.gamma1_0 + self.gamma_euler) < tol
        )


def special_values() -> SpecialValueTable:
    g = EULER_GAMMA
    return SpecialValueTable(
        gamma_euler=g,
        C=(log(4 * pi) + g) / 2,
        f0=g - log(4 * pi),
        gamma1_0=-g,
        zeta_prime_minus1=ZETA_PRIME_MINUS1,
        zeta_star_residue=1.0,
        zeta_star_constant=-(log(4 * pi) - g) / 2,
    )


# -- beta_s and Whittaker functions ---------------------------------------------

def beta_s(r: float, s: float) -> float:
    """beta_s(r) = r^{s-1} Gamma(1 - s, r)."""
    if r <= 0:
        raise ValueError(f"beta_s needs r > 0, got {r}")
    return float(mpmath.power(r, s - 1) * mpmath.gammainc(1 - s, r))


def beta_s_array(r: np.ndarray, s: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("beta_s needs r > 0")
    if s == 1:
        return sp.exp1(r)
    if s < 1:
        return r ** (s - 1) * sp.gammaincc(1 - s, r) * sp.gamma(1 - s)
    return np.array([beta_s(float(x), s) for x in r.ravel()]).reshape(r.shape)


def whittaker_W(y: float, alpha: Number, beta: Number) -> Number:
    """W(y, alpha, beta) = U(beta, alpha + beta, y)."""
    if y <= 0:
        raise ValueError(f"W needs y > 0, got {y}")
    if complex(beta).real <= 0:
        raise ValueError(f"W(y, alpha, beta) diverges at h = 0 for Re(beta) = {complex(beta).real}")
    return _num(mpmath.hyperu(beta, alpha + beta, y))


def whittaker_t(n: float, y: float, alpha: Number, beta: Number) -> complex:
    """t_n(y, a, b) = int_R (x + iy)^{-a} (x - iy)^{-b} e(-nx) dx."""
    if y <= 0:
        raise ValueError(f"t_n needs y > 0, got {y}")
    pref = mpmath.expjpi((beta - alpha) / 2) * mpmath.power(2 * pi, alpha + beta)
    if n == 0:
        if complex(alpha + beta).real <= 1:
            raise ValueError("t_0 diverges for Re(alpha + beta) <= 1")
        val = (pref * mpmath.gamma(alpha + beta - 1) * mpmath.power(4 * pi * y, 1 - alpha - beta)
               * mpmath.rgamma(alpha) * mpmath.rgamma(beta))
        return complex(val)
    m = abs(n)
    if n > 0:
        w, g = whittaker_W(4 * pi * m * y, alpha, beta), mpmath.rgamma(alpha)
    else:
        w, g = whittaker_W(4 * pi * m * y, beta, alpha), mpmath.rgamma(beta)
    return complex(pref * mpmath.power(m, alpha + beta - 1) * mpmath.exp(-2 * pi * m * y) * w * g)


# -- Zeta functions ------------------------------------------------------------

def zeta_N(s: Number, N: int) -> Number:
    """zeta^(N)(s) = zeta(s) prod_{p | N} (1 - p^-s)."""
    level = Level.of(N)
    val = mpmath.zeta(s)
    for p in level.primes:
        val *= 1 - mpmath.power(p, -s)
    return _num(val)


def zeta_star(s: Number) -> Number:
    """zeta*(s) = pi^{-s/2} Gamma(s/2) zeta(s)."""
    return _num(mpmath.power(pi, -s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s))


def eisenstein_normalizer(level: Level, s: Number) -> Number:
    """N^{2s} pi^{-s} Gamma(s) zeta^(N)(2s)."""
    return _num(mpmath.power(level.N, 2 * s) * mpmath.power(pi, -s) * mpmath.gamma(s)
                * zeta_N(2 * s, level.N))


# -- Eisenstein series ---------------------------------------------------------

@dataclass
class EisensteinValue:
    value: Number
    tail_bound: float
    terms: int


def _line_sum(X: float, Y: float, s: complex):
    """sum_k ((k + X)^2 + Y^2)^{-s}: explicit window plus Euler-Maclaurin tails."""
    A = 60.0 + 8.0 * Y
    k = np.arange(floor(-X - A), ceil(-X + A) + 1)
    t = k + X
    total = complex(np.sum((t * t + Y * Y) ** (-s)))
    bound = 0.0
    for a in (k[-1] + X, -(k[0] + X)):
        integral = (mpmath.power(a, 1 - 2 * s) / (2 * s - 1)
                    * mpmath.hyp2f1(s, s - 0.5, s + 0.5, -(Y / a) ** 2))
        g = (a * a + Y * Y) ** (-s)
        dg = -2 * s * a * (a * a + Y * Y) ** (-s - 1)
        total += complex(integral) - g / 2 - dg / 12
        bound += abs(2 * s * (2 * s + 1) * (2 * s + 2)) * a ** (-2 * s.real - 3) / 720
    return total, bound, len(k)


def eisenstein_scalar(level: Level, z: complex, s: Number, tol: float = 1e-12) -> EisensteinValue:
    """E(N, z, s) from its lattice sum, Re(s) > 1.

    Rows |m| <= M are summed with a Moebius split over d | N; rows |m| > M are
    replaced by the Hurwitz-zeta sum of their Poisson zero modes, which is exact
    up to terms of size e^{-2 pi M y}.
    """
    s = complex(s)
    if s.real <= 1:
        raise ValueError(f"the lattice sum needs Re(s) > 1, got {s}; use eisenstein_fourier")
    z = complex(z)
    x, y = z.real, z.imag
    if y <= 0:
        raise ValueError("z must lie in the upper half plane")
    N = level.N
    M = max(1, ceil(log(1 / tol) / (2 * pi * y)))
    rows, bound, terms = 0j, 0.0, 0
    for m in range(1, M + 1):
        for d in divisors(N):
            mu = moebius(d)
            if mu == 0:
                continue
            line, b, k = _line_sum(m * N * x / d, m * N * y / d, s)
            rows += 2 * mu * d ** (-2 * s) * line
            bound += 2 * abs(d ** (-2 * s)) * b
            terms += 2 * k
    far = (2 * level.phi / N * mpmath.sqrt(pi) * mpmath.gamma(s - 0.5) * mpmath.rgamma(s)
           * mpmath.power(N * y, 1 - 2 * s) * mpmath.zeta(2 * s - 1, M + 1))
    rows += complex(far)
    bound += 4 * len(divisors(N)) * exp(-2 * pi * (M + 1) * y)
    scale = y ** s / (2 * complex(zeta_N(2 * s, N)))
    value = y ** s + scale * rows
    logger.debug("eisenstein_scalar N=%d z=%s s=%s: %d rows, %d terms", N, z, s, M, terms)
    return EisensteinValue(value=_num(value), tail_bound=abs(scale) * bound, terms=terms)


@lru_cache(maxsize=64)
def _fourier_coefficients(level: Level, s: Number, kmax: int) -> np.ndarray:
    """k^{1/2 - s} sum_{n | k} C_N(n) n^{2s - 1} for k = 1..kmax."""
    out = np.zeros(kmax, dtype=complex)
    for k in range(1, kmax + 1):
        out[k - 1] = k ** (0.5 - s) * sum(ramanujan_sum(level.N, n) * n ** (2 * s - 1)
                                          for n in divisors(k))
    return out


def eisenstein_fourier(level: Level, z: complex, s: Number, tol: float = 1e-12) -> EisensteinValue:
    """calE(N, z, s) from its Fourier expansion at infinity:

    Lambda(s) y^s + phi(N) pi^{1/2-s} Gamma(s-1/2) zeta(2s-1) y^{1-s}
        + 4 sqrt(y) sum_k c_k(s) K_{s-1/2}(2 pi k y) cos(2 pi k x)
    """
    z = complex(z)
    x, y = z.real, z.imag
    if y <= 0:
        raise ValueError("z must lie in the upper half plane")
    if s == 1:
        raise ValueError("calE(N, z, s) has a pole at s = 1")
    const = (eisenstein_normalizer(level, s) * y ** s
             + level.phi * _num(mpmath.power(pi, 0.5 - s) * mpmath.gamma(s - 0.5)
                                * mpmath.zeta(2 * s - 1)) * y ** (1 - s))
    kmax = ceil(log(1 / tol) / (2 * pi * y)) + 5
    k = np.arange(1, kmax + 1)
    coeffs = _fourier_coefficients(level, s, kmax)
    if isinstance(s, complex) and s.imag != 0:
        bessel = np.array([complex(mpmath.besselk(s - 0.5, 2 * pi * kk * y)) for kk in k])
    else:
        bessel = sp.kv(float(np.real(s)) - 0.5, 2 * pi * k * y)
    series = 4 * sqrt(y) * np.sum(coeffs * bessel * np.cos(2 * pi * k * x))
    tail = 4 * sqrt(y) * abs(coeffs[-1]) * exp(-2 * pi * (kmax + 1) * y)
    return EisensteinValue(value=_num(const + series), tail_bound=tail, terms=kmax)


def eisenstein_normalized(level: Level, z: complex, s: Number, method: str = 'fourier',
                          tol: float = 1e-12) -> EisensteinValue:
    if method == 'fourier':
        return eisenstein_fourier(level, z, s, tol)
    if method == 'direct':
        raw = eisenstein_scalar(level, z, s, tol)
        lam = eisenstein_normalizer(level, s)
        return EisensteinValue(value=_num(lam * raw.value), tail_bound=abs(lam) * raw.tail_bound,
                               terms=raw.terms)
    raise ValueError(f"unknown method {method!r}; expected 'fourier' or 'direct'")


# -- Kronecker limit formula ---------------------------------------------------

def kronecker_coefficient(level: Level, k: int, y: float) -> float:
    """a_k(z, 1) = e^{-2 pi k y} / k * sum_{n | k} n C_N(n); a_{-k} = a_k."""
    k = abs(k)
    return exp(-2 * pi * k * y) / k * sum(n * ramanujan_sum(level.N, n) for n in divisors(k))


def kronecker_limit_lhs(level: Level, z: complex, tol: float = 1e-15) -> float:
    """lim_{s->1} (calE(N, z, s) - phi(N) zeta*(2s - 1)) from the constant term and a_k(z, 1)."""
    z = complex(z)
    x, y = z.real, z.imag
    const = level.phi * (-log(y) / 2 + pi * y * level.index / 6)
    kmax = ceil(log(1 / tol) / (2 * pi * y)) + 2
    series = sum(2 * kronecker_coefficient(level, k, y) * cos(2 * pi * k * x) for k in range(1, kmax + 1))
    return const + series


def kronecker_limit_numeric(level: Level, z: complex, eps: float = 1e-4) -> float:
    """The same limit from the Fourier expansion at s = 1 + eps, 1 + 2 eps (Richardson)."""
    def f(e):
        s = 1 + e
        return eisenstein_fourier(level, z, s).value - level.phi * zeta_star(2 * s - 1)
    return float(np.real(2 * f(eps) - f(2 * eps)))


def kronecker_limit_pair(level: Level, z: complex, cusp: str = 'infinity',
                         order: int = None, tol: float = 1e-12) -> KLFResult:
    """Both sides of the limit formula.

    infinity: lhs at z, rhs = -(1/12) log(y^{6 phi} |Delta_N(z)|);
    zero:     lhs at w_N z = -1/(Nz), rhs = -(1/12) log(y^{6 phi} |Delta_N^0(z)|).
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half plane")
    y = z.imag
    if cusp == 'infinity':
        lhs = kronecker_limit_lhs(level, z)
        val = delta_N_log_abs(level, z, order=order, tol=tol)
    elif cusp == 'zero':
        lhs = kronecker_limit_lhs(level, -1 / (level.N * z))
        growth = coefficient_growth(level.weight)
        constant, series = delta_N_zero(level, order or required_order(1, y, tol, growth))
        val = eval_at(series, z, tol=tol, constant=constant, growth=growth)
    else:
        raise ValueError(f"unknown cusp {cusp!r}; expected 'infinity' or 'zero'")
    rhs = -(6 * level.phi * log(y) + val.log_abs) / 12
    return KLFResult(N=level.N, x=z.real, y=y, cusp=cusp, lhs=lhs, rhs=rhs,
                     residual=abs(lhs - rhs), tail_bound=tol)


# -- Scattering constants ------------------------------------------------------

ZETA1 = sympy.Symbol('zeta1')  # zeta'(-1)


@dataclass
class ScatteringLaurent:
    residue: float
    constant: float


def scattering_phi(level: Level, s):
    """phi(N) sqrt(pi) Gamma(s - 1/2) zeta(2s - 1) / (N^{2s} Gamma(s) zeta^(N)(2s))."""
    val = (level.phi * mpmath.sqrt(mpmath.pi) * mpmath.gamma(s - 0.5) * mpmath.zeta(2 * s - 1)
           / (mpmath.power(level.N, 2 * s) * mpmath.gamma(s) * mpmath.zeta(2 * s)))
    for p in level.primes:
        val /= 1 - mpmath.power(p, -2 * s)
    return val


def scattering_phi_zero(level: Level, s):
    """The (infinity, 0) entry: prod_p (p^s - p^{1-s}) / (p^{2s} - 1) times the level-one function."""
    val = (mpmath.sqrt(mpmath.pi) * mpmath.gamma(s - 0.5) * mpmath.zeta(2 * s - 1)
           / (mpmath.gamma(s) * mpmath.zeta(2 * s)))
    for p in level.primes:
        val *= (mpmath.power(p, s) - mpmath.power(p, 1 - s)) / (mpmath.power(p, 2 * s) - 1)
    return val


def scattering_laurent_symbolic(level: Level):
    """(C_-1, C_0) as sympy expressions in pi, log p and zeta1 = zeta'(-1)."""
    r = sympy.Integer(level.index)
    residue = 3 / (sympy.pi * r)
    bracket = sympy.log(4 * sympy.pi) - 1 + 12 * ZETA1
    for p in level.primes:
        bracket += sympy.Rational(p * p, p * p - 1) * sympy.log(p)
    return residue, -6 / (sympy.pi * r) * bracket


def scattering_laurent_zero_symbolic(level: Level):
    residue, constant = scattering_laurent_symbolic(level)
    plus = sympy.prod([sympy.Integer(p + 1) for p in level.primes])
    minus = sympy.prod([sympy.Integer(p * p - 1) for p in level.primes])
    for p in level.primes:
        phi_rest = sympy.totient(level.N // p)
        constant += (3 / (sympy.pi * plus) + 6 * phi_rest / (sympy.pi * minus)) * sympy.log(p)
    return residue, constant


def _evaluate(expr) -> float:
    return float(expr.subs(ZETA1, ZETA_PRIME_MINUS1).evalf(30))


def scattering_laurent(level: Level) -> ScatteringLaurent:
    residue, constant = scattering_laurent_symbolic(level)
    return ScatteringLaurent(residue=_evaluate(residue), constant=_evaluate(constant))


def scattering_laurent_zero(level: Level) -> ScatteringLaurent:
    residue, constant = scattering_laurent_zero_symbolic(level)
    return ScatteringLaurent(residue=_evaluate(residue), constant=_evaluate(constant))


def scattering_laurent_numeric(level: Level, column: str = 'infinity', eps: float = 1e-4) -> ScatteringLaurent:
    """Laurent data of the scattering function from R(e) = e Phi(1 + e) at e = +-eps."""
    fn = {'infinity': scattering_phi, 'zero': scattering_phi_zero}.get(column)
    if fn is None:
        raise ValueError(f"unknown column {column!r}; expected 'infinity' or 'zero'")
    with mpmath.workdps(30):
        e = mpmath.mpf(eps)
        plus, minus = e * fn(level, 1 + e), -e * fn(level, 1 - e)
        return ScatteringLaurent(residue=float((plus + minus) / 2), constant=float((plus - minus) / (2 * e)))
