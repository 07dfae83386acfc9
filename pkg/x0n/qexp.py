"""
qexp.py

Exact q-expansions with rational exponents and the generalized Delta
functions Delta_N, Delta_N^0 together with their Atkin-Lehner transforms.

Series coefficients are Python ints / Fractions held in numpy object arrays,
so products go through np.convolve without losing exactness.

Usage:
    from x0n.qexp import delta_N
    d = delta_N(Level.of(2), order=20)
    d.series.lead    # Fraction(3, 1)
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd, log, pi
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np

from x0n.errors import CongruenceError, ConsistencyError, PrecisionError
from x0n.models import SeriesDump
from x0n.numtheory import Level, delta_exponents, euler_phi, ramanujan_sum

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
# C = (log 4pi + gamma) / 2, the Petersson normalization constant
PETERSSON_C = (log(4 * pi) + EULER_GAMMA) / 2


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _frac_gcd(*values: Fraction) -> Fraction:
    out = Fraction(0)
    for v in values:
        v = abs(_frac(v))
        if v == 0:
            continue
        if out == 0:
            out = v
            continue
        den = out.denominator * v.denominator // gcd(out.denominator, v.denominator)
        out = Fraction(gcd(out.numerator * (den // out.denominator),
                           v.numerator * (den // v.denominator)), den)
    return out


def _tidy(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


def _zeros(n: int) -> np.ndarray:
    arr = np.empty(n, dtype=object)
    arr[:] = 0
    return arr


# -- PowerSeries ---------------------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """q^lead * sum_j coeffs[j] q^(j*step); every stored coefficient is valid."""
    lead: Fraction
    step: Fraction
    coeffs: Tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'lead', _frac(self.lead))
        object.__setattr__(self, 'step', _frac(self.step))
        object.__setattr__(self, 'coeffs', tuple(_tidy(c) for c in self.coeffs))
        if self.step <= 0:
            raise ValueError("step must be positive")

    # -- construction ----------------------------------------------------------

    @classmethod
    def constant(cls, value, order: int, step=1) -> "PowerSeries":
        return cls(Fraction(0), _frac(step), (value,) + (0,) * (order - 1))

    @classmethod
    def from_array(cls, lead, step, arr: Iterable) -> "PowerSeries":
        return cls(_frac(lead), _frac(step), tuple(arr)).normalized()

    # -- basic attributes ------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def precision(self) -> Fraction:
        """First exponent whose coefficient is not known."""
        return self.lead + self.order * self.step

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def exponents(self):
        return [self.lead + j * self.step for j in range(self.order)]

    def coefficient(self, exponent) -> object:
        exponent = _frac(exponent)
        if exponent >= self.precision:
            raise PrecisionError(f"exponent {exponent} is beyond precision {self.precision}")
        k = (exponent - self.lead) / self.step
        if exponent < self.lead or k.denominator != 1:
            return 0
        return self.coeffs[int(k)]

    def normalized(self) -> "PowerSeries":
        k = 0
        while k < self.order and self.coeffs[k] == 0:
            k += 1
        if k == 0 or k == self.order:
            return self
        return PowerSeries(self.lead + k * self.step, self.step, self.coeffs[k:])

    def _expand(self, step: Fraction, length: int, offset: int = 0) -> np.ndarray:
        m = self.step / step
        if m.denominator != 1:
            raise ValueError(f"step {self.step} is not a multiple of {step}")
        arr = _zeros(length)
        coeffs = np.array(self.coeffs, dtype=object)
        positions = offset + int(m) * np.arange(self.order)
        keep = positions < length
        arr[positions[keep]] = coeffs[keep]
        return arr

    # -- ring operations -------------------------------------------------------

    def __neg__(self):
        return PowerSeries(self.lead, self.step, tuple(-c for c in self.coeffs))

    def _coerce(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return other
        if self.precision <= 0:
            return PowerSeries(Fraction(0), self.step, ())
        return PowerSeries.constant(other, ceil(self.precision / self.step), self.step)

    def __add__(self, other):
        other = self._coerce(other)
        step = _frac_gcd(self.step, other.step, self.lead - other.lead)
        lead = min(self.lead, other.lead)
        prec = min(self.precision, other.precision)
        n = int((prec - lead) / step) if prec > lead else 0
        a = self._expand(step, n, int((self.lead - lead) / step))
        b = other._expand(step, n, int((other.lead - lead) / step))
        return PowerSeries.from_array(lead, step, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries(self.lead, self.step, tuple(c * other for c in self.coeffs))
        step = _frac_gcd(self.step, other.step)
        lead = self.lead + other.lead
        prec = min(self.lead + other.precision, other.lead + self.precision)
        n = int((prec - lead) / step)
        if n <= 0:
            return PowerSeries(lead, step, ())
        a = self._expand(step, min(n, int(self.order * self.step / step)))
        b = other._expand(step, min(n, int(other.order * other.step / step)))
        prod = np.convolve(a, b)[:n]
        return PowerSeries.from_array(lead, step, prod)

    __rmul__ = __mul__

    def inverse(self) -> "PowerSeries":
        f = self.normalized()
        if f.order == 0 or f.coeffs[0] == 0:
            raise ZeroDivisionError("series has no invertible leading coefficient")
        a = np.array(f.coeffs, dtype=object)
        a0 = a[0]
        b = _zeros(f.order)
        b[0] = Fraction(1, 1) / a0 if a0 not in (1, -1) else a0
        for k in range(1, f.order):
            acc = np.dot(a[1:k + 1], b[k - 1::-1])
            b[k] = -acc * b[0]
        return PowerSeries(-f.lead, f.step, tuple(b))

    def __pow__(self, e: int) -> "PowerSeries":
        if not isinstance(e, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        e = int(e)
        base = self.normalized()
        if e < 0:
            base, e = base.inverse(), -e
        result = PowerSeries.constant(1, base.order, base.step)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def substitute(self, t) -> "PowerSeries":
        """q -> q^t."""
        t = _frac(t)
        if t <= 0:
            raise ValueError("substitution exponent must be positive")
        return PowerSeries(self.lead * t, self.step * t, self.coeffs)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.lead, self.step, self.coeffs[:order])

    def same_as(self, other: "PowerSeries") -> bool:
        a, b = self.normalized(), other.normalized()
        return a.lead == b.lead and a.step == b.step and a.coeffs == b.coeffs

    def to_dump(self, constant=1) -> SeriesDump:
        return SeriesDump(
            lead=str(self.lead),
            step=str(self.step),
            order=self.order,
            coeffs=[str(c) for c in self.coeffs],
            constant=str(_frac(constant)),
        )


# -- Product engine ------------------------------------------------------------

def _binomial_row(e: int, kmax: int):
    """Coefficients of (1 - x)^e up to x^kmax; exact for negative e."""
    row = [1]
    for k in range(1, kmax + 1):
        row.append(row[-1] * (k - 1 - e) // k)
    return row


def product_with_exponents(e: Callable[[int], int], order: int, lead=0) -> PowerSeries:
    """q^lead * prod_{n>=1} (1 - q^n)^e(n), exact to `order` coefficients."""
    if order < 1:
        raise ValueError("order must be >= 1")
    arr = _zeros(order)
    arr[0] = 1
    for n in range(1, order):
        en = int(e(n))
        if en == 0:
            continue
        row = _binomial_row(en, (order - 1) // n)
        out = arr.copy()
        for k in range(1, len(row)):
            if row[k]:
                out[n * k:] = out[n * k:] + row[k] * arr[:order - n * k]
        arr = out
    return PowerSeries(_frac(lead), Fraction(1), tuple(arr))


def eta_product_delta(order: int) -> PowerSeries:
    """Delta = q prod (1 - q^n)^24."""
    return product_with_exponents(lambda n: 24, order, lead=1)


# -- Delta products ------------------------------------------------------------

@dataclass(frozen=True)
class DeltaProduct:
    """constant * prod_t Delta(t z)^{exponents[t]}."""
    constant: Fraction
    exponents: Tuple[Tuple[int, int], ...]

    @property
    def leading_exponent(self) -> int:
        return sum(t * e for t, e in self.exponents)

    @property
    def weight(self) -> int:
        return 12 * sum(e for _, e in self.exponents)

    def slash(self, Q: int) -> "DeltaProduct":
        """Weight-k action of an Atkin-Lehner matrix W_Q:
        Delta(tz)|W_Q = Q^6 gcd(t,Q)^-12 Delta((t/t0)(Q/t0) z) with t0 = gcd(t, Q)."""
        constant = self.constant
        exps: Dict[int, int] = {}
        for t, e in self.exponents:
            t0 = gcd(t, Q)
            constant *= (Fraction(Q ** 6, t0 ** 12)) ** e
            t_new = (t // t0) * (Q // t0)
            exps[t_new] = exps.get(t_new, 0) + e
        return DeltaProduct(constant, tuple(sorted((t, e) for t, e in exps.items() if e)))

    def series(self, order: int) -> PowerSeries:
        base = eta_product_delta(order)
        result = PowerSeries.constant(1, order)
        for t, e in self.exponents:
            result = result * (base.substitute(t) ** e)
        return result.normalized().truncate(order)


@dataclass
class DeltaN:
    level: Level
    series: PowerSeries
    weight: int
    exponents: Dict[int, int]


def delta_product(level: Level) -> DeltaProduct:
    exps = delta_exponents(level.N)
    return DeltaProduct(Fraction(1), tuple(sorted((t, e) for t, e in exps.items() if e)))


def delta_N_single(level: Level, order: int) -> PowerSeries:
    """q^{N phi(N) prod(1+1/p)} prod (1 - q^n)^{24 C_N(n)}."""
    return product_with_exponents(lambda n: 24 * ramanujan_sum(level.N, n), order,
                                  lead=level.delta_order)


def delta_N(level: Level, order: int) -> DeltaN:
    """Delta_N from the single product, checked against prod Delta(tz)^{a(t)}."""
    single = delta_N_single(level, order)
    factored = delta_product(level).series(order)
    if not all(isinstance(c, int) for c in factored.coeffs):
        raise ConsistencyError(f"non-integral coefficient in the factored Delta_{level.N}")
    if not single.same_as(factored):
        raise ConsistencyError(f"Delta_{level.N}: product formulas disagree to order {order}")
    logger.debug("Delta_%d agrees to order %d", level.N, order)
    return DeltaN(level=level, series=single, weight=level.weight,
                  exponents=dict(delta_exponents(level.N)))


def atkin_lehner_constant(level: Level, Q: int) -> Fraction:
    """Closed form C_Q = Q^{6 phi(N)} prod_{t0|Q} t0^{-12 phi(N/Q) a_Q(t0)}."""
    _check_exact_divisor(level, Q)
    out = Fraction(Q) ** (6 * level.phi)
    for t0, a in delta_exponents(Q).items():
        out *= Fraction(t0) ** (-12 * euler_phi(level.N // Q) * a)
    return out


def _check_exact_divisor(level: Level, Q: int):
    if Q < 1 or level.N % Q or gcd(Q, level.N // Q) != 1:
        raise CongruenceError(f"Q={Q} is not an exact divisor of N={level.N}")


def atkin_lehner(level: Level, Q: int, order: int) -> Tuple[Fraction, PowerSeries]:
    """Delta_N | W_Q = C_Q * series."""
    _check_exact_divisor(level, Q)
    transformed = delta_product(level).slash(Q)
    closed = atkin_lehner_constant(level, Q)
    if transformed.constant != closed:
        raise ConsistencyError(f"C_{Q} mismatch at N={level.N}: {transformed.constant} vs {closed}")
    for p in level.primes:
        if Q % p and _p_adic_order(transformed.constant, p) != 0:
            raise ConsistencyError(f"ord_{p}(C_{Q}) is not zero at N={level.N}")
    expected_lead = level.delta_order if Q == 1 else 0
    if transformed.leading_exponent != expected_lead:
        raise ConsistencyError(
            f"Delta_{level.N}|W_{Q} has leading exponent {transformed.leading_exponent}")
    return transformed.constant, transformed.series(order)


def delta_N_zero(level: Level, order: int) -> Tuple[Fraction, PowerSeries]:
    """Delta_N^0 = Delta_N | W_N = C_N prod Delta(tz)^{a(N/t)}."""
    return atkin_lehner(level, level.N, order)


def vanishing_order_at_zero(level: Level) -> int:
    """Order of Delta_N^0 at P_0, read off Delta_N^0 | W_N."""
    back = delta_product(level).slash(level.N).slash(level.N)
    if back.constant != 1:
        raise ConsistencyError(f"W_{level.N} is not an involution on Delta_{level.N}")
    return back.leading_exponent


def _p_adic_order(x: Fraction, p: int) -> int:
    x = _frac(x)
    if x == 0:
        raise ValueError("order of zero is undefined")
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def p_adic_order(x, p: int) -> int:
    return _p_adic_order(_frac(x), p)


# -- Numerical evaluation ------------------------------------------------------

@dataclass
class SeriesValue:
    # value underflows to 0 once 2 pi lead Im z passes ~745; log_abs stays exact
    value: complex
    log_abs: float
    tail_bound: float


def coefficient_growth(weight: int) -> float:
    """Exponent g with |a_n| <= C n^g for a holomorphic form of the given weight.

    Delta_N need not vanish at every cusp, so its Eisenstein part grows like
    sigma_{k-1}(n) <= zeta(k-1) n^{k-1}.
    """
    return float(weight)


def growth_tail(rho: float, order: int, growth: float, scale: float = 1.0) -> float:
    """Bound for sum_{m >= order} scale (m+1)^growth rho^m.

    Past the peak of the terms their ratio decreases, so the first term over
    1 - ratio bounds the rest. inf when order is still before the peak.
    """
    if scale == 0 or rho == 0:
        return 0.0
    ratio = ((order + 2) / (order + 1)) ** growth * rho
    if ratio >= 1:
        return float('inf')
    log_first = log(scale) + growth * log(order + 1) + order * log(rho)
    if log_first > 700:
        return float('inf')
    return float(np.exp(log_first)) / (1 - ratio)


def _relative_sum(series: PowerSeries, z: complex, growth: float) -> Tuple[complex, float]:
    y = z.imag
    qstep = np.exp(2j * pi * float(series.step) * z)
    rho = abs(qstep)
    if rho >= 1:
        raise PrecisionError("Im z must be positive")
    coeffs = np.array([float(c) for c in series.coeffs])
    powers = qstep ** np.arange(series.order)
    total = complex(np.sum(coeffs * powers))
    # smallest C with |a_m| <= C (m+1)^growth on the known coefficients
    sizes = np.abs(coeffs) / np.arange(1, series.order + 1, dtype=float) ** growth
    scale = float(np.max(sizes)) if series.order else 0.0
    tail = growth_tail(rho, series.order, growth, scale)
    logger.debug("series eval at y=%g: |q^step|=%g, C=%g, tail=%g", y, rho, scale, tail)
    return total, tail


def eval_at(series: PowerSeries, z: complex, tol: float = 1e-12, constant=1,
            growth: float = 12.0) -> SeriesValue:
    """Value of constant * series at z with a tail bound relative to q^lead.

    The tail assumes |a_n| <= C n^growth with C fitted on the known
    coefficients. For large leading exponents read log_abs, not value.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half plane")
    total, tail = _relative_sum(series, z, growth)
    scale = abs(total) if total != 0 else 1.0
    if tail > tol * max(1.0, scale):
        raise PrecisionError(
            f"order {series.order} too small at Im z={z.imag:g}: tail {tail:.3e} > tol {tol:.1e}")
    lead_factor = np.exp(2j * pi * float(series.lead) * z)
    c = float(_frac(constant))
    log_abs = (log(abs(c)) - 2 * pi * float(series.lead) * z.imag + log(abs(total))) \
        if total != 0 else float('-inf')
    return SeriesValue(value=c * lead_factor * total, log_abs=log_abs,
                       tail_bound=abs(c) * tail * abs(lead_factor))


def petersson_log_norm(series: PowerSeries, weight: int, z: complex,
                       constant=1, tol: float = 1e-12) -> float:
    """log ||f(z)|| = log|f(z)| + (k/2) log(4 pi e^{-C} y)."""
    val = eval_at(series, z, tol=tol, constant=constant, growth=coefficient_growth(weight))
    y = complex(z).imag
    return val.log_abs + 0.5 * weight * (log(4 * pi * y) - PETERSSON_C)


def eta_quotient_log_abs(level: Level, z: complex, terms: int = 400) -> float:
    """log|Delta_N(z)| straight from -2 pi y lead + 24 sum C_N(n) log|1 - q^n|."""
    z = complex(z)
    n = np.arange(1, terms + 1)
    q_n = np.exp(2j * pi * n * z)
    weights = np.array([ramanujan_sum(level.N, int(k)) for k in n], dtype=float)
    return -2 * pi * z.imag * level.delta_order + 24 * float(np.sum(weights * np.log(np.abs(1 - q_n))))


def series_rows(series: PowerSeries, constant=1) -> list:
    """(exponent, numerator, denominator) rows for CSV output."""
    c = _frac(constant)
    rows = []
    for exp, coeff in zip(series.exponents(), series.coeffs):
        value = c * _frac(coeff)
        rows.append({"exponent": str(exp), "numerator": value.numerator,
                     "denominator": value.denominator})
    return rows


def required_order(series_step, y: float, tol: float, growth: float = 12.0, scale: float = 1.0) -> int:
    """Smallest order, in steps of 8, whose growth_tail at Im z = y drops below tol."""
    rho = float(np.exp(-2 * pi * float(series_step) * y))
    n = 8
    while growth_tail(rho, n, growth, scale) > tol:
        n += 8
    return n


def delta_N_log_abs(level: Level, z: complex, order: Optional[int] = None,
                    tol: float = 1e-12) -> SeriesValue:
    """log|Delta_N(z)| through the exact expansion."""
    z = complex(z)
    growth = coefficient_growth(level.weight)
    if order is None:
        order = required_order(1, z.imag, tol, growth)
    series = delta_N_single(level, order)
    return eval_at(series, z, tol=tol, growth=growth)
