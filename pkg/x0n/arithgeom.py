"""
arithgeom.py

Formal arithmetic divisors on the integral model of X0(N), N square-free.

A divisor is a finite combination of the components

    P_M        cusp section P_{1/M}, M | N (P_N is infinity, P_1 is zero)
    Xinf_p     fibre component at p through infinity
    X0_p       fibre component at p through zero
    omega      the metrized Hodge bundle
    Z(n,r)     the Heegner divisor Z(n, mu_r) with Kudla's Green function
    a1         a(1) = (0, 1)
    alog(v)    a(log(v/N)) = (0, log(v/N))

with exact sympy coefficients. The pairing is a closed table: pairs the table
does not determine raise UndeterminedPairingError.

Usage:
    from x0n.arithgeom import Hodge, ArithDivisor, pair
    pair(Level.of(1), ArithDivisor.of(Level.of(1), Hodge()), ArithDivisor.of(Level.of(1), Hodge()))
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Dict, List, Optional, Union

import sympy

from x0n.analytic import ZETA1, ZETA_PRIME_MINUS1, beta_s
from x0n.errors import CongruenceError, UndeterminedPairingError
from x0n.lattice import cusp_signs, discriminant, heegner_degree
from x0n.models import DegreeRow, PairingEntry, PairingValue
from x0n.numtheory import Level
from x0n.qexp import PETERSSON_C

logger = logging.getLogger(__name__)

C = sympy.Symbol('C')      # (log 4 pi + gamma)/2
BETA = sympy.Function('beta')  # beta(s, x) = int_1^inf e^{-xt} t^{-s} dt


# -- Components ----------------------------------------------------------------

@dataclass(frozen=True)
class CuspSection:
    M: int

    @property
    def label(self) -> str:
        return f"P_{self.M}"


@dataclass(frozen=True)
class VertInf:
    p: int

    @property
    def label(self) -> str:
        return f"Xinf_{self.p}"


@dataclass(frozen=True)
class VertZero:
    p: int

    @property
    def label(self) -> str:
        return f"X0_{self.p}"


@dataclass(frozen=True)
class Hodge:
    @property
    def label(self) -> str:
        return "omega"


@dataclass(frozen=True)
class Horizontal:
    n: Fraction
    r: int

    @property
    def label(self) -> str:
        return f"Z({self.n},{self.r})"


@dataclass(frozen=True)
class Const:
    @property
    def label(self) -> str:
        return "a1"


@dataclass(frozen=True)
class LogVN:
    v: sympy.Rational

    @property
    def label(self) -> str:
        return f"alog({self.v})"


Component = Union[CuspSection, VertInf, VertZero, Hodge, Horizontal, Const, LogVN]


def _exact(x) -> sympy.Expr:
    """Exact sympy number; floats are read through their decimal repr."""
    if isinstance(x, sympy.Basic):
        return x
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    if isinstance(x, float):
        return sympy.Rational(repr(x))
    return sympy.sympify(x)


def _tidy(expr) -> sympy.Expr:
    return sympy.expand(sympy.expand_log(sympy.sympify(expr), force=True))


def horizontal(level: Level, n, r: int) -> Horizontal:
    """Z(n, mu_r) = Z(n, mu_-r); r is stored as min(r, -r mod 2N)."""
    n = Fraction(n)
    N = level.N
    r = r % (2 * N)
    discriminant(level, r, n)
    if n <= 0:
        raise ValueError(f"Z(n, mu) is a horizontal divisor only for n > 0, got n={n}")
    return Horizontal(n=n, r=min(r, (-r) % (2 * N)))


# -- Divisors ------------------------------------------------------------------

@dataclass
class ArithDivisor:
    level: Level
    coefficients: Dict[Component, sympy.Expr] = field(default_factory=dict)

    def __post_init__(self):
        tidy = {c: _tidy(k) for c, k in self.coefficients.items()}
        self.coefficients = {c: k for c, k in tidy.items() if k != 0}
        for comp in self.coefficients:
            self._check(comp)

    def _check(self, comp: Component):
        N = self.level.N
        if isinstance(comp, CuspSection) and N % comp.M:
            raise CongruenceError(f"cusp 1/{comp.M} needs M | N={N}")
        if isinstance(comp, (VertInf, VertZero)) and comp.p not in self.level.primes:
            raise CongruenceError(f"fibre at p={comp.p} needs p | N={N}")

    @classmethod
    def of(cls, level: Level, comp: Component, coefficient=1) -> "ArithDivisor":
        return cls(level, {comp: _exact(coefficient)})

    @classmethod
    def zero(cls, level: Level) -> "ArithDivisor":
        return cls(level, {})

    def _same_level(self, other: "ArithDivisor"):
        if other.level != self.level:
            raise ValueError(f"divisors live on different levels: {self.level} and {other.level}")

    def __add__(self, other: "ArithDivisor") -> "ArithDivisor":
        self._same_level(other)
        out = dict(self.coefficients)
        for comp, k in other.coefficients.items():
            out[comp] = out.get(comp, 0) + k
        return ArithDivisor(self.level, out)

    def __neg__(self) -> "ArithDivisor":
        return ArithDivisor(self.level, {c: -k for c, k in self.coefficients.items()})

    def __sub__(self, other: "ArithDivisor") -> "ArithDivisor":
        return self + (-other)

    def __rmul__(self, scalar) -> "ArithDivisor":
        s = _exact(scalar)
        return ArithDivisor(self.level, {c: s * k for c, k in self.coefficients.items()})

    def coefficient(self, comp: Component) -> sympy.Expr:
        return self.coefficients.get(comp, sympy.Integer(0))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def vertical(self) -> "ArithDivisor":
        return ArithDivisor(self.level, {c: k for c, k in self.coefficients.items()
                                         if isinstance(c, (VertInf, VertZero))})

    def to_dict(self) -> Dict[str, str]:
        return {c.label: str(k) for c, k in sorted(self.coefficients.items(), key=lambda t: t[0].label)}


def divisor_of_delta_N(level: Level) -> ArithDivisor:
    """Div Delta_N = (rk/12) P_inf - k sum_p p/(p-1) X0_p."""
    r, k = level.index, level.weight
    coeffs = {CuspSection(level.N): sympy.Rational(r * k, 12)}
    for p in level.primes:
        coeffs[VertZero(p)] = -k * sympy.Rational(p, p - 1)
    return ArithDivisor(level, coeffs)


def divisor_of_delta_N_zero(level: Level) -> ArithDivisor:
    """Div Delta_N^0 = (rk/12) P_0 - (k/2) sum (p+1)/(p-1) Xinf_p - (k/2) sum X0_p."""
    r, k = level.index, level.weight
    coeffs = {CuspSection(1): sympy.Rational(r * k, 12)}
    for p in level.primes:
        coeffs[VertInf(p)] = -sympy.Rational(k, 2) * sympy.Rational(p + 1, p - 1)
        coeffs[VertZero(p)] = -sympy.Rational(k, 2)
    return ArithDivisor(level, coeffs)


def delta_hat(level: Level) -> ArithDivisor:
    """The class of (rk/12 P_inf, -log||Delta_N||^2): k omega + k sum p/(p-1) X0_p."""
    k = level.weight
    out = ArithDivisor.of(level, Hodge(), k)
    for p in level.primes:
        out = out + ArithDivisor.of(level, VertZero(p), k * sympy.Rational(p, p - 1))
    return out


def involution(level: Level, A: ArithDivisor) -> ArithDivisor:
    """w_N^* on classes: P_M <-> P_{N/M}, Xinf_p <-> X0_p, omega -> omega + (1/2) sum (X0_p - Xinf_p)."""
    out = ArithDivisor.zero(level)
    for comp, k in A.coefficients.items():
        if isinstance(comp, CuspSection):
            image = ArithDivisor.of(level, CuspSection(level.N // comp.M), k)
        elif isinstance(comp, VertInf):
            image = ArithDivisor.of(level, VertZero(comp.p), k)
        elif isinstance(comp, VertZero):
            image = ArithDivisor.of(level, VertInf(comp.p), k)
        elif isinstance(comp, Hodge):
            image = ArithDivisor.of(level, comp, k)
            for p in level.primes:
                image = (image + ArithDivisor.of(level, VertZero(p), k / 2)
                         - ArithDivisor.of(level, VertInf(p), k / 2))
        else:
            image = ArithDivisor.of(level, comp, k)
        out = out + image
    return out


# -- Pairing table -------------------------------------------------------------

def _degree_of(level: Level, comp: Component) -> sympy.Expr:
    if isinstance(comp, CuspSection):
        return sympy.Integer(1)
    if isinstance(comp, Hodge):
        return sympy.Rational(level.index, 12)
    if isinstance(comp, Horizontal):
        return _exact(heegner_degree(level, comp.r, comp.n))
    return sympy.Integer(0)


def vertical_constant(level: Level, p: int) -> sympy.Expr:
    """<Xinf_p, X0_p> = r(p-1)/(12(p+1)) log p."""
    return sympy.Rational(level.index * (p - 1), 12 * (p + 1)) * sympy.log(p)


def _basic(level: Level, A: Component, B: Component) -> sympy.Expr:
    for X, Y in ((A, B), (B, A)):
        if isinstance(X, Const):
            return _degree_of(level, Y) / 2
        if isinstance(X, LogVN):
            return sympy.log(X.v / level.N) * _degree_of(level, Y) / 2
    for X, Y in ((A, B), (B, A)):
        if isinstance(X, (VertInf, VertZero)):
            p = X.p
            if isinstance(Y, (VertInf, VertZero)):
                if Y.p != p:
                    return sympy.Integer(0)
                sign = -1 if type(X) is type(Y) else 1
                return sign * vertical_constant(level, p)
            if isinstance(Y, CuspSection):
                on_inf = Y.M % p == 0
                return sympy.log(p) if on_inf == isinstance(X, VertInf) else sympy.Integer(0)
            if isinstance(Y, Hodge):
                num = p if isinstance(X, VertZero) else 1
                return sympy.Rational(level.index * num, 12 * (p + 1)) * sympy.log(p)
            if isinstance(Y, Horizontal):
                return _degree_of(level, Y) / 2 * sympy.log(p)
    if isinstance(A, Hodge) and isinstance(B, Hodge):
        r = level.index
        return r * (sympy.Rational(-1, 24) + ZETA1) + sympy.Rational(r, 12) * C
    if isinstance(A, CuspSection) and isinstance(B, CuspSection) and A.M != B.M:
        return sympy.Integer(0)
    raise UndeterminedPairingError(f"<{A.label}, {B.label}> is not determined by the intersection table")


def pair(level: Level, A: ArithDivisor, B: ArithDivisor) -> sympy.Expr:
    """Bilinear extension of the table to divisors."""
    total = sympy.Integer(0)
    for a, x in A.coefficients.items():
        for b, y in B.coefficients.items():
            total += x * y * _basic(level, a, b)
    return _tidy(total)


def degree(level: Level, A: ArithDivisor) -> sympy.Expr:
    """deg(Z, g) = <(Z, g), a(2)>."""
    return pair(level, A, ArithDivisor.of(level, Const(), 2))


def self_intersection_delta(level: Level) -> sympy.Expr:
    """<Delta_N hat, Delta_N hat> through the table."""
    return pair(level, delta_hat(level), delta_hat(level))


def self_intersection_delta_closed(level: Level) -> sympy.Expr:
    """k^2 r (zeta(-1)/2 + zeta'(-1)) + k^2 r C/12 + (k^2 r/12) sum p^2/(p^2-1) log p."""
    r, k = level.index, level.weight
    val = k * k * r * (sympy.Rational(-1, 24) + ZETA1) + sympy.Rational(k * k * r, 12) * C
    for p in level.primes:
        val += sympy.Rational(k * k * r, 12) * sympy.Rational(p * p, p * p - 1) * sympy.log(p)
    return _tidy(val)


def basis(level: Level) -> List[Component]:
    comps: List[Component] = [CuspSection(M) for M in level.divisors]
    for p in level.primes:
        comps += [VertInf(p), VertZero(p)]
    return comps + [Hodge(), Const()]


def pairing_table(level: Level) -> List[PairingEntry]:
    """Every determined pair of basis components, each unordered pair once."""
    comps = basis(level)
    entries = []
    for i, A in enumerate(comps):
        for B in comps[i:]:
            try:
                value = _basic(level, A, B)
            except UndeterminedPairingError:
                continue
            entries.append(PairingEntry(pair=[A.label, B.label], value=render(level, value)))
    return entries


# -- Numeric rendering ---------------------------------------------------------

def numeric(expr) -> float:
    expr = sympy.sympify(expr).replace(
        BETA, lambda s, x: sympy.Float(beta_s(float(x), float(s)), 30))
    return float(expr.subs({ZETA1: ZETA_PRIME_MINUS1, C: PETERSSON_C}).evalf(30))


def render(level: Level, expr) -> PairingValue:
    """Split an expression over the atoms log p (p | N), zeta'(-1) and C."""
    expr = _tidy(expr)
    logs = {p: sympy.log(p) for p in level.primes}
    atoms = list(logs.values()) + [ZETA1, C]
    rest = expr.subs({a: 0 for a in atoms})
    leftover = _tidy(expr - rest - sum(expr.coeff(a) * a for a in atoms))
    return PairingValue(
        rational=str(rest),
        logp_terms={str(p): str(expr.coeff(a)) for p, a in logs.items() if expr.coeff(a) != 0},
        zeta_prime_coeff=str(expr.coeff(ZETA1)),
        C_coeff=str(expr.coeff(C)),
        other=str(leftover) if leftover != 0 else None,
        numeric=numeric(expr),
    )


# -- Kudla divisors ------------------------------------------------------------

def _is_square(D: int) -> bool:
    return D >= 0 and isqrt(D) ** 2 == D


def cusp_coefficient(level: Level, r: int, n, v, M: Optional[int] = None) -> sympy.Expr:
    """g(n, mu, v) at the cusp 1/M as an exact expression (zero unless D >= 0 is a square)."""
    n = Fraction(n)
    N = level.N
    r = r % (2 * N)
    D = discriminant(level, r, n)
    v = _exact(v)
    if not _is_square(D):
        return sympy.Integer(0)
    if D == 0:
        return sympy.sqrt(N) / (2 * sympy.pi * sympy.sqrt(v)) if r == 0 else sympy.Integer(0)
    factor = cusp_signs(level, r, isqrt(D), N if M is None else M)
    return factor * sympy.sqrt(N) / (4 * sympy.pi * sympy.sqrt(v)) * BETA(sympy.Rational(3, 2), -4 * _exact(n) * v * sympy.pi)


def assemble_Z_hat(level: Level, r: int, n, v) -> ArithDivisor:
    """Z hat(n, mu_r, v):

    n > 0:            Z(n, r)
    D >= 0 square:    sum_M g_M(n, mu, v) P_M, minus 2 omega + sum X0_p + a(log(v/N)) when n = 0, mu = 0
    otherwise:        0 (the Green function alone)
    """
    n = Fraction(n)
    N = level.N
    r = r % (2 * N)
    discriminant(level, r, n)
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if n > 0:
        return ArithDivisor.of(level, horizontal(level, n, r))
    out = ArithDivisor(level, {CuspSection(M): cusp_coefficient(level, r, n, v, M) for M in level.divisors})
    if n == 0 and r == 0:
        out = out - ArithDivisor.of(level, Hodge(), 2)
        for p in level.primes:
            out = out - ArithDivisor.of(level, VertZero(p))
        out = out - ArithDivisor.of(level, LogVN(_exact(v)))
    return out


def _rows(level: Level, n_max):
    """(n, r) with |n| <= n_max, n = Q(mu_r) mod 1, r in 0..2N-1."""
    N = level.N
    bound = int(Fraction(n_max) * 4 * N)
    for m in range(-bound, bound + 1):
        n = Fraction(m, 4 * N)
        for r in range(2 * N):
            if (-4 * N * n - r * r) % (4 * N) == 0:
                yield n, r


def _kind(level: Level, n: Fraction, r: int) -> str:
    D = int(-4 * level.N * n)
    if n > 0:
        return 'heegner'
    if n == 0 and r == 0:
        return 'constant'
    if D > 0 and _is_square(D):
        return 'cusp'
    return 'zero'


def _degree_string(value: sympy.Expr) -> str:
    if value.is_Rational:
        return str(value)
    return repr(numeric(value))


def degree_series(level: Level, v, n_max) -> List[DegreeRow]:
    """deg Z hat(n, mu_r, v) for |n| <= n_max: the coefficients of deg phi hat(tau)."""
    rows = []
    for n, r in _rows(level, n_max):
        value = degree(level, assemble_Z_hat(level, r, n, v))
        rows.append(DegreeRow(n=str(n), r=r, D=int(-4 * level.N * n), degree=_degree_string(value),
                              kind=_kind(level, n, r)))
    logger.debug("degree_series N=%d n_max=%s: %d rows", level.N, n_max, len(rows))
    return rows


@dataclass
class VerticalIdentityRow:
    n: Fraction
    r: int
    pairing_zero: sympy.Expr
    pairing_inf: sympy.Expr
    half_degree_log_p: sympy.Expr

    @property
    def holds(self) -> bool:
        return (_tidy(self.pairing_zero - self.half_degree_log_p) == 0
                and _tidy(self.pairing_inf - self.half_degree_log_p) == 0)


@dataclass
class VerticalIdentityReport:
    N: int
    p: int
    rows: List[VerticalIdentityRow]

    @property
    def holds(self) -> bool:
        return all(row.holds for row in self.rows)


def vertical_pairing_identity(level: Level, p: int, v, n_max) -> VerticalIdentityReport:
    """<Z hat, X0_p> = <Z hat, Xinf_p> = (1/2) deg Z hat log p, row by row."""
    if p not in level.primes:
        raise CongruenceError(f"p={p} does not divide N={level.N}")
    X0 = ArithDivisor.of(level, VertZero(p))
    Xinf = ArithDivisor.of(level, VertInf(p))
    rows = []
    for n, r in _rows(level, n_max):
        Z = assemble_Z_hat(level, r, n, v)
        rows.append(VerticalIdentityRow(
            n=n, r=r,
            pairing_zero=pair(level, Z, X0),
            pairing_inf=pair(level, Z, Xinf),
            half_degree_log_p=_tidy(degree(level, Z) / 2 * sympy.log(p)),
        ))
    return VerticalIdentityReport(N=level.N, p=p, rows=rows)


# -- Parsing -------------------------------------------------------------------

_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?"
    r"(omega|a1|alog\(([\d./]+)\)|Pinf|P0|P_(\d+)|Xinf_(\d+)|X0_(\d+)|Z\(\s*(-?[\d/]+)\s*,\s*(\d+)\s*\))\s*"
)


def parse_divisor(level: Level, text: str) -> ArithDivisor:
    """Read sums like "2*omega - X0_2 + 1/2 Pinf + Z(3/4,1)" over the component labels."""
    out = ArithDivisor.zero(level)
    pos, first = 0, True
    text = text.strip()
    if not text:
        raise ValueError("empty divisor expression")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or (not first and m.group(1) is None):
            raise ValueError(f"cannot parse divisor expression at {text[pos:]!r}")
        sign = -1 if m.group(1) == '-' else 1
        coef = sign * sympy.Rational(m.group(2) or 1)
        name = m.group(3)
        if name == 'omega':
            comp = Hodge()
        elif name == 'a1':
            comp = Const()
        elif name.startswith('alog'):
            comp = LogVN(sympy.Rational(m.group(4)))
        elif name == 'Pinf':
            comp = CuspSection(level.N)
        elif name == 'P0':
            comp = CuspSection(1)
        elif m.group(5):
            comp = CuspSection(int(m.group(5)))
        elif m.group(6):
            comp = VertInf(int(m.group(6)))
        elif m.group(7):
            comp = VertZero(int(m.group(7)))
        else:
            comp = horizontal(level, Fraction(m.group(8)), int(m.group(9)))
        out = out + ArithDivisor.of(level, comp, coef)
        pos, first = m.end(), False
    return out
