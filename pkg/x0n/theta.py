"""
theta.py

Lattice sums over L# for level N, all driven by the majorant of a point z:

    l(w) = (w, w(z)) = (sqrt(N)/y) (2x w1 + w2 - |z|^2 w3)
    maj(w) = l(w)^2 - 2Q(w) > 0,     R(w, z) = l(w)^2/2 - 2Q(w) >= 0

- Kudla-Millson theta function theta_mu(tau, z)
- Kudla Green function Xi(n, mu, v)(z) = sum_{Q(w) = n} beta_1(2 pi v R(w, z))
  and its behaviour at the cusps
- vector-valued Eisenstein series E_L(tau, s) of weight 3/2 for rho_L
- the theta lift I(tau, f) = int_{Gamma0(N)\\H} f(z) Theta_L(tau, z) dmu(z)

Usage:
    from x0n.theta import kudla_green, theta_lift_check
    kudla_green(Level.of(1), 0, 0, 1.0, 3j).value
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, exp, floor, gcd, isqrt, log, pi, sqrt
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import scipy.special as sp

from x0n.analytic import (beta_s, eisenstein_fourier, whittaker_t, zeta_N,
                          zeta_star)
from x0n.config import config
from x0n.errors import CongruenceError, DivergenceError, PrecisionError
from x0n.lattice import (LatticeVector, WeilRep, coset_representatives, cusp_signs,
                         discriminant, gamma_runs, gcdex, lift_sign)
from x0n.models import (CuspCheckResult, GreenResult, LiftResult, ResidualRow,
                        VectorEntry)
from x0n.numtheory import Level
from x0n.qexp import EULER_GAMMA

logger = logging.getLogger(__name__)

MAX_CUTOFF = 12.0  # highest truncation height tried for the fundamental domain


def _moebius(m, z: complex) -> complex:
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


# -- Majorant ------------------------------------------------------------------

@dataclass(frozen=True)
class MajorantContext:
    """Everything about z that the lattice sums need.

    w(z) = (1/(sqrt(N) y)) [[-x, |z|^2], [-1, x]] spans the positive line of z.
    """
    level: Level
    z: complex

    def __post_init__(self):
        if complex(self.z).imag <= 0:
            raise ValueError(f"z must lie in the upper half plane, got {self.z}")

    @property
    def x(self) -> float:
        return complex(self.z).real

    @property
    def y(self) -> float:
        return complex(self.z).imag

    @property
    def wz(self) -> np.ndarray:
        """Coordinates (w1, w2, w3) of w(z)."""
        x, y, N = self.x, self.y, self.level.N
        return np.array([-x, abs(self.z) ** 2, -1.0]) / (sqrt(N) * y)

    @property
    def direction(self) -> np.ndarray:
        """l(w) = direction . (w1, w2, w3)."""
        x, y, N = self.x, self.y, self.level.N
        return sqrt(N) / y * np.array([2 * x, 1.0, -abs(self.z) ** 2])

    def ell(self, w1, w2, w3):
        d = self.direction
        return d[0] * np.asarray(w1) + d[1] * np.asarray(w2) + d[2] * np.asarray(w3)

    def gram(self) -> np.ndarray:
        """maj(w) = w^T G w in the coordinates (w1, w2, w3)."""
        d = self.direction
        N = self.level.N
        return np.outer(d, d) + 2 * N * np.array([[1.0, 0, 0], [0, 0, 0.5], [0, 0.5, 0]])


def pairing_w_wz(w: LatticeVector, z: complex) -> float:
    """(w, w(z)) = -(sqrt(N)/y)(w3 |z|^2 - w1 (z + zbar) - w2)."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError(f"z must lie in the upper half plane, got {z}")
    w1, w2, w3 = float(w.w1), float(w.w2), float(w.w3)
    return -sqrt(w.N) / z.imag * (w3 * abs(z) ** 2 - 2 * w1 * z.real - w2)


def majorant_R(w: LatticeVector, z: complex) -> float:
    """R(w, z) = (w, w(z))^2 / 2 - (w, w)."""
    return pairing_w_wz(w, z) ** 2 / 2 - 2 * float(w.Q)


def majorant_R_polynomial(w: LatticeVector, z: complex) -> float:
    """R(w, z) = N |w3 z^2 - 2 w1 z - w2|^2 / (2 y^2); zero exactly at the CM point of w."""
    z = complex(z)
    p = float(w.w3) * z * z - 2 * float(w.w1) * z - float(w.w2)
    return w.N * abs(p) ** 2 / (2 * z.imag ** 2)


# -- Short vectors -------------------------------------------------------------

def short_vectors(gram: np.ndarray, bound: float, shift: Sequence[float] = (0.0, 0.0, 0.0)) -> np.ndarray:
    """All k in Z^3 with (k + shift)^T G (k + shift) <= bound, G positive definite.

    Fincke-Pohst over the last two coordinates, the first one vectorised.
    """
    G = np.asarray(gram, dtype=float)
    s1, s2, s3 = (float(t) for t in shift)
    if bound < 0:
        return np.zeros((0, 3), dtype=np.int64)
    q11 = G[0, 0]
    q12, q13 = G[0, 1] / q11, G[0, 2] / q11
    q22 = G[1, 1] - G[0, 1] ** 2 / q11
    q23 = (G[1, 2] - G[0, 1] * G[0, 2] / q11) / q22
    q33 = G[2, 2] - G[0, 2] ** 2 / q11 - q22 * q23 ** 2
    if min(q11, q22, q33) <= 0:
        raise ValueError("Gram matrix is not positive definite")
    slack = 1e-9 * (1 + bound)
    blocks = []
    r3 = sqrt((bound + slack) / q33)
    for k3 in range(ceil(-r3 - s3), floor(r3 - s3) + 1):
        y3 = k3 + s3
        rem3 = bound + slack - q33 * y3 * y3
        if rem3 < 0:
            continue
        c2, r2 = -q23 * y3, sqrt(rem3 / q22)
        for k2 in range(ceil(c2 - r2 - s2), floor(c2 + r2 - s2) + 1):
            y2 = k2 + s2
            rem2 = rem3 - q22 * (y2 + q23 * y3) ** 2
            if rem2 < 0:
                continue
            c1, r1 = -(q12 * y2 + q13 * y3), sqrt(rem2 / q11)
            lo, hi = ceil(c1 - r1 - s1), floor(c1 + r1 - s1)
            if hi < lo:
                continue
            k1 = np.arange(lo, hi + 1, dtype=np.int64)
            blocks.append(np.column_stack([k1, np.full_like(k1, k2), np.full_like(k1, k3)]))
    if not blocks:
        return np.zeros((0, 3), dtype=np.int64)
    k = np.vstack(blocks)
    t = k + np.array([s1, s2, s3])
    keep = np.einsum('ij,jk,ik->i', t, G, t) <= bound
    return k[keep]


def _coset_shell(ctx: MajorantContext, r: int, bound: float) -> np.ndarray:
    """Rows (b, a, c) of the vectors of L_{mu_r} with maj(w) <= bound."""
    N = ctx.level.N
    P = np.diag([1.0, -1.0 / N, 1.0])
    return short_vectors(P @ ctx.gram() @ P, bound, shift=(r / (2 * N), 0.0, 0.0))


def _dual_shell(ctx: MajorantContext, bound: float) -> np.ndarray:
    """Rows (k1, a, c) of the vectors w1 = k1/2N, w2 = -a/N, w3 = c of L# with maj(w) <= bound."""
    N = ctx.level.N
    P = np.diag([1.0 / (2 * N), -1.0 / N, 1.0])
    return short_vectors(P @ ctx.gram() @ P, bound)


# -- Kudla-Millson theta function ----------------------------------------------

@dataclass
class VectorValue:
    """A function value in C[L#/L], component mu at index mu."""
    values: np.ndarray
    err_bound: float
    terms: int = 0

    def entries(self) -> List[VectorEntry]:
        return [VectorEntry(mu=mu, re=float(v.real), im=float(v.imag), err_bound=self.err_bound)
                for mu, v in enumerate(self.values)]


def km_kernel(level: Level, r: int, w: LatticeVector, tau: complex, z: complex) -> complex:
    """Coefficient of dmu(z) in phi(sqrt(v) w, z) e(Q(w) u):

    (v l(w)^2 - 1/2pi) exp(-pi v maj(w)) e(Q(w) u)
    """
    if w.N != level.N or w.r != r % (2 * level.N):
        raise CongruenceError(f"{w} is not in L_mu_{r} for N={level.N}")
    tau = complex(tau)
    u, v = tau.real, tau.imag
    if v <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")
    ell = pairing_w_wz(w, z)
    Q = float(w.Q)
    return (v * ell ** 2 - 1 / (2 * pi)) * exp(-pi * v * (ell ** 2 - 2 * Q)) * np.exp(2j * pi * Q * u)


def _theta_bound(v: float, tol: float) -> float:
    return (log(1 / tol) + 10) / (pi * v)


def _theta_terms(ctx: MajorantContext, tau: complex, w1, w2, w3, Q) -> np.ndarray:
    u, v = tau.real, tau.imag
    ell = ctx.ell(w1, w2, w3)
    return (v * ell ** 2 - 1 / (2 * pi)) * np.exp(-pi * v * (ell ** 2 - 2 * Q)) * np.exp(2j * pi * Q * u)


def theta_mu(level: Level, r: int, tau: complex, z: complex, tol: float = 1e-12) -> complex:
    """theta_mu(tau, z) for one coset; the zero vector gives -1/2pi when mu = 0."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")
    ctx = MajorantContext(level, complex(z))
    N = level.N
    k = _coset_shell(ctx, r % (2 * N), _theta_bound(tau.imag, tol))
    b, a, c = k[:, 0], k[:, 1], k[:, 2]
    w1 = b + (r % (2 * N)) / (2 * N)
    Q = a * c - N * w1 * w1
    return complex(np.sum(_theta_terms(ctx, tau, w1, -a / N, c, Q)))


def theta_vector(level: Level, tau: complex, z: complex, tol: float = 1e-12) -> VectorValue:
    """Theta_L(tau, z) = sum_mu theta_mu(tau, z) e_mu in one pass over L#."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")
    ctx = MajorantContext(level, complex(z))
    N = level.N
    B = _theta_bound(tau.imag, tol)
    k = _dual_shell(ctx, B)
    k1, a, c = k[:, 0], k[:, 1], k[:, 2]
    w1 = k1 / (2 * N)
    Q = a * c - N * w1 * w1
    terms = _theta_terms(ctx, tau, w1, -a / N, c, Q)
    mu = k1 % (2 * N)
    values = (np.bincount(mu, weights=terms.real, minlength=2 * N)
              + 1j * np.bincount(mu, weights=terms.imag, minlength=2 * N))
    tail = (2 * tau.imag * B + 1) * exp(-pi * tau.imag * B) * (len(k) + 1)
    return VectorValue(values=values, err_bound=tail, terms=len(k))


# -- Kudla Green function ------------------------------------------------------

@dataclass
class GreenEval:
    N: int
    r: int
    n: Fraction
    v: float
    z: complex
    value: float
    tail_bound: float
    vectors: int

    def to_model(self) -> GreenResult:
        return GreenResult(N=self.N, r=self.r, n=str(self.n), v=self.v, x=self.z.real, y=self.z.imag,
                           value=self.value, tail_bound=self.tail_bound, vectors=self.vectors)


def kudla_green(level: Level, r: int, n, v: float, z: complex, tol: float = 1e-12) -> GreenEval:
    """Xi(n, mu_r, v)(z) = sum over w != 0 in L_mu[n] of beta_1(2 pi v R(w, z)).

    Terms with 2 pi v R > T are dropped; each is below e^-T/T.
    """
    n = Fraction(n)
    N = level.N
    r = r % (2 * N)
    D = discriminant(level, r, n)
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    ctx = MajorantContext(level, complex(z))
    T = log(1 / tol) + 5
    k = _coset_shell(ctx, r, 2 * (T / (2 * pi * v) + float(n)))
    b, a, c = k[:, 0], k[:, 1], k[:, 2]
    keep = (2 * N * b + r) ** 2 - 4 * N * a * c == D
    if D == 0 and r == 0:
        keep &= (a != 0) | (b != 0) | (c != 0)
    b, a, c = b[keep], a[keep], c[keep]
    w1 = b + r / (2 * N)
    R = ctx.ell(w1, -a / N, c) ** 2 / 2 - 2 * float(n)
    if len(R) and R.min() < 1e-12:
        j = int(np.argmin(R))
        w = LatticeVector(a=int(a[j]), b=int(b[j]), c=int(c[j]), N=N, r=r)
        raise DivergenceError(f"z={z} lies on Z({n}, mu_{r}): R(w, z) = {R[j]:.3g}", vector=w)
    arg = 2 * pi * v * R
    arg = arg[arg <= T]
    value = float(np.sum(sp.exp1(arg))) if len(arg) else 0.0
    tail = exp(-T) / T * (len(arg) + 1)
    logger.debug("kudla_green N=%d r=%d n=%s z=%s: %d vectors", N, r, n, z, len(arg))
    return GreenEval(N=N, r=r, n=n, v=v, z=complex(z), value=value, tail_bound=tail, vectors=len(arg))


# -- Cusp behaviour ------------------------------------------------------------

@dataclass
class CuspConstant:
    g: float
    applies: bool = True  # False when D < 0 or D is not a square


def green_cusp_constants(level: Level, r: int, n, v: float, M: Optional[int] = None) -> CuspConstant:
    """Coefficient g(n, mu, v) of -log|q|^2 in Xi near the cusp 1/M (default infinity).

    n = 0, mu = 0:    sqrt(N)/(2 pi sqrt(v)) at every cusp
    n = 0, mu != 0:   0
    D > 0 square:     eps_M sqrt(N)/(4 pi sqrt(v)) beta_{3/2}(-4 pi n v), eps_M the number of
                      signs with eps sqrt(D) = r mod 2M and = -r mod 2N/M (2 when 2 mu in L)
    """
    n = Fraction(n)
    N = level.N
    r = r % (2 * N)
    D = discriminant(level, r, n)
    if v <= 0:
        raise ValueError(f"v must be positive, got {v}")
    if D < 0 or not _is_square(D):
        return CuspConstant(g=0.0, applies=False)
    if D == 0:
        return CuspConstant(g=sqrt(N) / (2 * pi * sqrt(v)) if r == 0 else 0.0)
    M = N if M is None else M
    if N % M:
        raise CongruenceError(f"M={M} does not divide N={N}")
    factor = cusp_signs(level, r, isqrt(D), M)
    return CuspConstant(g=factor * sqrt(N) / (4 * pi * sqrt(v)) * beta_s(-4 * pi * float(n) * v, 1.5))


def _is_square(D: int) -> bool:
    return D >= 0 and isqrt(D) ** 2 == D


def _cusp_point(level: Level, M: int, y: float) -> complex:
    """sigma_M(kappa i y) with sigma_M = [[1, 0], [M, 1]], kappa = N/M; there |q_kappa|^2 = e^{-4 pi y}."""
    if M == level.N:
        return complex(0, y)
    return _moebius((1, 0, M, 1), complex(0, level.N // M * y))


def green_cusp_limit(level: Level, r: int, n, v: float) -> float:
    """Limit of the cusp residual: -2(log(sqrt(N)/(4 pi sqrt(v))) - f(0)/2) for n = 0, mu = 0, else 0."""
    n = Fraction(n)
    if n == 0 and r % (2 * level.N) == 0:
        f0 = EULER_GAMMA - log(4 * pi)
        return -2 * (log(sqrt(level.N) / (4 * pi * sqrt(v))) - f0 / 2)
    return 0.0


def cusp_asymptotic_residual(level: Level, r: int, n, v: float, y_grid: Sequence[float],
                             M: Optional[int] = None, tol: float = 1e-12) -> List[ResidualRow]:
    """Xi + g log|q|^2 (+ 2 log(-log|q|^2) when n = 0, mu = 0) along the cusp 1/M (default infinity)."""
    y_grid = list(y_grid)
    if not y_grid or min(y_grid) < 2 or any(b <= a for a, b in zip(y_grid, y_grid[1:])):
        raise ValueError("y_grid must be increasing with min >= 2")
    M = level.N if M is None else M
    if level.N % M:
        raise CongruenceError(f"M={M} does not divide N={level.N}")
    n = Fraction(n)
    g = green_cusp_constants(level, r, n, v, M).g
    loglog = n == 0 and r % (2 * level.N) == 0
    rows = []
    for y in y_grid:
        value = kudla_green(level, r, n, v, _cusp_point(level, M, y), tol=tol).value
        log_q2 = -4 * pi * y
        residual = value + g * log_q2 + (2 * log(-log_q2) if loglog else 0.0)
        rows.append(ResidualRow(y=y, value=value, residual=residual))
    return rows


def green_cusp_check(level: Level, r: int, n, v: float, y_grid: Sequence[float] = (4, 6, 8, 12),
                     M: Optional[int] = None, check_tol: float = 1e-4) -> CuspCheckResult:
    rows = cusp_asymptotic_residual(level, r, n, v, y_grid, M=M)
    limit = green_cusp_limit(level, r, n, v)
    gaps = [abs(row.residual - limit) for row in rows]
    trend = all(b <= a + check_tol for a, b in zip(gaps, gaps[1:]))
    if not trend:
        logger.warning("cusp residuals for N=%d r=%d n=%s are not monotone: %s", level.N, r, n, gaps)
    return CuspCheckResult(N=level.N, r=r, n=str(Fraction(n)), v=v, M=level.N if M is None else M,
                           g=green_cusp_constants(level, r, n, v, M).g, limit=limit, rows=rows,
                           converged=trend and gaps[-1] <= check_tol)


# -- Vector-valued Eisenstein series -------------------------------------------

def _check_s(s: float):
    if complex(s).real <= 1:
        raise ValueError(f"E_L(tau, s) needs Re(s) > 1, got {s}")


def _completed(c: int, d: int):
    """(a, b, c, d) in SL2(Z) with the given coprime bottom row."""
    x, y, _ = gcdex(d, c)
    return (x, -y, c, d)


def _rho_inverse_column(rho: WeilRep, gamma) -> np.ndarray:
    """sigma rho^-1(gamma') e_0, sigma = +-1 the lift relative to the principal root."""
    runs = gamma_runs(gamma)
    e0 = np.zeros(rho.dim, dtype=complex)
    e0[0] = 1
    return lift_sign(runs) * rho.apply_inverse(runs, e0)


def _whittaker_table(rho: WeilRep, tau: complex, s: float, tol: float):
    """Per mu: the frequencies xi in Q(mu) + Z and t_xi(v, alpha, beta) e(xi u)."""
    u, v = tau.real, tau.imag
    alpha, beta = (s + 2) / 2, (s - 1) / 2
    xi_max = log(1 / tol) / (2 * pi * v) + 2
    table = []
    for q in rho.q:
        m = np.arange(ceil(-xi_max - q), floor(xi_max - q) + 1)
        xi = m + q
        t = np.array([whittaker_t(float(x), v, alpha, beta) for x in xi]) * np.exp(2j * pi * xi * u)
        table.append((xi, t))
    return table


def vv_eisenstein(level: Level, tau: complex, s: float, coprime_bound: Optional[int] = None,
                  tol: float = 1e-10) -> VectorValue:
    """E_L(tau, s) = sum over Gamma'_inf \\ Gamma' of (v^{(s-1)/2} e_0)|_{3/2} gamma'.

    Every coprime (c, d) with 0 < c <= coprime_bound is summed, the d-sums exactly by
    Poisson summation; the c-tail is removed by extrapolation with exponent s - 1.
    """
    _check_s(s)
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")
    C = config['eisenstein_bound'] if coprime_bound is None else coprime_bound
    rho = WeilRep(level)
    v = tau.imag
    scale = v ** ((s - 1) / 2)
    identity = np.zeros(rho.dim, dtype=complex)
    identity[0] = 2 * scale
    if C < 1:
        return VectorValue(values=identity, err_bound=0.0, terms=1)

    table = _whittaker_table(rho, tau, s, tol)
    partial = np.zeros(rho.dim, dtype=complex)
    half = None
    for c in range(1, C + 1):
        d0 = [d for d in range(c) if gcd(d, c) == 1]
        cols = np.array([_rho_inverse_column(rho, _completed(c, d)) for d in d0])
        block = np.zeros(rho.dim, dtype=complex)
        for mu, (xi, t) in enumerate(table):
            weights = cols[:, mu]
            if not np.any(np.abs(weights) > 1e-15):
                continue
            phases = np.exp(2j * pi * np.outer(np.array(d0) / c, xi))
            block[mu] = np.sum(weights * (phases @ t))
        partial += c ** (-(s + 0.5)) * block
        if c == C // 2:
            half = partial.copy()
    raw = identity + 2 * scale * partial
    if half is None:
        return VectorValue(values=raw, err_bound=float('nan'), terms=C)
    rate = 2 ** (s - 1)
    extrapolated = identity + 2 * scale * (rate * partial - half) / (rate - 1)
    tail = float(np.max(np.abs(extrapolated - raw)))
    logger.debug("vv_eisenstein N=%d tau=%s s=%s C=%d: tail %.3g", level.N, tau, s, C, tail)
    return VectorValue(values=extrapolated, err_bound=tail, terms=C)


def vv_eisenstein_direct(level: Level, tau: complex, s: float, bound: int) -> VectorValue:
    """E_L(tau, s) from the box 0 < c^2 + d^2 <= bound^2; no tail correction."""
    _check_s(s)
    tau = complex(tau)
    rho = WeilRep(level)
    v = tau.imag
    scale = v ** ((s - 1) / 2)
    out = np.zeros(rho.dim, dtype=complex)
    out[0] = 2 * scale
    terms = 1
    for c in range(1, bound + 1):
        dmax = int(sqrt(bound * bound - c * c))
        for d in range(-dmax, dmax + 1):
            if gcd(c, d) != 1:
                continue
            j = c * tau + d
            out += 2 * scale * abs(j) ** (1 - s) * j ** -1.5 * _rho_inverse_column(rho, _completed(c, d))
            terms += 1
    return VectorValue(values=out, err_bound=float('nan'), terms=terms)


def vv_eisenstein_constant(level: Level, s: float) -> float:
    """-(s/4) pi^{-s-1} Gamma(s) zeta^(N)(2s) N^{1/2 + 3s/2}."""
    return float(-(s / 4) * mpmath.power(pi, -s - 1) * mpmath.gamma(s) * zeta_N(2 * s, level.N)
                 * mpmath.power(level.N, 0.5 + 1.5 * s))


def vv_eisenstein_normalized(level: Level, tau: complex, s: float, coprime_bound: Optional[int] = None,
                             tol: float = 1e-10) -> VectorValue:
    """calE_L(tau, s) = -(s/4) pi^{-s-1} Gamma(s) zeta^(N)(2s) N^{1/2 + 3s/2} E_L(tau, s)."""
    raw = vv_eisenstein(level, tau, s, coprime_bound, tol)
    k = vv_eisenstein_constant(level, s)
    return VectorValue(values=k * raw.values, err_bound=abs(k) * raw.err_bound, terms=raw.terms)


# -- Theta lift ----------------------------------------------------------------

def _fundamental_domain_rule(nodes: int, cutoff: float):
    """Points and weights for int_F g dx dy/y^2 = int dx int dt g, t = 1/y in [1/cutoff, 1/sqrt(1 - x^2)]."""
    s, w = np.polynomial.legendre.leggauss(nodes)
    xs, wx = s / 2, w / 2
    points, weights = [], []
    for x, ax in zip(xs, wx):
        lo, hi = 1 / cutoff, 1 / sqrt(1 - x * x)
        ts = lo + (hi - lo) * (s + 1) / 2
        points.extend(x + 1j / ts)
        weights.extend(ax * w * (hi - lo) / 2)
    return np.array(points), np.array(weights)


def _coset_integral(level: Level, f: Callable[[complex], complex], tau: complex, gamma,
                    points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * level.N, dtype=complex)
    for z, wt in zip(points, weights):
        zz = _moebius(gamma, z)
        out += wt * f(zz) * theta_vector(level, tau, zz).values
    return out


def _lift_once(level: Level, f, tau: complex, nodes: int, cutoff: float, threads: int) -> np.ndarray:
    points, weights = _fundamental_domain_rule(nodes, cutoff)
    reps = coset_representatives(level)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda g: _coset_integral(level, f, tau, g, points, weights), reps))
    total = np.zeros(2 * level.N, dtype=complex)
    for part in parts:
        total += part
    return total


def _integrand_peak(level: Level, f, tau: complex, y: float, reps) -> float:
    """max |f(g_j z)| |Theta_L(tau, g_j z)| over the cosets and a few x on Im z = y."""
    peak = 0.0
    for g in reps:
        for x in (-0.5, -0.25, 0.0, 0.25):
            zz = _moebius(g, complex(x, y))
            value = abs(f(zz)) * float(np.max(np.abs(theta_vector(level, tau, zz).values)))
            peak = max(peak, value)
    return peak


def _cusp_cutoff(level: Level, f, tau: complex, tol: float, reps) -> Tuple[float, float]:
    """Smallest height Y >= 3.5 whose truncation estimate peak(Y) / Y is below tol times
    the integrand at z = i, together with that estimate."""
    scale = max(_integrand_peak(level, f, tau, 1.0, reps), 1e-300)
    Y = 3.5
    tail = _integrand_peak(level, f, tau, Y, reps) / Y
    while tail > tol * scale and Y < MAX_CUTOFF:
        Y += 0.5
        tail = _integrand_peak(level, f, tau, Y, reps) / Y
    if tail > tol * scale:
        raise PrecisionError(f"integrand has not decayed by Im z = {Y} at N={level.N}, tau={tau}")
    return Y, tail


def theta_lift(level: Level, f: Callable[[complex], complex], tau: complex, tol: float = 1e-4,
               nodes: Optional[int] = None, cutoff: Optional[float] = None,
               threads: Optional[int] = None) -> VectorValue:
    """I(tau, f) = sum_j int_F f(g_j z) Theta_L(tau, g_j z) dmu(z) over the cosets Gamma0(N) g_j.

    F is cut at the height Y picked by _cusp_cutoff unless cutoff is given. The
    error bound adds the difference to the rule with 2/3 of the nodes and the
    estimated integral above Y; a relative bound above tol raises PrecisionError
    with the refinement trace.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")
    nodes = config['quad_nodes'] if nodes is None else nodes
    threads = config['threads'] if threads is None else threads
    if nodes < 6:
        raise ValueError(f"need at least 6 quadrature nodes, got {nodes}")
    reps = coset_representatives(level)
    if cutoff is None:
        cutoff, truncation = _cusp_cutoff(level, f, tau, tol, reps)
    else:
        truncation = _integrand_peak(level, f, tau, cutoff, reps) / cutoff
    fine = _lift_once(level, f, tau, nodes, cutoff, threads)
    coarse = _lift_once(level, f, tau, 2 * nodes // 3, cutoff, threads)
    err = float(np.max(np.abs(fine - coarse))) + truncation
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    logger.debug("theta_lift N=%d tau=%s: Y=%.1f, nodes %d/%d, error %.3g (truncation %.3g)",
                 level.N, tau, cutoff, nodes, 2 * nodes // 3, err, truncation)
    if err / scale > tol:
        raise PrecisionError(
            f"theta lift did not converge at N={level.N}, tau={tau}: "
            f"trace nodes={2 * nodes // 3} -> {nodes}, Y={cutoff:g}, |diff|={err:.3g}, "
            f"relative {err / scale:.3g} > {tol}"
        )
    return VectorValue(values=fine, err_bound=err, terms=nodes)


def eisenstein_integrand(level: Level, s: float, involution: bool = False) -> Callable[[complex], complex]:
    """z -> calE(N, z, s), or calE(N, w_N z, s) with w_N z = -1/(Nz)."""
    def f(z):
        zz = -1 / (level.N * z) if involution else z
        return eisenstein_fourier(level, zz, s).value
    return f


def theta_lift_check(level: Level, tau: complex, s: float = 2.0, coprime_bound: Optional[int] = None,
                     nodes: Optional[int] = None, threads: Optional[int] = None) -> LiftResult:
    """Both sides of I(tau, calE(N, ., s)) = zeta*(s) calE_L(tau, s)."""
    tau = complex(tau)
    lift = theta_lift(level, eisenstein_integrand(level, s), tau, nodes=nodes, threads=threads, tol=1e-3)
    eis = vv_eisenstein_normalized(level, tau, s, coprime_bound)
    zs = float(np.real(zeta_star(s)))
    rhs = VectorValue(values=zs * eis.values, err_bound=abs(zs) * eis.err_bound, terms=eis.terms)
    residual = float(np.max(np.abs(lift.values - rhs.values)) / np.max(np.abs(rhs.values)))
    return LiftResult(N=level.N, s=s, tau_re=tau.real, tau_im=tau.imag, lift=lift.entries(),
                      eisenstein=rhs.entries(), residual=residual, quadrature_error=lift.err_bound,
                      eisenstein_tail=rhs.err_bound)
