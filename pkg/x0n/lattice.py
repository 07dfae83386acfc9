"""
lattice.py

The lattice L of trace-zero matrices for level N, its discriminant group
L#/L = Z/2N, vector enumeration, Gamma0(N)-class counting of Heegner points,
cusp counts alpha_M, cusp constants and the Weil representation rho_L.

A vector is stored by integers (a, b, c) and the coset r:

    w = [[b + r/2N, -a/N], [c, -b - r/2N]],   Q(w) = N det(w) = ac - N w1^2

Usage:
    from x0n.lattice import enumerate_vectors, heegner_degree
    heegner_degree(Level.of(1), 1, Fraction(3, 4))   # Fraction(2, 3)
"""

import cmath
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from x0n.errors import CongruenceError, ConsistencyError
from x0n.numtheory import Level

logger = logging.getLogger(__name__)

Matrix = Tuple[int, int, int, int]
Form = Tuple[int, int, int]
Run = Tuple[str, int]

LETTERS = ('S', 'T', 'Ti')


# -- Integer matrices ----------------------------------------------------------

def gcdex(a: int, b: int) -> Tuple[int, int, int]:
    """Return (x, y, g) with g = gcd(a, b) and a*x + b*y == g."""
    if b == 0:
        return (-1, 0, -a) if a < 0 else (1, 0, a)
    q, rem = divmod(a, b)
    x, y, g = gcdex(b, rem)
    return y, x - y * q, g


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv(m: Matrix) -> Matrix:
    a, b, c, d = m
    return (d, -b, -c, a)


def act_on_form(form: Form, m: Matrix) -> Form:
    """(F o m)(X, Y) = F(pX + qY, sX + tY) for m = [[p, q], [s, t]]."""
    A, B, C = form
    p, q, s, t = m
    return (
        A * p * p + B * p * s + C * s * s,
        2 * A * p * q + B * (p * t + q * s) + 2 * C * s * t,
        A * q * q + B * q * t + C * t * t,
    )


# -- Discriminant group --------------------------------------------------------

def discriminant(level: Level, r: int, n) -> int:
    """D = -4Nn, checked against D = r^2 mod 4N."""
    N = level.N
    D = -4 * N * Fraction(n)
    if D.denominator != 1:
        raise CongruenceError(f"n={n} is not in (1/4N)Z for N={N}")
    D = int(D)
    if (D - r * r) % (4 * N):
        raise CongruenceError(
            f"n={n} is not congruent to Q(mu_{r}) = {Fraction(-r * r, 4 * N)} mod 1 "
            f"(D={D} but r^2={r * r} mod {4 * N})"
        )
    return D


def q_mu(level: Level, r: int) -> Fraction:
    """Q(mu_r) mod 1, in [0, 1)."""
    return Fraction(-r * r, 4 * level.N) % 1


# -- Lattice vectors -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class LatticeVector:
    a: int
    b: int
    c: int
    N: int
    r: int

    @property
    def w1(self) -> Fraction:
        return Fraction(2 * self.N * self.b + self.r, 2 * self.N)

    @property
    def w2(self) -> Fraction:
        return Fraction(-self.a, self.N)

    @property
    def w3(self) -> int:
        return self.c

    @property
    def b_numerator(self) -> int:
        return 2 * self.N * self.b + self.r

    @property
    def Q(self) -> Fraction:
        return self.a * self.c - self.N * self.w1 ** 2

    @property
    def D(self) -> int:
        return self.b_numerator ** 2 - 4 * self.N * self.a * self.c

    @property
    def matrix(self) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        return ((self.w1, self.w2), (Fraction(self.w3), -self.w1))

    @property
    def form(self) -> Form:
        """[Nc, -(2Nb + r), a]; its roots are the points of H or P^1(Q) fixed by w."""
        return (self.N * self.c, -self.b_numerator, self.a)

    @property
    def positive_form(self) -> Form:
        A, B, C = self.form
        return (A, B, C) if A > 0 else (-A, -B, -C)

    @property
    def cm_point(self) -> complex:
        """The point z_w in H with w(z_w) parallel to w (only for Q(w) > 0)."""
        if self.Q <= 0:
            raise ValueError(f"z_w is only defined for Q(w) > 0, got Q = {self.Q}")
        A, B, _ = self.positive_form
        return complex(-B / (2 * A), (-self.D) ** 0.5 / (2 * A))

    def __neg__(self) -> "LatticeVector":
        r = (-self.r) % (2 * self.N)
        b = (-self.b_numerator - r) // (2 * self.N)
        return LatticeVector(-self.a, b, -self.c, self.N, r)


def pairing(v: LatticeVector, w: LatticeVector) -> Fraction:
    """(v, w) = -N tr(v w), so that (w, w) = 2Q(w)."""
    trace = 2 * v.w1 * w.w1 + v.w2 * w.w3 + v.w3 * w.w2
    return -v.N * trace


def vector_from_coordinates(level: Level, r: int, w1, w2, w3) -> Optional[LatticeVector]:
    """The vector with the given matrix entries if it lies in L + mu_r, else None."""
    N = level.N
    a = -N * Fraction(w2)
    c = Fraction(w3)
    b = Fraction(w1) - Fraction(r, 2 * N)
    if a.denominator != 1 or b.denominator != 1 or c.denominator != 1:
        return None
    return LatticeVector(int(a), int(b), int(c), N, r % (2 * N))


def enumerate_vectors(level: Level, r: int, n, height_bound: int) -> List[LatticeVector]:
    """All w in L_{mu_r}[n] with |a|, |b|, |c| <= height_bound."""
    if height_bound <= 0:
        raise ValueError(f"height_bound must be positive, got {height_bound}")
    N = level.N
    r = r % (2 * N)
    D = discriminant(level, r, n)
    found = []
    for b in range(-height_bound, height_bound + 1):
        ac = ((2 * N * b + r) ** 2 - D) // (4 * N)
        if ac == 0:
            for x in range(-height_bound, height_bound + 1):
                found.append(LatticeVector(0, b, x, N, r))
                if x:
                    found.append(LatticeVector(x, b, 0, N, r))
            continue
        for a in range(1, min(height_bound, abs(ac)) + 1):
            if ac % a == 0 and abs(ac // a) <= height_bound:
                found.append(LatticeVector(a, b, ac // a, N, r))
                found.append(LatticeVector(-a, b, -(ac // a), N, r))
    logger.debug("enumerate_vectors N=%d r=%d D=%d bound=%d: %d vectors",
                 N, r, D, height_bound, len(found))
    return sorted(found)


# -- Cosets and cusps ----------------------------------------------------------

def p1_reduce(N: int, c: int, d: int) -> Tuple[int, int]:
    """Canonical representative of (c : d) in P^1(Z/N) under scaling by units."""
    c, d = c % N, d % N
    if gcd(gcd(c, d), N) != 1:
        raise ValueError(f"({c}, {d}) is not a point of P^1(Z/{N})")
    return min(((u * c) % N, (u * d) % N) for u in range(N) if gcd(u, N) == 1)


@lru_cache(maxsize=None)
def p1_points(N: int) -> Tuple[Tuple[int, int], ...]:
    points = set()
    for c, d in product(range(N), repeat=2):
        if gcd(gcd(c, d), N) == 1:
            points.add(p1_reduce(N, c, d))
    return tuple(sorted(points))


def _lift_bottom_row(N: int, c: int, d: int) -> Matrix:
    """A matrix of SL2(Z) whose bottom row reduces to (c : d) mod N."""
    if c % N == 0:
        return (1, 0, 0, 1)
    k = 0
    while gcd(c, d + k * N) != 1:
        k += 1
    d += k * N
    x, y, _ = gcdex(d, c)
    return (x, -y, c, d)


@lru_cache(maxsize=None)
def coset_representatives(level: Level) -> Tuple[Matrix, ...]:
    """Representatives g_j of the right cosets Gamma0(N) g_j in SL2(Z)."""
    reps = tuple(_lift_bottom_row(level.N, c, d) for c, d in p1_points(level.N))
    if len(reps) != level.index:
        raise ConsistencyError(f"found {len(reps)} cosets for N={level.N}, expected {level.index}")
    return reps


@lru_cache(maxsize=None)
def _coset_table(N: int) -> Dict[Tuple[int, int], int]:
    return {point: j for j, point in enumerate(p1_points(N))}


def coset_index(level: Level, gamma: Matrix) -> int:
    """Index j with Gamma0(N) gamma = Gamma0(N) g_j."""
    _, _, c, d = gamma
    return _coset_table(level.N)[p1_reduce(level.N, c, d)]


@dataclass(frozen=True)
class CuspData:
    M: int
    width: int
    beta: Fraction
    funke: int

    @property
    def label(self) -> str:
        return f"1/{self.M}"


def cusp_data(level: Level) -> List[CuspData]:
    """One record per cusp P_{1/M}, M | N; the cusp 1/N is infinity and 1/1 is zero."""
    out = []
    for M in level.divisors:
        width, beta = level.N // M, Fraction(1, M)
        out.append(CuspData(M=M, width=width, beta=beta, funke=int(width / beta)))
    return out


def cusp_of(level: Level, p: int, q: int) -> int:
    """M | N with p/q Gamma0(N)-equivalent to 1/M; q = 0 stands for infinity."""
    if gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not in lowest terms")
    return gcd(q, level.N)


# -- Reduced forms and Heegner classes -----------------------------------------

def reduced_forms(D: int) -> List[Form]:
    """Reduced positive-definite forms of discriminant D < 0, primitive or not."""
    if D >= 0:
        raise ValueError(f"reduced forms need D < 0, got {D}")
    forms = []
    A = 1
    while 3 * A * A <= -D:
        for B in range(-A + 1, A + 1):
            if (B * B - D) % (4 * A):
                continue
            C = (B * B - D) // (4 * A)
            if C < A or (C == A and B < 0):
                continue
            forms.append((A, B, C))
        A += 1
    return forms


@lru_cache(maxsize=None)
def automorphisms(form: Form) -> Tuple[Matrix, ...]:
    """Stabilizer of a reduced form in SL2(Z); its entries lie in {-1, 0, 1}."""
    auts = []
    for m in product((-1, 0, 1), repeat=4):
        if m[0] * m[3] - m[1] * m[2] == 1 and act_on_form(form, m) == form:
            auts.append(m)
    return tuple(auts)


def hurwitz_class_number(d: int) -> Fraction:
    """H(d) = sum over reduced forms of discriminant -d of 2/|Aut|."""
    if d <= 0:
        return Fraction(-1, 12) if d == 0 else Fraction(0)
    if d % 4 in (1, 2):
        return Fraction(0)
    return sum((Fraction(2, len(automorphisms(f))) for f in reduced_forms(-d)), Fraction(0))


@dataclass(frozen=True)
class HeegnerClass:
    """A Gamma0(N)-class of vectors w in L_{mu_r}[n] with Q(w) > 0."""
    vector: LatticeVector
    form: Form
    aut_order: int
    reduced: Form

    @property
    def weight(self) -> Fraction:
        return Fraction(2, self.aut_order)

    @property
    def cm_point(self) -> complex:
        return self.vector.cm_point


def _vectors_from_form(N: int, r: int, form: Form) -> List[LatticeVector]:
    """Vectors of L + mu_r whose positive form is F: B = -r gives c > 0, B = r gives c < 0."""
    A, B, C = form
    out = []
    if (B + r) % (2 * N) == 0:
        out.append(LatticeVector(C, (-B - r) // (2 * N), A // N, N, r))
    if (B - r) % (2 * N) == 0:
        out.append(LatticeVector(-C, (B - r) // (2 * N), -A // N, N, r))
    return out


def heegner_classes(level: Level, r: int, n) -> List[HeegnerClass]:
    """Class representatives of L_{mu_r}[n] / Gamma0(N) for n > 0.

    Each class is found as the form g_j . Q0 = Q0 o g_j^-1 for a reduced form Q0
    and a coset representative g_j; cosets in one orbit of Aut(Q0) give the
    same class and the orbit length fixes the stabilizer order.
    """
    N = level.N
    r = r % (2 * N)
    D = discriminant(level, r, n)
    if D >= 0:
        raise ValueError(f"D={D} >= 0 has no Heegner points; use the square-discriminant path")
    cosets = coset_representatives(level)
    classes = []
    for q0 in reduced_forms(D):
        auts = automorphisms(q0)
        seen = set()
        for j, g in enumerate(cosets):
            if j in seen:
                continue
            orbit = {coset_index(level, mat_mul(g, s)) for s in auts}
            seen |= orbit
            F = act_on_form(q0, mat_inv(g))
            if F[0] % N:
                continue
            aut_order = len(auts) // len(orbit)
            for w in _vectors_from_form(N, r, F):
                classes.append(HeegnerClass(w, F, aut_order, q0))
    logger.debug("heegner_classes N=%d r=%d D=%d: %d classes", N, r, D, len(classes))
    return classes


def heegner_degree(level: Level, r: int, n) -> Fraction:
    """deg Z(n, mu_r) = sum over classes of 2/|Aut|.

    Classes of L_{mu_r}[n] are the forms with B = r or B = -r mod 2N, so both
    orientations P_{D,r} and P_{D,-r} enter.
    """
    return sum((h.weight for h in heegner_classes(level, r, n)), Fraction(0))


def class_rows(classes: Sequence[HeegnerClass]) -> List[dict]:
    rows = []
    for h in classes:
        v = h.vector
        rows.append({
            'a': v.a,
            'b_numerator': v.b_numerator,
            'c': v.c,
            'D': v.D,
            'aut_order': h.aut_order,
            'class_representative': "[{}, {}, {}]".format(*h.form),
        })
    return rows


def vector_rows(vectors: Sequence[LatticeVector]) -> List[dict]:
    return [
        {'a': v.a, 'b_numerator': v.b_numerator, 'c': v.c, 'D': v.D, 'Q': str(v.Q)}
        for v in vectors
    ]


# -- Cusp counts for square discriminants --------------------------------------

@dataclass
class AlphaCount:
    M: int
    D: int
    brute: int
    closed_form: int
    two_case: int

    @property
    def agrees(self) -> bool:
        return self.brute == self.closed_form


def _square_root(D: int) -> int:
    root = isqrt(D) if D > 0 else -1
    if D <= 0 or root * root != D:
        raise ValueError(f"D={D} is not a positive square")
    return root


def cusp_signs(level: Level, r: int, root: int, M: int) -> int:
    """Number of eps = +-1 with eps sqrt(D) = r mod 2M and eps sqrt(D) = -r mod 2N/M."""
    N = level.N
    return sum(
        1 for eps in (1, -1)
        if (eps * root - r) % (2 * M) == 0 and (eps * root + r) % (2 * (N // M)) == 0
    )


def alpha_count(level: Level, r: int, n, M: int) -> AlphaCount:
    """Count the classes of pairs (w, l) with w in L_{mu_r}[n] and l an isotropic line of w^perp at P_{1/M}.

    Every such pair is conjugate by sigma_M = [[1, 0], [M, 1]] to w' = [[x, j/N], [0, -x]]
    with x = +-sqrt(D)/2N; j runs over one period N sqrt(D)/M of the stabilizer of the cusp.
    """
    N = level.N
    if M < 1 or N % M:
        raise CongruenceError(f"M={M} does not divide N={N}")
    r = r % (2 * N)
    D = discriminant(level, r, n)
    root = _square_root(D)
    period = N * root // M
    brute = 0
    for sign in (1, -1):
        x = Fraction(sign * root, 2 * N)
        for j in range(period):
            y = Fraction(j, N)
            w = vector_from_coordinates(level, r, x - M * y, y, 2 * M * x - M * M * y)
            if w is None:
                continue
            A, B, C = w.form
            # the isotropic line is the root 1/M of the form of w
            if A + B * M + C * M * M != 0 or cusp_of(level, 1, M) != M or w.D != D:
                raise ConsistencyError(f"vector {w} does not see the cusp 1/{M}")
            brute += 1
    compatible = cusp_signs(level, r, root, M)
    result = AlphaCount(
        M=M,
        D=D,
        brute=brute,
        closed_form=root * compatible,
        two_case=root * (2 if r % N == 0 else 1),
    )
    if not result.agrees:
        raise ConsistencyError(
            f"alpha count N={N} r={r} D={D} M={M}: brute force {brute} != closed form {result.closed_form}"
        )
    return result


# -- Words in S and T ----------------------------------------------------------

def gamma_runs(gamma: Matrix) -> List[Run]:
    """Euclidean decomposition gamma = T^k1 S T^k2 S ... as runs ('T', k) and ('S', 1)."""
    a, b, c, d = gamma
    if a * d - b * c != 1:
        raise ValueError(f"{gamma} is not in SL2(Z)")
    runs: List[Run] = []
    while c != 0:
        k = a // c
        if k:
            runs.append(('T', k))
        a, b = a - k * c, b - k * d
        a, b, c, d = c, d, -a, -b
        runs.append(('S', 1))
    if a == 1:
        runs.extend([('T', b)] if b else [])
    else:
        # -T^-b = S^2 T^-b
        runs.extend([('S', 1), ('S', 1)] + ([('T', -b)] if b else []))
    return runs


def runs_of_word(word: Sequence[str]) -> List[Run]:
    runs: List[Run] = []
    for letter in word:
        if letter not in LETTERS:
            raise ValueError(f"unknown letter {letter!r}; expected one of {LETTERS}")
        if letter == 'S':
            runs.append(('S', 1))
            continue
        k = 1 if letter == 'T' else -1
        if runs and runs[-1][0] == 'T':
            runs[-1] = ('T', runs[-1][1] + k)
        else:
            runs.append(('T', k))
    return runs


def gamma_to_word(gamma: Matrix) -> List[str]:
    word = []
    for g, k in gamma_runs(gamma):
        if g == 'S':
            word.append('S')
        else:
            word.extend(['T' if k > 0 else 'Ti'] * abs(k))
    return word


def runs_matrix(runs: Sequence[Run]) -> Matrix:
    m = (1, 0, 0, 1)
    for g, k in runs:
        m = mat_mul(m, (0, -1, 1, 0) if g == 'S' else (1, k, 0, 1))
    return m


def metaplectic_phi(runs: Sequence[Run], tau: complex) -> complex:
    """phi(tau) of the product of the lifts (T, 1) and (S, sqrt(tau)) along the word."""
    phi, t = 1 + 0j, complex(tau)
    for g, k in reversed(runs):
        if g == 'S':
            phi *= cmath.sqrt(t)
            t = -1 / t
        else:
            t = t + k
    return phi


def lift_sign(runs: Sequence[Run], tau: complex = 1j) -> int:
    """+1 or -1: the word's lift relative to the principal sqrt(c tau + d)."""
    _, _, c, d = runs_matrix(runs)
    ratio = metaplectic_phi(runs, tau) / cmath.sqrt(c * tau + d)
    return 1 if ratio.real > 0 else -1


# -- Weil representation -------------------------------------------------------

class WeilRep:
    """rho_L on C[L#/L], L#/L = Z/2N with Q(mu_r) = -r^2/4N.

    rho(T) e_mu = e(Q(mu)) e_mu,
    rho(S) e_mu = e(1/8)/sqrt(2N) sum_nu e(-(mu, nu)) e_nu.
    """

    def __init__(self, level: Level):
        self.level = level
        self.N = level.N
        self.dim = 2 * level.N
        r = np.arange(self.dim)
        self.q = ((-r * r) % (4 * self.N)) / (4 * self.N)
        self.t_diag = np.exp(2j * np.pi * self.q)
        phases = np.outer(r, r) % self.dim / self.dim
        self.S = np.exp(2j * np.pi / 8) / np.sqrt(self.dim) * np.exp(2j * np.pi * phases)
        self.S_inv = self.S.conj().T
        self.T = np.diag(self.t_diag)

    def T_power(self, k: int) -> np.ndarray:
        """Diagonal of rho(T)^k, reduced exactly through Q(mu) mod 1."""
        return np.exp(2j * np.pi * ((k * self.q) % 1))

    def generator(self, letter: str) -> np.ndarray:
        if letter == 'S':
            return self.S
        if letter == 'T':
            return self.T
        if letter == 'Ti':
            return self.T.conj()
        raise ValueError(f"unknown letter {letter!r}; expected one of {LETTERS}")

    def element(self, word: Sequence[str]) -> np.ndarray:
        out = np.eye(self.dim, dtype=complex)
        for g, k in runs_of_word(word):
            if g == 'S':
                out = out @ self.S
            else:
                out = out * self.T_power(k)[None, :]
        return out

    def apply_inverse(self, runs: Sequence[Run], vec: np.ndarray) -> np.ndarray:
        """rho(X1 ... Xm)^-1 vec, applying rho(X1)^-1 first."""
        out = np.asarray(vec, dtype=complex)
        for g, k in runs:
            if g == 'S':
                out = self.S_inv @ out
            else:
                out = self.T_power(-k) * out
        return out

    def negation(self) -> np.ndarray:
        """The permutation e_mu -> e_-mu."""
        P = np.zeros((self.dim, self.dim))
        for r in range(self.dim):
            P[(-r) % self.dim, r] = 1.0
        return P



def weil_rep_element(level: Level, word: Sequence[str]) -> np.ndarray:
    return WeilRep(level).element(word)


@dataclass
class WeilCheck:
    N: int
    unitary_S: float
    unitary_T: float
    braid: float
    center: float
    z_squared: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.unitary_S, self.unitary_T, self.braid, self.center, self.z_squared) < self.tol


def weil_rep_check(level: Level, tol: float = 1e-12) -> WeilCheck:
    """Relations (ST)^3 = S^2, S^2 = i P (P: mu -> -mu) and rho(Z^2) = rho(S)^4 = -1."""
    rho = WeilRep(level)
    eye = np.eye(rho.dim)
    S, T = rho.S, rho.T
    S2 = S @ S
    ST = S @ T

    def err(m):
        return float(np.max(np.abs(m)))

    return WeilCheck(
        N=level.N,
        unitary_S=err(S @ S.conj().T - eye),
        unitary_T=err(T @ T.conj().T - eye),
        braid=err(ST @ ST @ ST - S2),
        center=err(S2 - 1j * rho.negation()),
        z_squared=err(S2 @ S2 + eye),
        tol=tol,
    )
