"""
models.py

Pydantic models for everything the CLI writes out. Exact rationals travel as
"P/Q" strings, complex numbers as separate real and imaginary fields.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator


# -- Series and identities -----------------------------------------------------

class SeriesDump(BaseModel):
    """Exact q-expansion q^lead * sum c_j q^(j*step), valid below lead + order*step."""
    lead: str = Field(description="Leading exponent as an exact rational")
    step: str = Field(description="Exponent increment between coefficients")
    order: int = Field(description="Number of valid coefficients")
    coeffs: List[str] = Field(description="Coefficients as exact rational strings")
    constant: str = Field(default="1", description="Exact constant prefactor")


class IdentityRow(BaseModel):
    N: int
    sum_a: int
    sum_ta: int
    sum_a_over_t: str
    expected: List[str]
    status: Literal['ok', 'fail']


# -- Analytic results ----------------------------------------------------------

class KLFResult(BaseModel):
    """Both sides of the Kronecker limit formula at one point."""
    N: int
    x: float
    y: float
    cusp: Literal['infinity', 'zero'] = 'infinity'
    lhs: float
    rhs: float
    residual: float = Field(description="|lhs - rhs|")
    tail_bound: float = Field(description="Truncation estimate of the q-series side")


class GreenResult(BaseModel):
    N: int
    r: int
    n: str
    v: float
    x: float
    y: float
    value: float
    tail_bound: float
    vectors: int = Field(description="Number of lattice vectors summed")


class ResidualRow(BaseModel):
    y: float
    value: float
    residual: float


class CuspCheckResult(BaseModel):
    N: int
    r: int
    n: str
    v: float
    M: int = Field(description="Cusp 1/M; M = N is infinity")
    g: float = Field(description="Coefficient of -log|q|^2 at that cusp")
    limit: float = Field(description="Predicted limit of the residual")
    rows: List[ResidualRow]
    converged: bool


class VectorEntry(BaseModel):
    """One component of a vector-valued function over L#/L = Z/2N."""
    mu: int
    re: float
    im: float
    err_bound: float = 0.0


class LiftResult(BaseModel):
    N: int
    s: float
    tau_re: float
    tau_im: float
    lift: List[VectorEntry]
    eisenstein: List[VectorEntry]
    residual: float = Field(description="max_mu |lift - zeta*(s) E_L| / max_mu |zeta*(s) E_L|")
    quadrature_error: float
    eisenstein_tail: float

    @field_validator('residual', 'quadrature_error', 'eisenstein_tail')
    @classmethod
    def non_negative(cls, v):
        """Error sizes are magnitudes."""
        return abs(v)


# -- Arithmetic geometry -------------------------------------------------------

class DegreeRow(BaseModel):
    n: str
    r: int
    D: int
    degree: str = Field(description="Exact degree when rational, else a decimal string")
    kind: Literal['heegner', 'cusp', 'constant', 'zero']


class PairingValue(BaseModel):
    rational: str
    logp_terms: Dict[str, str] = Field(default_factory=dict, description="p -> coefficient of log p")
    zeta_prime_coeff: str = "0"
    C_coeff: str = "0"
    other: Optional[str] = Field(default=None, description="Remaining symbolic terms, if any")
    numeric: float


class PairingEntry(BaseModel):
    pair: List[str]
    value: PairingValue
