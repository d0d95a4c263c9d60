from math import gcd
from typing import List, Literal, Optional

from pydantic import model_validator

from src.arith.service import euler_gamma
from src.coeffs.model import CoefficientSource
from src.schemas.base import WorkbenchModel
from src.weights.model import SmoothWeight2D


class ShiftedSumSpec(WorkbenchModel):
    """One instance of D_f(a, b; h) = Σ_{am ± bn = h} λ_φ(m)λ_ψ(n)f(am, bn); sign −1 is am − bn = h."""

    a: int
    b: int
    h: int
    sign: Literal[1, -1] = -1
    phi: CoefficientSource
    psi: CoefficientSource
    weight: SmoothWeight2D

    @model_validator(mode="after")
    def _check_spec(self):
        if self.a < 1 or self.b < 1:
            raise ValueError(f"a and b must be positive, got a={self.a}, b={self.b}")
        if gcd(self.a, self.b) != 1:
            raise ValueError(f"a={self.a} and b={self.b} must be coprime")
        if self.h < 1:
            raise ValueError(f"h must be positive, got {self.h}")
        return self

    @property
    def X(self) -> float:
        return self.weight.X if self.weight.X is not None else self.weight.x_support[0]

    @property
    def Y(self) -> float:
        return self.weight.Y if self.weight.Y is not None else self.weight.y_support[0]

    @property
    def m_range(self) -> tuple[int, int]:
        lo, hi = self.weight.x_support
        return int(lo // self.a) + 1, int(-(-hi // self.a)) - 1

    @property
    def n_range(self) -> tuple[int, int]:
        lo, hi = self.weight.y_support
        return int(lo // self.b) + 1, int(-(-hi // self.b)) - 1


class MainTermSpec(WorkbenchModel):
    """
    q_max cuts only the series route, a coarse cross-check whose tail bound
    decays like log²(q_max)/q_max and stays far above 1e−10 at any practical
    cut. The reported main term comes from the closed form and does not
    depend on q_max.
    """

    q_max: int = 64
    euler_gamma: float = euler_gamma()

    @model_validator(mode="after")
    def _check_q_max(self):
        if self.q_max < 1:
            raise ValueError(f"q_max must be positive, got {self.q_max}")
        return self


class MainTermMoments(WorkbenchModel):
    """Σ_q (ab, q)c_q(h)q^{−2}·{1, U_q, V_q, U_qV_q} with U_q = 2 log((a, q)/q), V_q = 2 log((b, q)/q)."""

    m0: float
    m_u: float
    m_v: float
    m_uv: float


class MainTermResult(WorkbenchModel):
    value: float
    series_value: float
    tail_bound: float
    q_max: int
    moments: MainTermMoments


class ShiftedRow(WorkbenchModel):
    a: int
    b: int
    h: int
    sign: int
    X: float
    Y: float
    P: float
    D: float
    D_im: float
    trivial_bound: float
    th1_scale: float
    ratio_trivial: float
    ratio_th1: float
    supersedes_trivial: bool
    main_term: Optional[float] = None
    main_term_gap: Optional[float] = None


class ShiftedSweep(WorkbenchModel):
    rows: List[ShiftedRow]
