from math import gcd
from typing import List, Optional

from pydantic import model_validator

from src.coeffs.model import CoefficientSource
from src.schemas.base import WorkbenchModel
from src.weights.model import SmoothWeight1D


class VoronoiInstance(WorkbenchModel):
    source: CoefficientSource
    d: int
    q: int
    g: SmoothWeight1D
    m_cut: Optional[int] = None
    quadrature_tolerance: float = 1e-10
    truncation_tolerance: float = 1e-10

    @model_validator(mode="after")
    def _check_instance(self):
        if self.q < 1:
            raise ValueError(f"q must be positive, got {self.q}")
        if gcd(self.d, self.q) != 1:
            raise ValueError(f"d={self.d} and q={self.q} must be coprime")
        if self.q % self.source.level:
            raise ValueError(f"the level N={self.source.level} must divide q={self.q}")
        if self.g.support[0] <= 0:
            raise ValueError("g must be supported in (0, ∞)")
        return self


class TruncationChoice(WorkbenchModel):
    m_cut: int
    tail_estimate: float
    target: float


class VoronoiResult(WorkbenchModel):
    q: int
    d: int
    lhs: complex
    rhs: complex
    residual: float
    m_cut: int
    tail_estimate: float
    main_term: Optional[complex] = None


class VoronoiRow(WorkbenchModel):
    q: int
    d: int
    lhs_re: float
    lhs_im: float
    rhs_re: float
    rhs_im: float
    residual: float
    m_cut: int
    tail_estimate: float

    @classmethod
    def from_result(cls, result: VoronoiResult) -> "VoronoiRow":
        return cls(
            q=result.q,
            d=result.d,
            lhs_re=result.lhs.real,
            lhs_im=result.lhs.imag,
            rhs_re=result.rhs.real,
            rhs_im=result.rhs.imag,
            residual=result.residual,
            m_cut=result.m_cut,
            tail_estimate=result.tail_estimate,
        )


class VoronoiSummary(WorkbenchModel):
    rows: List[VoronoiRow]
    max_residual: float
