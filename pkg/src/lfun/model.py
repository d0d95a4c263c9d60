from math import gcd
from typing import List, Optional

from pydantic import model_validator

from src.characters.model import DirichletCharacter
from src.coeffs.model import CoefficientSource
from src.schemas.base import WorkbenchModel
from src.weights.model import SmoothWeight1D


class LValueRequest(WorkbenchModel):
    """
    L(s, φ⊗χ) by the smoothed approximate functional equation. `cutoff` is
    the splitting parameter of the two incomplete-gamma sums; every cutoff > 0
    gives the same value. `epsilon` sets the nominal length q^{1+ε} reported
    next to the actual cut.
    """

    s: complex = 0.5
    phi: CoefficientSource
    chi: DirichletCharacter
    epsilon: float = 0.1
    cutoff: float = 1.0

    @model_validator(mode="after")
    def _check_request(self):
        if gcd(self.chi.modulus, self.phi.level) != 1:
            raise ValueError(f"modulus q={self.chi.modulus} must be coprime to the level N={self.phi.level}")
        if not self.chi.is_primitive:
            raise ValueError(f"character {self.chi.label} is not primitive")
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        return self


class AfeResult(WorkbenchModel):
    label: str
    q: int
    value: complex
    first: complex
    second: complex
    root: complex
    m_cut: int
    nominal_length: float
    conductor: float


class LValueRow(WorkbenchModel):
    label: str
    q: int
    s_re: float
    s_im: float
    L_re: float
    L_im: float
    L_abs: float
    T_re: float
    T_im: float
    root_re: float
    root_im: float
    m_cut: int
    cutoff_difference: Optional[float] = None

    @classmethod
    def from_result(cls, result: AfeResult, s: complex, difference: float | None = None) -> "LValueRow":
        return cls(
            label=result.label,
            q=result.q,
            s_re=s.real,
            s_im=s.imag,
            L_re=result.value.real,
            L_im=result.value.imag,
            L_abs=abs(result.value),
            T_re=result.first.real,
            T_im=result.first.imag,
            root_re=result.root.real,
            root_im=result.root.imag,
            m_cut=result.m_cut,
            cutoff_difference=difference,
        )


class AmplifierSpec(WorkbenchModel):
    """S = Σ*_ω |Σ_{l≤L} χ̄(l)ω(l)|²|S_ω|² with S_ω = Σ λ(m)ω(m)k(m), k supported in [M, 2M]."""

    phi: CoefficientSource
    chi: DirichletCharacter
    L_amp: int
    M: float
    k_weight: SmoothWeight1D

    @model_validator(mode="after")
    def _check_spec(self):
        if self.L_amp < 1:
            raise ValueError(f"amplifier length must be at least 1, got {self.L_amp}")
        if self.M < 1:
            raise ValueError(f"M must be at least 1, got {self.M}")
        return self

    @property
    def q(self) -> int:
        return self.chi.modulus

    @property
    def N(self) -> int:
        return int(2 * self.L_amp * self.M)


class OmegaRow(WorkbenchModel):
    label: str
    amplifier: float
    S_abs: float
    S_re: float
    S_im: float
    contribution: float


class AmplifierMoment(WorkbenchModel):
    S: float
    chi_term: float
    gap_bound: int
    scale_ratio: float
    rows: List[OmegaRow]


class ShiftRow(WorkbenchModel):
    h: int
    D_re: float
    D_im: float
    D_shifted_re: Optional[float] = None
    D_shifted_im: Optional[float] = None
    difference: Optional[float] = None


class Offdiagonal(WorkbenchModel):
    D0: float
    D0_squares: float
    rhs: float
    N: int
    scale: float
    rows: List[ShiftRow]


class ParsevalCheck(WorkbenchModel):
    lhs: float
    rhs: float
    difference: float


class SweepRow(WorkbenchModel):
    q: int
    max_abs_L: float
    argmax: str
    sqrt_q: float
    subconvex_scale: float


class SweepResult(WorkbenchModel):
    rows: List[SweepRow]
    slope: Optional[float] = None
    intercept: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
