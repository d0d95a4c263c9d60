from enum import StrEnum
from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from src.exceptions.coeffs import CoefficientArgumentError, CoefficientRangeError
from src.schemas.base import WorkbenchModel


class SourceKind(StrEnum):
    holomorphic = "holomorphic"
    maass = "maass"
    divisor = "divisor"


class CoefficientSource(WorkbenchModel):
    """
    Normalized Fourier coefficients λ(m), 1 ≤ m ≤ m_max, of a cusp form or of
    the divisor analog. `coeffs[0]` is an unused zero so that `coeffs[m]` is λ(m).
    For Maass sources λ(−m) = sign·λ(m).
    """

    kind: SourceKind
    level: int = 1
    nebentypus: str = "trivial"
    weight: Optional[int] = None
    mu: Optional[float] = None
    sign: Optional[int] = None
    root: Optional[complex] = None
    coeffs: np.ndarray = Field(repr=False)
    name: str = ""

    @model_validator(mode="after")
    def _check_fields(self):
        if self.level < 1:
            raise ValueError(f"level must be positive, got {self.level}")
        if self.coeffs.ndim != 1 or self.coeffs.size < 2:
            raise ValueError("coefficients must cover at least m = 1")
        if self.kind == SourceKind.holomorphic and (self.weight is None or self.weight < 1):
            raise ValueError("holomorphic sources need a positive weight k")
        if self.kind == SourceKind.maass:
            if self.mu is None or self.mu < 0:
                raise ValueError("maass sources need a spectral parameter mu ≥ 0")
            if self.sign not in (1, -1):
                raise ValueError("maass sources need a sign of +1 or -1")
        return self

    @property
    def m_max(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs) or bool(np.all(self.coeffs.imag == 0))

    @property
    def reflection_sign(self) -> int:
        """λ(−m) = reflection_sign·λ(m); the divisor analog is even."""
        return self.sign if self.sign is not None else 1

    def require(self, m_needed: int, slot: str = "phi") -> None:
        if m_needed > self.m_max:
            raise CoefficientRangeError(m_needed, self.m_max, slot)

    def values(self, m) -> np.ndarray:
        """λ at integer (possibly negative) arguments."""
        m = np.asarray(m, dtype=np.int64)
        if np.any(m == 0):
            raise CoefficientArgumentError("λ(0) is not defined", m=0)
        self.require(int(np.max(np.abs(m))) if m.size else 0)
        values = self.coeffs[np.abs(m)]
        return np.where(m > 0, values, self.reflection_sign * values)


class CoefficientHeader(WorkbenchModel):
    kind: SourceKind
    level: int
    weight: Optional[int] = None
    mu: Optional[float] = None
    nebentypus: str = "trivial"
    sign: Optional[int] = None
    root: Optional[complex] = None


class CoefficientFile(WorkbenchModel):
    header: CoefficientHeader
    m: np.ndarray
    re: np.ndarray
    im: np.ndarray


class DeligneReport(WorkbenchModel):
    max_ratio: float
    argmax: int
    m_max: int
