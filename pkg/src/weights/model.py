from enum import StrEnum
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import Field

from src.schemas.base import WorkbenchModel


class BoundPattern(StrEnum):
    # |g^{(i,j)}| ≤ C_ij A^{−i} B^{−j} P^{i+j}
    box = "box"
    # |x^i y^j f^{(i,j)}| ≤ C_ij (1 + x/X)^{−1} (1 + y/Y)^{−1} P^{i+j}
    eq1 = "eq1"
    # |F^{(i,j)}| ≤ C_ij δ^{i+j}
    delta = "delta"


class WeightCertificate(WorkbenchModel):
    """Measured derivative constants keyed "i,j" (or "j" in one variable)."""

    constants: dict[str, float]
    safety: float
    grid: int


class SmoothWeight1D(WorkbenchModel):
    evaluator: Callable = Field(repr=False)
    support: Tuple[float, float]
    derivative_scale: float
    certificate: Optional[WeightCertificate] = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        return np.where(inside, self.evaluator(np.where(inside, x, 0.5 * (lo + hi))), 0.0)

    def bound(self, j: int) -> float:
        return self.derivative_scale**j


class SmoothWeight2D(WorkbenchModel):
    evaluator: Callable = Field(repr=False)
    x_support: Tuple[float, float]
    y_support: Tuple[float, float]
    pattern: BoundPattern
    P: float = 1.0
    A: Optional[float] = None
    B: Optional[float] = None
    X: Optional[float] = None
    Y: Optional[float] = None
    delta: Optional[float] = None
    shift: Optional[int] = None
    certificate: Optional[WeightCertificate] = None

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        inside = (
            (x > self.x_support[0]) & (x < self.x_support[1]) & (y > self.y_support[0]) & (y < self.y_support[1])
        )
        x_safe = np.where(inside, x, 0.5 * sum(self.x_support))
        y_safe = np.where(inside, y, 0.5 * sum(self.y_support))
        return np.where(inside, self.evaluator(x_safe, y_safe), 0.0)

    def bound(self, i: int, j: int, x, y) -> np.ndarray:
        """The certified bound pattern at (x, y), without its constant."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.pattern == BoundPattern.box:
            return np.broadcast_to(self.A ** (-i) * self.B ** (-j) * self.P ** (i + j), np.broadcast(x, y).shape)
        if self.pattern == BoundPattern.delta:
            return np.broadcast_to(self.delta ** (i + j), np.broadcast(x, y).shape)
        decay = 1.0 / ((1.0 + x / self.X) * (1.0 + y / self.Y))
        return decay * self.P ** (i + j) / (x**i * y**j)

    def length_scales(self) -> tuple[float, float]:
        """Step lengths over which the weight varies by O(1)."""
        if self.pattern == BoundPattern.box:
            return self.A / self.P, self.B / self.P
        if self.pattern == BoundPattern.delta:
            return 1.0 / self.delta, 1.0 / self.delta
        return self.x_support[0] / self.P, self.y_support[0] / self.P


class DyadicPiece(WorkbenchModel):
    k: int
    l: int
    A_k: float
    B_l: float
    piece: SmoothWeight2D


class CertificateRow(WorkbenchModel):
    order: str
    max_ratio: float
    constant: float
    passed: bool


class CertificateCheck(WorkbenchModel):
    rows: List[CertificateRow]
    passed: bool


class MixedNorm(WorkbenchModel):
    i: int
    j: int
    norm: float
    pattern: float
    ratio: float
