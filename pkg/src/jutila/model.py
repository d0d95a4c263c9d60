from enum import StrEnum
from fractions import Fraction
from typing import List, Optional

import numpy as np
from pydantic import Field, model_validator

from src.arith.service import reduced_residues
from src.schemas.base import WorkbenchModel

# Q^{-2} ≤ δ ≤ Q^{-1} is checked with this relative slack on the float δ
DELTA_RANGE_SLACK = 1e-12


class JutilaScheme(WorkbenchModel):
    """
    The denominator set 𝒬 ⊂ [Q, 2Q] with arcs [d/q − δ, d/q + δ], 1 ≤ d ≤ q,
    (d, q) = 1, and L = Σ_{q ∈ 𝒬} φ(q).
    """

    Q: float
    delta: float
    N: int = 1
    a: int = 1
    b: int = 1
    h: int = 1
    moduli: List[int]
    L: int

    @model_validator(mode="after")
    def _check_scheme(self):
        if not self.moduli:
            raise ValueError("the denominator set must be nonempty")
        if list(self.moduli) != sorted(set(self.moduli)):
            raise ValueError("moduli must be strictly increasing")
        if self.L < 1:
            raise ValueError(f"L must be positive, got {self.L}")
        return self

    @property
    def delta_fraction(self) -> Fraction:
        """δ as the exact rational value of its float."""
        return Fraction(self.delta)

    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        """Centres d/q as parallel arrays (d, q), q ascending then d ascending."""
        ds, qs = [], []
        for q in self.moduli:
            d = reduced_residues(q)
            d = np.where(d == 0, q, d)
            ds.append(np.sort(d))
            qs.append(np.full(d.size, q, dtype=np.int64))
        return np.concatenate(ds), np.concatenate(qs)


class StepFunction(WorkbenchModel):
    """
    Piecewise-constant function: values[0] left of breakpoints[0], values[i]
    on [breakpoints[i−1], breakpoints[i]), values[−1] right of the last one.
    """

    breakpoints: np.ndarray = Field(repr=False)
    values: np.ndarray = Field(repr=False)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.size != self.breakpoints.size + 1:
            raise ValueError("a step function needs one more value than breakpoints")
        if self.breakpoints.size > 1 and np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        return self

    def __call__(self, alpha) -> np.ndarray:
        return self.values[np.searchsorted(self.breakpoints, np.asarray(alpha, dtype=np.float64), side="right")]


class Branch(StrEnum):
    """Dual families of one Voronoi step: λ(m)e(−d̄m), λ(−m)e(d̄m), and the polar term."""

    minus = "minus"
    plus = "plus"
    main = "main"


# phase multiplier p in e_q(p·d̄·am) for each branch
BRANCH_PHASE = {Branch.minus: -1, Branch.plus: 1, Branch.main: 0}


class FrequencyTable(WorkbenchModel):
    """G(α) = Σ_k c[k − k_min]·e(kα) with k = am ± bn − h."""

    k_min: int
    coefficients: np.ndarray = Field(repr=False)
    m_max: int
    n_max: int

    @property
    def k_max(self) -> int:
        return self.k_min + self.coefficients.size - 1

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1, dtype=np.int64)

    @property
    def max_abs_frequency(self) -> int:
        if self.coefficients.size == 0:
            return 0
        return max(abs(self.k_min), abs(self.k_max))


class L2Row(WorkbenchModel):
    Q: float
    delta: float
    L: int
    moduli: int
    l2_exact: float
    bound: float
    ratio: float


class ArcTransform(WorkbenchModel):
    d: int
    q: int
    value: complex
    direct: complex
    difference: float
    m_cut: int
    n_cut: int
    tail: float
    truncation_scale: float


class ArcTotal(WorkbenchModel):
    q: int
    value: complex
    direct: complex
    difference: float
    m_cut: int
    n_cut: int


class BalancedParameters(WorkbenchModel):
    delta: float
    Q: float
    delta_in_range: bool


class BalanceScales(WorkbenchModel):
    eq15: float
    dual: float


class DensityReport(WorkbenchModel):
    Q: float
    count: int
    constant: float


class ComparisonRow(WorkbenchModel):
    a: int
    b: int
    h: int
    A: float
    B: float
    P: float
    Q: float
    delta: float
    L: int
    D_direct: float
    D_direct_im: float
    D_exact_integral: float
    D_tilde: float
    D_tilde_im: float
    diff: float
    eq15_scale: float
    dual_scale: float
    main_term: Optional[float] = None


class WiltonRatio(WorkbenchModel):
    max_ratio: float
    alpha: float
    x: int
