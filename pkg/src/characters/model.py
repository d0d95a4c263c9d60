from typing import List, Tuple

import numpy as np
from pydantic import Field

from src.schemas.base import WorkbenchModel


class CharacterGroup(WorkbenchModel):
    """
    (ℤ/q)^× written as a product of cyclic factors with explicit generators.
    `logs[i, n]` is the discrete log of n in factor i (−1 when gcd(n, q) > 1).
    """

    modulus: int
    generators: Tuple[int, ...]
    orders: Tuple[int, ...]
    exponent: int
    logs: np.ndarray
    coprime: np.ndarray


class DirichletCharacter(WorkbenchModel):
    modulus: int
    index: int
    exponents: Tuple[int, ...]
    phases: np.ndarray = Field(repr=False)
    order_exponent: int
    values: np.ndarray = Field(repr=False)
    conductor: int
    is_primitive: bool
    is_principal: bool

    @property
    def label(self) -> str:
        return f"{self.modulus}:{self.index}"

    def __call__(self, n) -> complex | np.ndarray:
        return self.values[np.mod(n, self.modulus)]

    def parity(self) -> int:
        """χ(−1) as ±1."""
        return 1 if self.phases[(self.modulus - 1) % self.modulus] == 0 else -1

    def is_real(self) -> bool:
        return bool(np.all((2 * self.phases[self.phases >= 0]) % self.order_exponent == 0))


class CharacterRow(WorkbenchModel):
    label: str
    conductor: int
    is_primitive: bool
    is_principal: bool
    parity: int
    gauss_sum_re: float
    gauss_sum_im: float
    gauss_sum_abs: float


class CharacterSummary(WorkbenchModel):
    modulus: int
    count: int
    primitive_count: int
    rows: List[CharacterRow]
