from typing import List, Optional

from pydantic import model_validator

from src.characters.model import DirichletCharacter
from src.schemas.base import WorkbenchModel


class KloostermanQuery(WorkbenchModel):
    m: int
    n: int
    q: int
    twist: Optional[DirichletCharacter] = None

    @model_validator(mode="after")
    def _twist_modulus(self):
        if self.q < 1:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.twist is not None and self.twist.modulus != self.q:
            raise ValueError(f"twist modulus {self.twist.modulus} differs from q={self.q}")
        return self


class WeilRow(WorkbenchModel):
    q: int
    character_label: str
    m: int
    n: int
    abs_sum: float
    bound: float
    ratio: float


class WeilScanResult(WorkbenchModel):
    q_max: int
    sample_size: int
    sums_checked: int
    max_ratio: float
    witness: Optional[WeilRow] = None
    rows: List[WeilRow]
