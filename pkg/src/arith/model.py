from pydantic import model_validator

from src.schemas.base import WorkbenchModel


class Residue(WorkbenchModel):
    value: int
    modulus: int

    @model_validator(mode="after")
    def _reduced(self):
        if self.modulus < 1 or not 0 <= self.value < self.modulus:
            raise ValueError(f"{self.value} is not a reduced residue mod {self.modulus}")
        return self

    def __int__(self) -> int:
        return self.value


class UnitComplex(WorkbenchModel):
    re: float
    im: float

    def __complex__(self) -> complex:
        return complex(self.re, self.im)
