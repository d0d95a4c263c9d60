from enum import StrEnum

from pydantic import model_validator

from src.schemas.base import WorkbenchModel


class KernelFamily(StrEnum):
    J = "J"
    Mplus = "Mplus"
    Mminus = "Mminus"


class Representation(StrEnum):
    integral = "integral"
    anchor = "anchor"


class KernelSpec(WorkbenchModel):
    """
    J with integer order n (J_n), or M^± with real μ ≥ 0 standing for the
    imaginary order 2iμ.
    """

    family: KernelFamily
    order: float = 0.0

    @model_validator(mode="after")
    def _check_order(self):
        if self.order < 0:
            raise ValueError(f"kernel order must be non-negative, got {self.order}")
        if self.family == KernelFamily.J and self.order != int(self.order):
            raise ValueError(f"J kernels need an integer order, got {self.order}")
        return self

    @property
    def n(self) -> int:
        return int(self.order)

    @property
    def mu(self) -> float:
        return float(self.order)


class DecayReport(WorkbenchModel):
    family: KernelFamily
    order: float
    sup_scaled: float
    argmax: float
    decreasing: bool
    constant: float | None = None
