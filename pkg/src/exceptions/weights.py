from src.exceptions import ToleranceError, WorkbenchError


class WeightError(WorkbenchError):
    """Base exception for test function errors"""

    pass


class WeightArgumentError(WeightError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class CertificateViolation(ToleranceError):
    """Raised when a finite-difference derivative exceeds its certified bound"""

    def __init__(self, order: tuple[int, int], point: tuple[float, float], value: float, bound: float):
        super().__init__(
            f"Derivative {order} at {point} is {value:.6g}, above the certified bound {bound:.6g}.",
            {"order": list(order), "point": list(point), "value": value, "bound": bound},
        )
