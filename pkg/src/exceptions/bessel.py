from src.exceptions import ToleranceError, WorkbenchError


class BesselError(WorkbenchError):
    """Base exception for kernel evaluation errors"""

    pass


class KernelArgumentError(BesselError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class KernelQuadratureError(BesselError):
    """Raised when a kernel integral does not reach its tolerance"""

    def __init__(self, family: str, x: float, achieved: float, target: float):
        super().__init__(
            f"Quadrature for {family} at x={x:.6g} reached error {achieved:.3e}, target {target:.3e}.",
            {"family": family, "x": x, "achieved": achieved, "target": target},
        )


class KernelDecayError(ToleranceError):
    """Raised when |kernel(x)|·√x exceeds its configured constant"""

    def __init__(self, family: str, sup: float, argmax: float, constant: float):
        super().__init__(
            f"{family}: sup |kernel(x)|·√x = {sup:.6g} at x={argmax:.6g} exceeds {constant:.6g}.",
            {"family": family, "sup": sup, "argmax": argmax, "constant": constant},
        )
