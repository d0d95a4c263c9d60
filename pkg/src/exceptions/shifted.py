from src.exceptions import ToleranceError, WorkbenchError


class ShiftedSumError(WorkbenchError):
    """Base exception for shifted convolution sum errors"""

    pass


class ShiftedSpecError(ShiftedSumError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class MainTermSourceError(ShiftedSumError):
    """Raised when the divisor main term is requested for a cusp form"""

    def __init__(self, kind: str):
        super().__init__(
            f"The main term exists only for the divisor analog, got a {kind} source.",
            {"kind": kind},
        )


class ScaleRatioError(ToleranceError):
    """Raised when a cusp-form sweep row leaves the band around the power-saving scale"""

    def __init__(self, row: dict, limit: float):
        super().__init__(
            f"|D|/scale = {row['ratio_th1']:.6g} reached {limit:g} at X={row['X']:g}, Y={row['Y']:g}, "
            f"(a, b, h) = ({row['a']}, {row['b']}, {row['h']}).",
            {**row, "limit": limit},
        )
