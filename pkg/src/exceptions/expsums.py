from src.exceptions import ToleranceError, WorkbenchError


class ExpSumError(WorkbenchError):
    """Base exception for exponential sum errors"""

    pass


class WeilBoundViolation(ToleranceError):
    """Raised when a twisted Kloosterman sum exceeds the Weil-Estermann bound"""

    def __init__(self, witness: dict):
        super().__init__(
            f"Weil-Estermann bound violated at q={witness['q']}, "
            f"character {witness['character_label']}, (m, n) = ({witness['m']}, {witness['n']}): "
            f"ratio {witness['ratio']:.12g}.",
            witness,
        )


class KloostermanArgumentError(ExpSumError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)
