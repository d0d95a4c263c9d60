from src.exceptions import ToleranceError, WorkbenchError


class LFunctionError(WorkbenchError):
    """Base exception for twisted L-function errors"""

    pass


class LValueArgumentError(LFunctionError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class UnsupportedSourceError(LFunctionError):
    """Raised when the approximate functional equation has no gamma data for a source"""

    def __init__(self, kind: str, level: int):
        super().__init__(
            f"No approximate functional equation for a {kind} source of level {level} "
            "without a root number in its header.",
            {"kind": kind, "level": level},
        )


class RootNumberError(ToleranceError):
    def __init__(self, value: complex):
        super().__init__(
            f"Root number {value:.12g} does not have modulus 1.",
            {"re": value.real, "im": value.imag},
        )


class AfeWeightDisagreement(ToleranceError):
    def __init__(self, label: str, difference: float, target: float):
        super().__init__(
            f"Two admissible cutoffs disagree by {difference:.3e} for {label} (target {target:.3e}).",
            {"character_label": label, "difference": difference, "target": target},
        )


class AmplifierIdentityError(ToleranceError):
    """Raised when two evaluations of the amplified moment or of D(h) disagree"""

    def __init__(self, quantity: str, first: float, second: float, target: float):
        super().__init__(
            f"{quantity}: {first:.12g} against {second:.12g} (target {target:.3e}).",
            {"quantity": quantity, "first": first, "second": second, "target": target},
        )
