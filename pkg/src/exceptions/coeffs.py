from src.exceptions import WorkbenchError


class CoefficientError(WorkbenchError):
    """Base exception for coefficient source errors"""

    pass


class CoefficientFileError(CoefficientError):
    """Raised when a coefficient file is malformed"""

    def __init__(self, line: int, reason: str):
        super().__init__(f"Line {line}: {reason}", {"line": line})
        self.line = line


class CoefficientRangeError(CoefficientError):
    """Raised when a computation needs coefficients beyond m_max"""

    def __init__(self, required: int, available: int, slot: str = "phi"):
        super().__init__(
            f"Coefficients of {slot} needed up to m={required}, but only {available} are available.",
            {"slot": slot, "required": required, "available": available},
        )


class CoefficientArgumentError(CoefficientError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)
