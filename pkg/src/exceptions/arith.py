from src.exceptions import WorkbenchError


class ArithError(WorkbenchError):
    """Base exception for exact arithmetic errors"""

    pass


class NonCoprimeInverseError(ArithError):
    """Raised when a modular inverse is requested for a non-unit"""

    def __init__(self, d: int, q: int, g: int):
        super().__init__(
            f"No inverse of {d} mod {q}: gcd({d}, {q}) = {g}.",
            {"d": d, "q": q, "gcd": g},
        )


class ArithDomainError(ArithError):
    def __init__(self, name: str, value):
        super().__init__(
            f"{name} is outside the domain of the operation: {value}.",
            {name: value},
        )
