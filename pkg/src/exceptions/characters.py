from src.exceptions import WorkbenchError


class CharacterError(WorkbenchError):
    """Base exception for Dirichlet character errors"""

    pass


class CharacterLabelError(CharacterError):
    """Raised when a 'q:index' label cannot be resolved"""

    def __init__(self, label: str, reason: str):
        super().__init__(
            f"Invalid character label '{label}': {reason}",
            {"label": label},
        )


class CharacterModulusError(CharacterError):
    def __init__(self, expected: int, got: int):
        super().__init__(
            f"Character modulus {got} does not match the required modulus {expected}.",
            {"expected": expected, "got": got},
        )
