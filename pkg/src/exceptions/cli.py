from src.exceptions import WorkbenchError


class ConfigError(WorkbenchError):
    """Raised for malformed configuration files or flag combinations"""

    exit_code = 2

    def __init__(self, reason: str, **context):
        super().__init__(f"Invalid configuration: {reason}", context)
