class WorkbenchError(Exception):
    """Base exception for every failure raised by the workbench modules"""

    exit_code: int = 1

    def __init__(self, detail: str, context: dict | None = None):
        super().__init__(detail)
        self.detail = detail
        self.context = context or {}


class ToleranceError(WorkbenchError):
    """Base exception for asserted tolerances that were not met"""

    exit_code = 3
