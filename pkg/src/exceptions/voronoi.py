from src.exceptions import ToleranceError, WorkbenchError


class VoronoiError(WorkbenchError):
    """Base exception for Voronoi summation errors"""

    pass


class VoronoiArgumentError(VoronoiError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class TransformQuadratureError(VoronoiError):
    """Raised when a Bessel transform does not converge under panel refinement"""

    def __init__(self, y: float, achieved: float, target: float):
        super().__init__(
            f"Transform at y={y:.6g} reached error {achieved:.3e}, target {target:.3e}.",
            {"y": y, "achieved": achieved, "target": target},
        )


class TruncationBudgetError(ToleranceError):
    """Raised when the dual sum cannot be truncated within the available coefficients"""

    def __init__(self, m_limit: int, tail: float, target: float):
        super().__init__(
            f"Dual sum not truncated below {target:.3e} before m={m_limit}: measured tail {tail:.3e}.",
            {"m_limit": m_limit, "tail": tail, "target": target},
        )


class VoronoiResidualError(ToleranceError):
    def __init__(self, residual: float, target: float, q: int, d: int):
        super().__init__(
            f"Voronoi residual {residual:.3e} above {target:.3e} for q={q}, d={d}.",
            {"residual": residual, "target": target, "q": q, "d": d},
        )
