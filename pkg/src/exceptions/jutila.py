from src.exceptions import ToleranceError, WorkbenchError


class JutilaError(WorkbenchError):
    """Base exception for circle method errors"""

    pass


class SchemeArgumentError(JutilaError):
    def __init__(self, reason: str, **context):
        super().__init__(reason, context)


class EmptyDenominatorSetError(JutilaError):
    """Raised when no modulus in [Q, 2Q] passes the congruence filter"""

    def __init__(self, q_lo: int, q_hi: int, N: int, a: int, b: int, h: int):
        super().__init__(
            f"No admissible denominator in [{q_lo}, {q_hi}] for N={N}, a={a}, b={b}, h={h}.",
            {"range": [q_lo, q_hi], "N": N, "a": a, "b": b, "h": h},
        )


class NyquistError(JutilaError):
    """Raised when the uniform grid is too coarse to integrate G exactly"""

    def __init__(self, n_points: int, threshold: int):
        super().__init__(
            f"n_points={n_points} does not exceed the Nyquist threshold {threshold}.",
            {"n_points": n_points, "threshold": threshold},
        )


class ArcMismatchError(ToleranceError):
    def __init__(self, d: int, q: int, transformed: complex, direct: complex, target: float):
        super().__init__(
            f"Transformed arc sum for {d}/{q} differs from the direct arc integral by "
            f"{abs(transformed - direct):.3e} (target {target:.3e}).",
            {"d": d, "q": q, "difference": abs(transformed - direct), "target": target},
        )


class L2BoundViolation(ToleranceError):
    """Raised when the exact L² error exceeds 10·δ^{−1}L^{−2}Q^{2.1}"""

    def __init__(self, Q: float, delta: float, value: float, bound: float):
        super().__init__(
            f"L² error {value:.6e} exceeds {bound:.6e} at Q={Q}, delta={delta}.",
            {"Q": Q, "delta": delta, "l2_exact": value, "bound": bound},
        )
