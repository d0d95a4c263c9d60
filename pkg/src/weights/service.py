"""
Smooth compactly supported weights built from the single mollifier
m(t) = exp(−s/t) (t > 0), with s the steepness.
"""
from math import log2, sqrt
import logging

import numpy as np

from src.exceptions.weights import CertificateViolation, WeightArgumentError
from src.utils.quadrature import composite_gauss_legendre, derivative_1d, derivative_2d
from src.weights.model import (
    BoundPattern,
    CertificateCheck,
    CertificateRow,
    DyadicPiece,
    MixedNorm,
    SmoothWeight1D,
    SmoothWeight2D,
    WeightCertificate,
)

logger = logging.getLogger(__name__)

SQRT2 = sqrt(2.0)
CERTIFICATE_SAFETY = 1.5
CERTIFICATE_GRID = 48
VERIFY_GRID = 10
MAX_ORDER = 2
MAX_GRID = 192
# finite-difference step as a fraction of the local length scale
STEP_FRACTION = 1e-3


# --- Partition of unity ---


def _mollifier(t: np.ndarray, steepness: float) -> np.ndarray:
    positive = t > 0
    return np.where(positive, np.exp(-steepness / np.where(positive, t, 1.0)), 0.0)


def bump_eta(steepness: float = 1.0):
    """η: 0 on (0, 1], 1 on [√2, ∞), smooth in between."""

    def eta(x):
        x = np.asarray(x, dtype=np.float64)
        rise = _mollifier(x - 1.0, steepness)
        fall = _mollifier(SQRT2 - x, steepness)
        return rise / (rise + fall)

    return eta


def rho(x, steepness: float = 1.0) -> np.ndarray:
    """ρ(x) = η(x) for x ≤ √2 and 1 − η(x/√2) beyond; supported in [1, 2]."""
    eta = bump_eta(steepness)
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= SQRT2, eta(x), 1.0 - eta(x / SQRT2))


def partition_sum(x, k_range: int = 40, steepness: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return sum(rho(2.0 ** (-k / 2) * x, steepness) for k in range(-k_range, k_range + 1))


# --- One-variable weights ---


def make_interval_bump(lo: float, hi: float, steepness: float = 1.0, certify_now: bool = True) -> SmoothWeight1D:
    """The ρ-bump moved affinely onto [lo, hi]."""
    if not 0 <= lo < hi:
        raise WeightArgumentError(f"need 0 ≤ lo < hi, got [{lo}, {hi}]", lo=lo, hi=hi)
    width = hi - lo
    weight = SmoothWeight1D(
        evaluator=lambda x: rho(1.0 + (np.asarray(x) - lo) / width, steepness),
        support=(lo, hi),
        derivative_scale=1.0 / width,
    )
    return weight.model_copy(update={"certificate": certify(weight)}) if certify_now else weight


def redundant_factor(delta: float):
    """w(t) = β(δt) with β(u) = exp(1 − 1/(1 − u²)) on |u| < 1; w(0) = 1, supp w = (−1/δ, 1/δ)."""

    def w(t):
        u = delta * np.asarray(t, dtype=np.float64)
        inside = np.abs(u) < 1.0
        u_safe = np.where(inside, u, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - u_safe**2)), 0.0)

    return w


# --- Two-variable weights ---


def _oscillation(P: float, phase_x, phase_y):
    if P <= 1:
        return 1.0
    return 0.5 * (1.0 + 0.5 * np.sin(phase_x) * np.sin(phase_y))


def make_box_weight(A: float, B: float, P: float = 1.0, steepness: float = 1.0, certify_now: bool = True) -> SmoothWeight2D:
    """
    g(x, y) = ρ(x/A)ρ(y/B), modulated by ½(1 + ½ sin(πPx/A) sin(πPy/B)) when
    P > 1; supported in [A, 2A] × [B, 2B].
    """
    if A < 0.5 or B < 0.5 or P < 1:
        raise WeightArgumentError(f"need A, B ≥ 1/2 and P ≥ 1, got A={A}, B={B}, P={P}", A=A, B=B, P=P)

    def g(x, y):
        base = rho(x / A, steepness) * rho(y / B, steepness)
        return base * _oscillation(P, np.pi * P * x / A, np.pi * P * y / B)

    weight = SmoothWeight2D(
        evaluator=g, x_support=(A, 2 * A), y_support=(B, 2 * B), pattern=BoundPattern.box, P=P, A=A, B=B
    )
    return weight.model_copy(update={"certificate": certify(weight)}) if certify_now else weight


def make_eq1_weight(P: float, X: float, Y: float, steepness: float = 1.0, certify_now: bool = True) -> SmoothWeight2D:
    """
    A weight of the x^i y^j f^{(i,j)} ≪ (1 + x/X)^{−1}(1 + y/Y)^{−1} P^{i+j}
    class, compactly supported in [X/2, 4X] × [Y/2, 4Y] and oscillating on
    the logarithmic scale 1/P.
    """
    if P < 1 or X < 1 or Y < 1:
        raise WeightArgumentError(f"need P, X, Y ≥ 1, got P={P}, X={X}, Y={Y}", P=P, X=X, Y=Y)
    eta = bump_eta(steepness)

    def plateau(t):
        return eta(2.0 * t) * (1.0 - eta(t / (2.0 * SQRT2)))

    def f(x, y):
        base = plateau(x / X) * plateau(y / Y)
        return base * _oscillation(P, P * np.log(x / X), P * np.log(y / Y))

    weight = SmoothWeight2D(
        evaluator=f, x_support=(X / 2, 4 * X), y_support=(Y / 2, 4 * Y), pattern=BoundPattern.eq1, P=P, X=X, Y=Y
    )
    return weight.model_copy(update={"certificate": certify(weight)}) if certify_now else weight


def attach_redundant_factor(
    g: SmoothWeight2D, h: int, delta: float, sign: int = -1, certify_now: bool = True
) -> SmoothWeight2D:
    """F(x, y) = g(x, y)·w(x ± y − h), certified against F^{(i,j)} ≪ δ^{i+j}; sign −1 is x − y − h."""
    if delta <= 0:
        raise WeightArgumentError(f"delta must be positive, got {delta}", delta=delta)
    w = redundant_factor(delta)

    def F(x, y):
        return g(x, y) * w(np.asarray(x) + sign * np.asarray(y) - h)

    weight = g.model_copy(
        update={"evaluator": F, "pattern": BoundPattern.delta, "delta": delta, "shift": h, "certificate": None}
    )
    return weight.model_copy(update={"certificate": certify(weight)}) if certify_now else weight


def tensor_weight(k: SmoothWeight1D, a: float, b: float) -> SmoothWeight2D:
    """f(x, y) = k(x/a)·k(y/b)."""
    lo, hi = k.support

    def f(x, y):
        return k(np.asarray(x) / a) * k(np.asarray(y) / b)

    A, B = a * lo, b * lo
    return SmoothWeight2D(
        evaluator=f,
        x_support=(a * lo, a * hi),
        y_support=(b * lo, b * hi),
        pattern=BoundPattern.box,
        A=max(A, 0.5),
        B=max(B, 0.5),
    )


def dyadic_decompose(f: SmoothWeight2D, steepness: float = 1.0) -> list[DyadicPiece]:
    """
    f_{k,l}(x, y) = f(x, y)ρ(x/A_k)ρ(y/B_l), A_k = 2^{k/2}X, B_l = 2^{l/2}Y,
    keeping the pieces whose box meets the support of f.
    """
    if f.X is None or f.Y is None:
        raise WeightArgumentError("dyadic decomposition needs the X, Y parameters of the weight")
    X, Y = f.X, f.Y

    def index_range(support: tuple[float, float], scale: float) -> range:
        lo, hi = support
        return range(int(np.floor(2 * log2(lo / scale))) - 2, int(np.ceil(2 * log2(hi / scale))) + 1)

    pieces = []
    for k in index_range(f.x_support, X):
        A_k = 2.0 ** (k / 2) * X
        if 2 * A_k <= f.x_support[0] or A_k >= f.x_support[1]:
            continue
        for l in index_range(f.y_support, Y):
            B_l = 2.0 ** (l / 2) * Y
            if 2 * B_l <= f.y_support[0] or B_l >= f.y_support[1]:
                continue

            def piece(x, y, A_k=A_k, B_l=B_l):
                return f(x, y) * rho(np.asarray(x) / A_k, steepness) * rho(np.asarray(y) / B_l, steepness)

            weight = SmoothWeight2D(
                evaluator=piece,
                x_support=(max(A_k, f.x_support[0]), min(2 * A_k, f.x_support[1])),
                y_support=(max(B_l, f.y_support[0]), min(2 * B_l, f.y_support[1])),
                pattern=BoundPattern.box,
                P=f.P,
                A=max(A_k, 0.5),
                B=max(B_l, 0.5),
            )
            pieces.append(DyadicPiece(k=k, l=l, A_k=A_k, B_l=B_l, piece=weight))
    logger.debug(f"Dyadic decomposition produced {len(pieces)} pieces")
    return pieces


# --- Certificates ---


def _interior_grid(support: tuple[float, float], count: int, logarithmic: bool = False) -> np.ndarray:
    lo, hi = support
    if logarithmic:
        return np.exp(np.linspace(np.log(lo), np.log(hi), count + 2)[1:-1])
    return np.linspace(lo, hi, count + 2)[1:-1]


def _ratios_1d(weight: SmoothWeight1D, order: int, grid: int) -> np.ndarray:
    x = _interior_grid(weight.support, grid)
    h = STEP_FRACTION / weight.derivative_scale
    values = derivative_1d(weight, x, order, h)
    return np.abs(values) / weight.bound(order)


def _grid_size(weight: SmoothWeight2D, grid: int) -> tuple[int, int]:
    """At least `grid` points per axis and eight per length scale, capped."""
    lx, ly = weight.length_scales()
    nx = min(MAX_GRID, max(grid, int(8 * (weight.x_support[1] - weight.x_support[0]) / lx)))
    ny = min(MAX_GRID, max(grid, int(8 * (weight.y_support[1] - weight.y_support[0]) / ly)))
    return nx, ny


def _ratios_2d(weight: SmoothWeight2D, i: int, j: int, grid: int, offset: float = 0.0, adaptive: bool = False):
    logarithmic = weight.pattern == BoundPattern.eq1
    nx, ny = _grid_size(weight, grid) if adaptive and not logarithmic else (grid, grid)
    xs = _interior_grid(weight.x_support, nx, logarithmic)
    ys = _interior_grid(weight.y_support, ny, logarithmic)
    if offset:
        xs = xs + offset * (xs[1] - xs[0]) if xs.size > 1 else xs
        ys = ys + offset * (ys[1] - ys[0]) if ys.size > 1 else ys
    x, y = np.meshgrid(xs, ys, indexing="ij")
    lx, ly = weight.length_scales()
    if logarithmic:
        hx, hy = STEP_FRACTION * x / weight.P, STEP_FRACTION * y / weight.P
    else:
        hx, hy = STEP_FRACTION * lx, STEP_FRACTION * ly
    values = derivative_2d(weight, x, y, i, j, hx, hy)
    return np.abs(values) / weight.bound(i, j, x, y), x, y


def certify(weight: SmoothWeight1D | SmoothWeight2D, grid: int = CERTIFICATE_GRID) -> WeightCertificate:
    """
    Measured derivative constants for orders ≤ 2 on a dense interior grid,
    enlarged by the safety factor.
    """
    constants: dict[str, float] = {}
    if isinstance(weight, SmoothWeight1D):
        for order in range(MAX_ORDER + 1):
            constants[str(order)] = CERTIFICATE_SAFETY * float(np.max(_ratios_1d(weight, order, grid)))
    else:
        for i in range(MAX_ORDER + 1):
            for j in range(MAX_ORDER + 1):
                ratios, _, _ = _ratios_2d(weight, i, j, grid, adaptive=True)
                constants[f"{i},{j}"] = CERTIFICATE_SAFETY * float(np.max(ratios))
    return WeightCertificate(constants=constants, safety=CERTIFICATE_SAFETY, grid=grid)


def verify_certificate(
    weight: SmoothWeight1D | SmoothWeight2D, grid: int = VERIFY_GRID, raise_on_failure: bool = True
) -> CertificateCheck:
    """
    Re-measures the derivatives on a coarser grid, shifted off the
    certification grid, and compares with the stored constants.
    """
    certificate = weight.certificate or certify(weight)
    rows = []
    for key, constant in sorted(certificate.constants.items()):
        if isinstance(weight, SmoothWeight1D):
            ratios = _ratios_1d(weight, int(key), grid)
            point = (float(_interior_grid(weight.support, grid)[int(np.argmax(ratios))]), 0.0)
            order = (int(key), 0)
        else:
            i, j = (int(part) for part in key.split(","))
            ratios, x, y = _ratios_2d(weight, i, j, grid, offset=0.37)
            index = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
            point = (float(x[index]), float(y[index]))
            order = (i, j)
        max_ratio = float(np.max(ratios))
        passed = max_ratio <= constant * (1 + 1e-12) + 1e-300
        rows.append(CertificateRow(order=key, max_ratio=max_ratio, constant=constant, passed=passed))
        if not passed and raise_on_failure:
            logger.error(f"Certificate violated for order {key}: {max_ratio:.6g} > {constant:.6g}")
            raise CertificateViolation(order, point, max_ratio, constant)
    return CertificateCheck(rows=rows, passed=all(row.passed for row in rows))


# --- Norms ---


def l1_norm_mixed(F: SmoothWeight2D, i: int, j: int, panels: int = 24) -> MixedNorm:
    """
    ‖F^{(i,j)}‖₁ by tensor Gauss-Legendre panels over the support, compared
    with δ^{i+j−1}·AB/(A + B) for weights carrying the redundant factor.
    """
    x_nodes, x_weights = composite_gauss_legendre(*F.x_support, panels)
    y_nodes, y_weights = composite_gauss_legendre(*F.y_support, panels)
    x, y = np.meshgrid(x_nodes, y_nodes, indexing="ij")
    lx, ly = F.length_scales()
    values = derivative_2d(F, x, y, i, j, STEP_FRACTION * lx, STEP_FRACTION * ly)
    norm = float(x_weights @ np.abs(values) @ y_weights)

    A = F.A if F.A is not None else F.x_support[0]
    B = F.B if F.B is not None else F.y_support[0]
    delta = F.delta if F.delta is not None else F.P * (A + B) / (A * B)
    pattern = delta ** (i + j - 1) * A * B / (A + B)
    return MixedNorm(i=i, j=j, norm=norm, pattern=pattern, ratio=norm / pattern)

