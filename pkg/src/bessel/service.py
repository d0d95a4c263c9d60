"""
Bessel kernels of the Voronoi formula.

Integral representations (the default for scalar evaluation):

    J_n(x)     = (1/2π)∫_0^{2π} cos(nθ − x sinθ)dθ, by the periodic trapezoid rule
    K_{2iμ}(x) = ∫_0^∞ e^{−x cosh t} cos(2μt)dt, by the trapezoid rule on the line
    M^+(x)     = 4cosh(πμ)·K_{2iμ}(x)
    M^−(x)     = −(π/cosh πμ)(Y_{2iμ} + Y_{−2iμ})(x)
               = −(2/cosh πμ)∫_0^π sin(x sinθ)cosh(2μθ)dθ + 4cosh(πμ)∫_0^∞ cos(2μt)e^{−x sinh t}dt

the last one from Schläfli's integral for Y_ν summed over ±ν; at μ = 0 it is
−2πY_0. The anchor representation uses scipy.special at μ = 0 and mpmath for
μ > 0, and serves as the independent cross-check.
"""
from math import acosh, asinh, cbrt, ceil, cosh, pi
import logging

import mpmath
import numpy as np
from scipy import integrate, special

from src.bessel.model import DecayReport, KernelFamily, KernelSpec, Representation
from src.exceptions.bessel import KernelArgumentError, KernelDecayError, KernelQuadratureError
from src.utils.quadrature import composite_gauss_legendre

logger = logging.getLogger(__name__)

HALF_LINE_TOLERANCE = 1e-10
# e^{−40} relative truncation of the exponentially decaying integrands
DECAY_MARGIN = 40.0


def _check_argument(x: float) -> None:
    if not x > 0:
        raise KernelArgumentError(f"kernel argument must be positive, got {x}", x=x)


def bessel_j(n: int, x: float) -> float:
    nodes = int(x + n + 12 * cbrt(x) + 64)
    theta = 2 * pi * np.arange(nodes) / nodes
    return float(np.mean(np.cos(n * theta - x * np.sin(theta))))


def bessel_k_imaginary(mu: float, x: float) -> float:
    """K_{2iμ}(x); even in μ since only cos(2μt) enters."""
    _check_argument(x)
    mu = abs(mu)
    t_max = acosh(1.0 + (DECAY_MARGIN + pi * mu) / x)
    h = pi**2 / (DECAY_MARGIN + x + 2 * pi * mu)
    count = int(ceil(t_max / h))
    t = h * np.arange(count + 1)
    values = np.exp(-x * (np.cosh(t) - 1.0)) * np.cos(2 * mu * t)
    values[0] *= 0.5
    return float(h * np.sum(values) * np.exp(-x))


def _mminus_integral(mu: float, x: float) -> float:
    panels = int(ceil(x / 2)) + 8
    theta, weights = composite_gauss_legendre(0.0, pi, panels)
    oscillatory = float(np.dot(weights, np.sin(x * np.sin(theta)) * np.cosh(2 * mu * theta)))

    t_max = asinh((DECAY_MARGIN + 1.0) / x)
    half_line, abserr = integrate.quad(
        lambda t: np.cos(2 * mu * t) * np.exp(-x * np.sinh(t)),
        0.0,
        t_max,
        epsabs=1e-15,
        epsrel=1e-13,
        limit=400,
    )
    if abserr > HALF_LINE_TOLERANCE:
        raise KernelQuadratureError("Mminus", x, abserr, HALF_LINE_TOLERANCE)
    return -2.0 / cosh(pi * mu) * oscillatory + 4.0 * cosh(pi * mu) * half_line


def eval_kernel(spec: KernelSpec, x: float) -> float:
    _check_argument(x)
    if spec.family == KernelFamily.J:
        return bessel_j(spec.n, x)
    if spec.family == KernelFamily.Mplus:
        return 4.0 * cosh(pi * spec.mu) * bessel_k_imaginary(spec.mu, x)
    return _mminus_integral(spec.mu, x)


def _anchor_scalar(spec: KernelSpec, x: float) -> float:
    mu = spec.mu
    if spec.family == KernelFamily.Mplus:
        return float(4.0 * cosh(pi * mu) * mpmath.re(mpmath.besselk(2j * mu, x)))
    # Y_{−2iμ}(x) is the conjugate of Y_{2iμ}(x) for real x
    return float(-2.0 * pi / cosh(pi * mu) * mpmath.re(mpmath.bessely(2j * mu, x)))


def _anchor_array(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    if spec.family == KernelFamily.J:
        return special.jv(spec.n, x)
    if spec.mu == 0.0:
        if spec.family == KernelFamily.Mplus:
            return 4.0 * special.k0(x)
        return -2.0 * pi * special.y0(x)
    return np.array([_anchor_scalar(spec, float(value)) for value in x])


def kernel_array(spec: KernelSpec, x, representation: Representation = Representation.anchor) -> np.ndarray:
    """
    Kernel values on an array of abscissae. Repeated abscissae are evaluated
    once per call.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size and not np.all(x > 0):
        raise KernelArgumentError("kernel arguments must be positive", minimum=float(np.min(x)))
    unique, inverse = np.unique(x, return_inverse=True)
    if representation == Representation.anchor:
        values = _anchor_array(spec, unique)
    else:
        values = np.array([eval_kernel(spec, float(value)) for value in unique])
    return values[inverse].reshape(x.shape)


def kernel_decay_check(
    spec: KernelSpec,
    x_grid,
    constant: float | None = None,
    representation: Representation = Representation.integral,
) -> DecayReport:
    """
    sup over the grid (x ≥ 1) of |kernel(x)|·√x. Raises when a constant is
    given and the supremum exceeds it.
    """
    x_grid = np.asarray(x_grid, dtype=np.float64)
    if x_grid.size == 0 or np.any(np.diff(x_grid) <= 0) or x_grid[0] <= 0:
        raise KernelArgumentError("x_grid must be positive and strictly increasing")
    x_grid = x_grid[x_grid >= 1.0] if np.any(x_grid >= 1.0) else x_grid

    scaled = np.abs(kernel_array(spec, x_grid, representation)) * np.sqrt(x_grid)
    index = int(np.argmax(scaled))
    report = DecayReport(
        family=spec.family,
        order=spec.order,
        sup_scaled=float(scaled[index]),
        argmax=float(x_grid[index]),
        decreasing=bool(np.all(np.diff(scaled) <= 0)),
        constant=constant,
    )
    logger.debug(f"Decay check {spec.family}({spec.order}): sup {report.sup_scaled:.6g} at {report.argmax:.6g}")
    if constant is not None and report.sup_scaled > constant:
        raise KernelDecayError(spec.family.value, report.sup_scaled, report.argmax, constant)
    return report
