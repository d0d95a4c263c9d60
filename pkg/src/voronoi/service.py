from math import ceil, log, pi, sqrt
import logging

import numpy as np

from src.arith.service import e_q_array, euler_gamma, mod_inverse
from src.bessel.model import KernelFamily, KernelSpec, Representation
from src.bessel.service import kernel_array
from src.coeffs.model import CoefficientSource, SourceKind
from src.coeffs.service import nebentypus_character, rs_local_average
from src.exceptions.voronoi import (
    TransformQuadratureError,
    TruncationBudgetError,
    VoronoiArgumentError,
    VoronoiResidualError,
)
from src.utils.pool import block_sum
from src.utils.quadrature import PANEL_ORDER, composite_gauss_legendre
from src.voronoi.model import TruncationChoice, VoronoiInstance, VoronoiResult
from src.weights.model import SmoothWeight1D

logger = logging.getLogger(__name__)

Y_CHUNK = 2048
# entries of one kernel matrix block
MAX_BLOCK = 4_000_000
PROBES_PER_OCTAVE = 8
RESIDUAL_FLOOR = 1e-12


class BesselTransform:
    """
    y ↦ prefactor·∫ g(x)·kernel(4π√(xy)/q) dx on composite Gauss-Legendre
    panels fitted to the kernel's oscillation over supp g. Kernel values are
    memoized inside each call only.
    """

    def __init__(
        self,
        g: SmoothWeight1D,
        q: int,
        spec: KernelSpec,
        prefactor: complex,
        tolerance: float = 1e-10,
        representation: Representation = Representation.anchor,
    ):
        self.g = g
        self.q = q
        self.spec = spec
        self.prefactor = prefactor
        self.tolerance = tolerance
        self.representation = representation

    def _panels(self, y_max: float, extra: float = 1.0) -> int:
        lo, hi = self.g.support
        # the kernel phase 4π√(xy)/q turns at rate 2π√(y/x)/q in x
        omega = 2 * pi * sqrt(y_max / lo) / self.q
        smooth = 8 * (hi - lo) * self.g.derivative_scale
        return int(ceil(extra * ((hi - lo) * omega / (2 * pi) + smooth))) + 4

    def _integrate(self, y: np.ndarray, panels: int) -> np.ndarray:
        nodes, weights = composite_gauss_legendre(*self.g.support, panels)
        weighted = weights * self.g(nodes)
        argument = 4 * pi * np.sqrt(np.outer(y, nodes)) / self.q
        return self.prefactor * (kernel_array(self.spec, argument, self.representation) @ weighted)

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        if np.any(y <= 0):
            raise VoronoiArgumentError("transforms are evaluated at y > 0 only")
        out = np.zeros(y.size, dtype=complex if np.iscomplexobj(np.asarray(self.prefactor)) else np.float64)
        for start in range(0, y.size, Y_CHUNK):
            chunk = y[start : start + Y_CHUNK]
            panels = self._panels(float(chunk.max()))
            rows = max(1, MAX_BLOCK // (panels * PANEL_ORDER))
            for offset in range(0, chunk.size, rows):
                out[start + offset : start + offset + rows] = self._integrate(chunk[offset : offset + rows], panels)
            self._refinement_check(chunk, out[start : start + Y_CHUNK], panels)
        return out

    def _refinement_check(self, chunk: np.ndarray, values: np.ndarray, panels: int) -> None:
        probe = int(np.argmax(chunk))
        refined = self._integrate(chunk[probe : probe + 1], panels + panels // 2 + 1)[0]
        scale = max(1.0, float(np.max(np.abs(values))))
        achieved = abs(refined - values[probe]) / scale
        if achieved > self.tolerance:
            logger.error(f"Transform quadrature at y={chunk[probe]:.6g} missed its tolerance: {achieved:.3e}")
            raise TransformQuadratureError(float(chunk[probe]), achieved, self.tolerance)


def transform_g_hat(
    g: SmoothWeight1D,
    q: int,
    k: int,
    tolerance: float = 1e-10,
    representation: Representation = Representation.anchor,
) -> BesselTransform:
    """ĝ(y) = (2πi^k/q)∫g(x)J_{k−1}(4π√(xy)/q)dx; real for even k."""
    if k < 1:
        raise VoronoiArgumentError(f"weight k must be positive, got {k}", k=k)
    i_power = (1, 1j, -1, -1j)[k % 4]
    prefactor = 2 * pi * i_power / q
    if k % 2 == 0:
        prefactor = prefactor.real
    return BesselTransform(g, q, KernelSpec(family=KernelFamily.J, order=k - 1), prefactor, tolerance, representation)


def transform_g_pm(
    g: SmoothWeight1D,
    q: int,
    mu: float,
    sign: int,
    tolerance: float = 1e-10,
    representation: Representation = Representation.anchor,
) -> BesselTransform:
    """
    g^+(y) = (4cosh πμ/q)∫g K_{2iμ} and g^−(y) = −(π/(q cosh πμ))∫g {Y_{2iμ} + Y_{−2iμ}},
    both at 4π√(xy)/q; the kernels M^± already carry the cosh factors.
    """
    if mu < 0:
        raise VoronoiArgumentError(f"mu must be non-negative, got {mu}", mu=mu)
    if sign not in (1, -1):
        raise VoronoiArgumentError(f"sign must be ±1, got {sign}", sign=sign)
    family = KernelFamily.Mplus if sign > 0 else KernelFamily.Mminus
    return BesselTransform(g, q, KernelSpec(family=family, order=mu), 1.0 / q, tolerance, representation)


def divisor_main_term(g: SmoothWeight1D, q: int) -> float:
    """(1/q)∫(log(x/q²) + 2γ)g(x)dx, the polar term of the divisor analog."""
    lo, hi = g.support
    nodes, weights = composite_gauss_legendre(lo, hi, 16 + int(8 * (hi - lo) * g.derivative_scale))
    integrand = (np.log(nodes / q**2) + 2 * euler_gamma()) * g(nodes)
    return float(np.dot(weights, integrand) / q)


def _dual_families(source: CoefficientSource, q: int, g, tolerance):
    """(transform, coefficient sign, phase sign) for each family of the dual side."""
    if source.kind == SourceKind.holomorphic:
        return [(transform_g_hat(g, q, source.weight, tolerance), 1, -1)]
    mu = source.mu or 0.0
    return [
        (transform_g_pm(g, q, mu, -1, tolerance), 1, -1),
        (transform_g_pm(g, q, mu, +1, tolerance), source.reflection_sign, +1),
    ]


def _transition_point(transforms: list) -> float:
    """Smallest y past which every kernel argument exceeds its order by 10 over supp g."""
    points = []
    for transform in transforms:
        nu = transform.spec.order if transform.spec.family == KernelFamily.J else 2 * transform.spec.order
        points.append((transform.q * (nu + 10) / (4 * pi)) ** 2 / transform.g.support[0])
    return max(points, default=1.0)


def choose_m_cut(
    source: CoefficientSource,
    transforms: list,
    scale: float,
    tolerance: float = 1e-10,
    m_limit: int | None = None,
) -> TruncationChoice:
    """
    Probes the transforms octave by octave on a geometric grid and takes the
    smallest probe y with sup_{y' ≥ y}|transform(y')|·(local RMS of λ near y)·y
    below tolerance·scale, doubled. Probing stops after two quiet octaves.
    """
    m_limit = m_limit or source.m_max
    count = int(PROBES_PER_OCTAVE * np.log2(max(m_limit, 2))) + 1
    grid = np.unique(np.floor(np.geomspace(1, m_limit, count)).astype(np.int64))
    target = tolerance * scale

    probes: list[int] = []
    tails: list[float] = []
    envelope: list[float] = []
    quiet = 0
    for start in range(0, grid.size, PROBES_PER_OCTAVE):
        octave = grid[start : start + PROBES_PER_OCTAVE]
        values = np.zeros(octave.size)
        for transform in transforms:
            values = values + np.abs(transform(octave))
        rms = np.array([rs_local_average(source, float(y)) for y in octave])
        probes.extend(int(y) for y in octave)
        envelope.extend(values)
        tails.extend(values * rms * octave)
        if octave[0] >= _transition_point(transforms):
            quiet = quiet + 1 if max(tails[-octave.size :]) < target else 0
        if quiet >= 2:
            break

    probes_array = np.array(probes)
    suffix = np.maximum.accumulate(np.array(envelope)[::-1])[::-1]
    rms = np.array([rs_local_average(source, float(y)) for y in probes_array])
    bounds = suffix * rms * probes_array

    below = np.flatnonzero(bounds < target)
    if below.size == 0 or 2 * probes_array[below[0]] > m_limit:
        tail = float(bounds[below[0]]) if below.size else float(bounds[-1])
        logger.error(f"No truncation within m ≤ {m_limit} meets {target:.3e} (tail {tail:.3e})")
        raise TruncationBudgetError(m_limit, tail, target)
    index = int(below[0])
    m_cut = int(max(2, 2 * probes_array[index]))
    logger.debug(f"m_cut = {m_cut}, tail estimate {bounds[index]:.3e}")
    return TruncationChoice(m_cut=m_cut, tail_estimate=float(bounds[index]), target=target)


def _lhs(instance: VoronoiInstance) -> tuple[complex, float]:
    source, g, q, d = instance.source, instance.g, instance.q, instance.d
    lo, hi = g.support
    m = np.arange(max(1, int(np.floor(lo))), int(np.ceil(hi)) + 1, dtype=np.int64)
    source.require(int(m[-1]) if m.size else 1)
    terms = source.coeffs[m] * e_q_array(d * m, q) * g(m.astype(np.float64))
    chi = nebentypus_character(source)
    return complex(chi(d) * block_sum(terms)), float(np.sum(np.abs(terms)))


def _rhs(instance: VoronoiInstance, families, m_cut: int) -> tuple[complex, float]:
    source, q = instance.source, instance.q
    d_bar = mod_inverse(instance.d, q).value
    source.require(m_cut, "phi (dual side)")
    m = np.arange(1, m_cut + 1, dtype=np.int64)
    total, absolute = 0j, 0.0
    for transform, coefficient_sign, phase_sign in families:
        terms = coefficient_sign * source.coeffs[m] * e_q_array(phase_sign * d_bar * m, q) * transform(m)
        total += complex(block_sum(terms))
        absolute += float(np.sum(np.abs(terms)))
    return total, absolute


def voronoi_residual(instance: VoronoiInstance, target: float | None = None) -> VoronoiResult:
    """
    Both sides of the Voronoi formula for one (q, d). The dual side is cut at
    `instance.m_cut` or at the measured truncation point; the divisor analog
    carries its polar main term on the dual side. Raises when `target` is
    given and the residual exceeds it.
    """
    source, q = instance.source, instance.q
    logger.info(f"Voronoi check for {source.name or source.kind} with q={q}, d={instance.d}")
    lhs, lhs_absolute = _lhs(instance)
    if not np.any(instance.g(np.linspace(*instance.g.support, 257)) != 0):
        return VoronoiResult(q=q, d=instance.d, lhs=lhs, rhs=0j, residual=0.0, m_cut=1, tail_estimate=0.0)

    families = _dual_families(source, q, instance.g, instance.quadrature_tolerance)
    main_term = divisor_main_term(instance.g, q) if source.kind == SourceKind.divisor else None

    scale = max(abs(lhs), np.finfo(float).eps * lhs_absolute, RESIDUAL_FLOOR)
    if instance.m_cut is not None:
        m_cut, tail = instance.m_cut, float("nan")
    else:
        choice = choose_m_cut(source, [family[0] for family in families], scale, instance.truncation_tolerance)
        m_cut, tail = choice.m_cut, choice.tail_estimate

    rhs, rhs_absolute = _rhs(instance, families, m_cut)
    if main_term is not None:
        rhs += main_term

    scale = max(abs(lhs), np.finfo(float).eps * (lhs_absolute + rhs_absolute), RESIDUAL_FLOOR)
    residual = abs(lhs - rhs) / scale
    logger.info(f"Voronoi residual {residual:.3e} with m_cut={m_cut}")
    if target is not None and residual > target:
        raise VoronoiResidualError(residual, target, q, instance.d)
    return VoronoiResult(
        q=q,
        d=instance.d,
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        m_cut=m_cut,
        tail_estimate=tail,
        main_term=main_term,
    )


def decay_exponent(transform: BesselTransform, y0: float, factor: float = 100.0, samples: int = 64) -> float:
    """
    −log(envelope near factor·y0 / envelope near y0)/log(factor), with the
    envelope the maximum of |transform| over [y, 2y].
    """
    near = np.linspace(y0, 2 * y0, samples)
    far = np.linspace(factor * y0 / 2, factor * y0, samples)
    start = float(np.max(np.abs(transform(near))))
    end = max(float(np.max(np.abs(transform(far)))), np.finfo(float).tiny)
    return -log(end / start) / log(factor)

