from fractions import Fraction
from math import ceil, floor, gcd, log2, pi, sqrt
import logging

import numpy as np

from src.arith.service import e_q, euler_gamma, euler_phi, mod_inverse, reduced_residues
from src.bessel.model import KernelFamily, KernelSpec, Representation
from src.bessel.service import kernel_array
from src.coeffs.model import CoefficientSource, SourceKind
from src.coeffs.service import nebentypus_character
from src.exceptions.jutila import (
    ArcMismatchError,
    EmptyDenominatorSetError,
    L2BoundViolation,
    NyquistError,
    SchemeArgumentError,
)
from src.exceptions.voronoi import TruncationBudgetError
from src.expsums.service import twisted_kloosterman_row
from src.jutila.model import (
    BRANCH_PHASE,
    DELTA_RANGE_SLACK,
    ArcTotal,
    ArcTransform,
    BalancedParameters,
    BalanceScales,
    Branch,
    ComparisonRow,
    DensityReport,
    FrequencyTable,
    JutilaScheme,
    L2Row,
    StepFunction,
    WiltonRatio,
)
from src.shifted.model import ShiftedSumSpec
from src.shifted.service import divisor_main_term, shifted_sum_direct
from src.utils.pool import block_sum, ordered_map, tree_sum
from src.utils.quadrature import composite_gauss_legendre, gauss_legendre
from src.weights.model import BoundPattern, MixedNorm, SmoothWeight2D
from src.weights.service import l1_norm_mixed

logger = logging.getLogger(__name__)

# breakpoints closer than this are ordered exactly
TIE_GAP = 1e-9
# entries of one evaluation block
MAX_BLOCK = 4_000_000
START_CUT = 16
MAX_DUAL = 1 << 14
L2_BOUND_CONSTANT = 10.0
L2_BOUND_EXPONENT = 2.1


# --- Denominator set ---


def denominators(Q: float, N: int = 1, a: int = 1, b: int = 1, h: int = 1) -> list[int]:
    """{q ∈ [Q, 2Q]: Nab | q and (h, q) = (h, Nab)} by direct scan."""
    modulus = N * a * b
    target = gcd(h, modulus)
    return [q for q in range(ceil(Q), floor(2 * Q) + 1) if q % modulus == 0 and gcd(h, q) == target]


def build_scheme(Q: float, delta: float, N: int = 1, a: int = 1, b: int = 1, h: int = 1) -> JutilaScheme:
    if Q < 1:
        raise SchemeArgumentError(f"Q must be at least 1, got {Q}", Q=Q)
    if min(N, a, b, h) < 1:
        raise SchemeArgumentError("N, a, b and h must be positive", N=N, a=a, b=b, h=h)
    if gcd(a, b) != 1:
        raise SchemeArgumentError(f"a={a} and b={b} must be coprime", a=a, b=b)
    if not Q**-2 * (1 - DELTA_RANGE_SLACK) <= delta <= Q**-1 * (1 + DELTA_RANGE_SLACK):
        raise SchemeArgumentError(
            f"delta={delta} outside [Q^-2, Q^-1] = [{Q**-2:.6g}, {Q**-1:.6g}]", Q=Q, delta=delta
        )

    moduli = denominators(Q, N, a, b, h)
    if not moduli:
        raise EmptyDenominatorSetError(ceil(Q), floor(2 * Q), N, a, b, h)
    L = sum(euler_phi(q) for q in moduli)
    logger.debug(f"Scheme Q={Q}, delta={delta:.6g}: {len(moduli)} moduli, L={L}")
    return JutilaScheme(Q=Q, delta=delta, N=N, a=a, b=b, h=h, moduli=moduli, L=L)


def denominator_density(Q: float, N: int = 1, a: int = 1, b: int = 1, h: int = 1) -> DensityReport:
    """The measured constant c in |𝒬| ≥ c·Q/(ab)."""
    count = len(denominators(Q, N, a, b, h))
    return DensityReport(Q=Q, count=count, constant=count * a * b / Q)


def balanced_parameters(A: float, B: float, P: float, a: int = 1, b: int = 1, c: float = 1.0) -> BalancedParameters:
    """δ = P(A + B)/(AB) and Q from δ³Q⁵ = (cab)³."""
    delta = P * (A + B) / (A * B)
    Q = (c * a * b / delta) ** 0.6
    return BalancedParameters(delta=delta, Q=Q, delta_in_range=bool(Q**-2 <= delta <= Q**-1))


# --- Exact L² error of the approximation ---


def _events(scheme: JutilaScheme, shuffle_seed: int | None = None):
    """
    Arc endpoints d/q ∓ δ in increasing order as parallel arrays (d, q, side, step),
    side −1 for left ends. Float order is repaired exactly inside near-ties.
    """
    d, q = scheme.arcs()
    d = np.concatenate([d, d])
    q = np.concatenate([q, q])
    side = np.concatenate([-np.ones(d.size // 2, dtype=np.int64), np.ones(d.size // 2, dtype=np.int64)])
    if shuffle_seed is not None:
        permutation = np.random.default_rng(shuffle_seed).permutation(d.size)
        d, q, side = d[permutation], q[permutation], side[permutation]

    position = d / q + side * scheme.delta
    order = np.argsort(position, kind="stable")
    close = np.flatnonzero(np.diff(position[order]) <= TIE_GAP)
    if close.size:
        delta = scheme.delta_fraction
        for run in np.split(close, np.flatnonzero(np.diff(close) != 1) + 1):
            lo, hi = int(run[0]), int(run[-1]) + 2
            order[lo:hi] = sorted(
                order[lo:hi], key=lambda e: Fraction(int(d[e]), int(q[e])) + int(side[e]) * delta
            )
    d, q, side = d[order], q[order], side[order]
    return d, q, side, np.where(side < 0, 1, -1)


def _abel_sum(scheme: JutilaScheme, d: np.ndarray, q: np.ndarray, side: np.ndarray, jumps: np.ndarray) -> Fraction:
    """Σ_k b_k·jumps_k exactly, with b_k = d_k/q_k + side_k·δ."""
    grouped = np.zeros(int(q.max()) + 1, dtype=np.int64)
    np.add.at(grouped, q, jumps * d)
    total = sum((Fraction(int(grouped[r]), r) for r in scheme.moduli), Fraction(0))
    return total + int(np.sum(jumps * side)) * scheme.delta_fraction


def _overlap(scheme: JutilaScheme) -> Fraction:
    """Σ over arcs of |[d/q − δ, d/q + δ] ∩ [0, 1]|."""
    d, q = scheme.arcs()
    delta = scheme.delta_fraction
    centre = d / q
    boundary = (centre < scheme.delta + TIE_GAP) | (centre > 1 - scheme.delta - TIE_GAP)
    total = int(np.count_nonzero(~boundary)) * 2 * delta
    for numerator, denominator in zip(d[boundary], q[boundary]):
        c = Fraction(int(numerator), int(denominator))
        total += max(Fraction(0), min(Fraction(1), c + delta) - max(Fraction(0), c - delta))
    return total


def _scale(scheme: JutilaScheme) -> Fraction:
    return 1 / (2 * scheme.delta_fraction * scheme.L)


def l2_error_exact(scheme: JutilaScheme, shuffle_seed: int | None = None) -> Fraction:
    """
    ∫(I − Ĩ)² = 1 − 2c·Σ|arc ∩ [0, 1]| + c²∫N², c = 1/(2δL), N the arc count,
    with ∫N² = Σ_k b_k(N_{k−1}² − N_k²) over the ordered endpoints b_k.
    """
    d, q, side, step = _events(scheme, shuffle_seed)
    count = np.cumsum(step)
    previous = np.concatenate([[0], count[:-1]])
    square_integral = _abel_sum(scheme, d, q, side, previous**2 - count**2)
    c = _scale(scheme)
    return 1 - 2 * c * _overlap(scheme) + c * c * square_integral


def l2_error(scheme: JutilaScheme, shuffle_seed: int | None = None) -> float:
    logger.info(f"Exact L2 error for Q={scheme.Q}, delta={scheme.delta:.6g}, L={scheme.L}")
    return float(l2_error_exact(scheme, shuffle_seed))


def tilde_integral(scheme: JutilaScheme) -> Fraction:
    """∫Ĩ from the same ordered endpoints; equal to 1."""
    d, q, side, step = _events(scheme)
    count = np.cumsum(step)
    previous = np.concatenate([[0], count[:-1]])
    return _scale(scheme) * _abel_sum(scheme, d, q, side, previous - count)


def l2_bound(scheme: JutilaScheme) -> float:
    """10·δ^{−1}L^{−2}Q^{2.1}."""
    return L2_BOUND_CONSTANT * scheme.Q**L2_BOUND_EXPONENT / (scheme.delta * scheme.L**2)


def l2_row(scheme: JutilaScheme, assert_bound: bool = False, shuffle_seed: int | None = None) -> L2Row:
    value = l2_error(scheme, shuffle_seed)
    bound = l2_bound(scheme)
    if assert_bound and value > bound:
        logger.error(f"L² error above the bound at Q={scheme.Q}, delta={scheme.delta}")
        raise L2BoundViolation(scheme.Q, scheme.delta, value, bound)
    return L2Row(
        Q=scheme.Q,
        delta=scheme.delta,
        L=scheme.L,
        moduli=len(scheme.moduli),
        l2_exact=value,
        bound=bound,
        ratio=value / bound,
    )


def indicator_step() -> StepFunction:
    return StepFunction(breakpoints=np.array([0.0, 1.0]), values=np.array([0.0, 1.0, 0.0]))


def tilde_step(scheme: JutilaScheme) -> StepFunction:
    """Ĩ(α) = (2δL)^{−1}·#{arcs containing α}, breakpoints as floats."""
    d, q, side, step = _events(scheme)
    position = d / q + side * scheme.delta
    count = np.cumsum(step)
    breakpoints, first = np.unique(position, return_index=True)
    last = np.concatenate([first[1:] - 1, [position.size - 1]])
    values = np.concatenate([[0.0], count[last] / (2 * scheme.delta * scheme.L)])
    return StepFunction(breakpoints=breakpoints, values=values)


# --- The exponential sum G ---


def _box(support: tuple[float, float], scale: int) -> np.ndarray:
    lo, hi = support
    return np.arange(floor(lo / scale) + 1, ceil(hi / scale), dtype=np.int64)


def frequency_table(spec: ShiftedSumSpec, F: SmoothWeight2D) -> FrequencyTable:
    """
    Collects λ_φ(m)λ_ψ(n)F(am, bn) by frequency k = am ± bn − h with
    separate real and imaginary bincounts over row blocks.
    """
    a, b, s, h = spec.a, spec.b, spec.sign, spec.h
    m = _box(F.x_support, a)
    n = _box(F.y_support, b)
    if m.size == 0 or n.size == 0:
        return FrequencyTable(k_min=0, coefficients=np.zeros(0, dtype=complex), m_max=0, n_max=0)
    spec.phi.require(int(m[-1]), "phi")
    spec.psi.require(int(n[-1]), "psi")

    n_terms = s * b * n
    k_min = int(a * m[0] + n_terms.min() - h)
    size = int(a * m[-1] + n_terms.max() - h) - k_min + 1
    real = np.zeros(size)
    imag = np.zeros(size)
    lam_n = spec.psi.coeffs[n]
    rows = max(1, MAX_BLOCK // n.size)
    for start in range(0, m.size, rows):
        block = m[start : start + rows]
        weights = spec.phi.coeffs[block][:, None] * lam_n[None, :] * F(a * block[:, None] * 1.0, b * n[None, :] * 1.0)
        index = (a * block[:, None] + n_terms[None, :] - h - k_min).ravel()
        real += np.bincount(index, weights=np.real(weights).ravel(), minlength=size)
        imag += np.bincount(index, weights=np.imag(weights).ravel(), minlength=size)
    return FrequencyTable(k_min=k_min, coefficients=real + 1j * imag, m_max=int(m[-1]), n_max=int(n[-1]))


def evaluate_G(table: FrequencyTable, alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    flat = np.atleast_1d(alpha).ravel()
    out = np.zeros(flat.size, dtype=complex)
    if table.coefficients.size:
        k = table.frequencies
        rows = max(1, MAX_BLOCK // k.size)
        for start in range(0, flat.size, rows):
            phase = np.mod(np.outer(flat[start : start + rows], k), 1.0)
            out[start : start + rows] = np.exp(2j * pi * phase) @ table.coefficients
    return complex(out[0]) if alpha.ndim == 0 else out.reshape(alpha.shape)


def exp_sum_G(alpha, spec: ShiftedSumSpec, F: SmoothWeight2D):
    """G(α) = Σ λ_φ(m)λ_ψ(n)F(am, bn)e((am ± bn − h)α)."""
    return evaluate_G(frequency_table(spec, F), alpha)


def d_exact_by_integral(spec: ShiftedSumSpec, F: SmoothWeight2D, n_points: int) -> complex:
    """
    ∫_0^1 G(α)dα by the uniform n-point rule, exact for the trigonometric
    polynomial G once n exceeds twice its largest frequency. The grid values
    G(j/n) come from one inverse FFT of the folded coefficients.
    """
    table = frequency_table(spec, F)
    threshold = 2 * table.max_abs_frequency
    if n_points <= threshold:
        raise NyquistError(n_points, threshold)
    if table.coefficients.size == 0:
        return 0j
    folded = np.zeros(n_points, dtype=complex)
    np.add.at(folded, np.mod(table.frequencies, n_points), table.coefficients)
    grid_values = n_points * np.fft.ifft(folded)
    return complex(np.mean(grid_values))


# --- Arcs ---


def arc_points(table: FrequencyTable, delta: float) -> int:
    """Gauss-Legendre points for one arc, scaled to the phase range 4πδ·max|k|."""
    return 16 + int(ceil(2 * pi * delta * table.max_abs_frequency))


def _arc_residues(q: int) -> np.ndarray:
    d = reduced_residues(q)
    return np.where(d == 0, q, d)


def arc_integral(table: FrequencyTable, d: int, q: int, delta: float, points: int | None = None) -> complex:
    """𝔍_{d/q} = ∫_{−δ}^{δ} G(d/q + β)dβ by Gauss-Legendre."""
    if table.coefficients.size == 0:
        return 0j
    nodes, weights = gauss_legendre(points or arc_points(table, delta))
    return complex(delta * np.dot(weights, evaluate_G(table, d / q + delta * nodes)))


def arc_integral_closed(table: FrequencyTable, d: int, q: int, delta: float) -> complex:
    """Σ_k c_k e(kd/q)·2δ·sinc(2kδ)."""
    k = table.frequencies
    return complex(np.sum(table.coefficients * np.exp(2j * pi * np.mod(k * d, q) / q) * 2 * delta * np.sinc(2 * k * delta)))


def d_tilde(
    spec: ShiftedSumSpec,
    F: SmoothWeight2D,
    scheme: JutilaScheme,
    quadrature_points_per_arc: int | None = None,
    threads: int | None = None,
) -> complex:
    """D̃_F = (2δL)^{−1} Σ_q Σ*_d 𝔍_{d/q}, arcs grouped by modulus."""
    table = frequency_table(spec, F)
    if table.coefficients.size == 0:
        return 0j
    points = quadrature_points_per_arc or arc_points(table, scheme.delta)
    nodes, weights = gauss_legendre(points)
    logger.info(f"D_tilde over L={scheme.L} arcs with {points} points each")

    def per_modulus(q: int) -> complex:
        d = _arc_residues(q)
        alphas = d[:, None] / q + scheme.delta * nodes[None, :]
        values = evaluate_G(table, alphas)
        return complex(block_sum(values @ (scheme.delta * weights)))

    total = tree_sum(ordered_map(per_modulus, scheme.moduli, threads))
    return total / (2 * scheme.delta * scheme.L)


# --- The inner weight E ---


def inner_weight(spec: ShiftedSumSpec, F: SmoothWeight2D, delta: float) -> SmoothWeight2D:
    """E(x, y) = F(ax, by)·∫_{−δ}^{δ} e((ax ± by − h)β)dβ = F(ax, by)·2δ·sinc(2δ(ax ± by − h))."""
    a, b, s, h = spec.a, spec.b, spec.sign, spec.h

    def E(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return F(a * x, b * y) * 2 * delta * np.sinc(2 * delta * (a * x + s * b * y - h))

    A = F.A if F.A is not None else F.x_support[0]
    B = F.B if F.B is not None else F.y_support[0]
    return SmoothWeight2D(
        evaluator=E,
        x_support=(F.x_support[0] / a, F.x_support[1] / a),
        y_support=(F.y_support[0] / b, F.y_support[1] / b),
        pattern=BoundPattern.box,
        P=max(F.P, delta * max(A, B)),
        A=A / a,
        B=B / b,
    )


def inner_weight_norm(spec: ShiftedSumSpec, F: SmoothWeight2D, delta: float, i: int, j: int) -> MixedNorm:
    """‖E^{(i,j)}‖₁ against δ^{i+j}a^{i−1}b^{j−1}AB/(A + B)."""
    norm = l1_norm_mixed(inner_weight(spec, F, delta), i, j).norm
    A = F.A if F.A is not None else F.x_support[0]
    B = F.B if F.B is not None else F.y_support[0]
    pattern = delta ** (i + j) * spec.a ** (i - 1) * spec.b ** (j - 1) * A * B / (A + B)
    return MixedNorm(i=i, j=j, norm=norm, pattern=pattern, ratio=norm / pattern)


# --- Transformed arcs ---


class _Channel:
    """One dual family in one variable: coefficients, phase multipliers and kernel rows built on demand."""

    def __init__(self, branch: Branch, index: np.ndarray, coefficients, multipliers, kernel_rows):
        self.branch = branch
        self.index = index
        self.coefficients = coefficients
        self.multipliers = multipliers
        self.kernel_rows = kernel_rows

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """K @ matrix with K assembled in row blocks."""
        rows = max(1, MAX_BLOCK // max(1, matrix.shape[0]))
        return np.concatenate(
            [self.kernel_rows(self.index[start : start + rows]) @ matrix for start in range(0, self.index.size, rows)]
        )


def _channels(source: CoefficientSource, q: int, c: int, nodes: np.ndarray, cut: int, flip: int) -> list[_Channel]:
    """
    Dual families of the Voronoi step at modulus q/c: kernels
    (c/q)·M(4πc√(mx)/q) (times 2πi^k for J) and phase e_q(p·d̄·flip·c·m).
    """
    m = np.arange(1, cut + 1, dtype=np.int64)

    def rows_for(spec: KernelSpec, prefactor: complex):
        def rows(index):
            return prefactor * kernel_array(spec, 4 * pi * c * np.sqrt(np.outer(index, nodes)) / q, Representation.anchor)

        return rows

    def phase(branch: Branch) -> np.ndarray:
        return BRANCH_PHASE[branch] * flip * c * m

    if source.kind == SourceKind.holomorphic:
        i_power = (1, 1j, -1, -1j)[source.weight % 4]
        prefactor = 2 * pi * i_power * c / q
        if source.weight % 2 == 0:
            prefactor = prefactor.real
        J = KernelSpec(family=KernelFamily.J, order=source.weight - 1)
        return [_Channel(Branch.minus, m, source.coeffs[m], phase(Branch.minus), rows_for(J, prefactor))]

    mu = source.mu or 0.0
    channels = [
        _Channel(
            Branch.minus,
            m,
            source.coeffs[m],
            phase(Branch.minus),
            rows_for(KernelSpec(family=KernelFamily.Mminus, order=mu), c / q),
        ),
        _Channel(
            Branch.plus,
            m,
            source.reflection_sign * source.coeffs[m],
            phase(Branch.plus),
            rows_for(KernelSpec(family=KernelFamily.Mplus, order=mu), c / q),
        ),
    ]
    if source.kind == SourceKind.divisor:
        polar = (c / q) * (np.log(nodes * c * c / q**2) + 2 * euler_gamma())
        channels.append(
            _Channel(
                Branch.main,
                np.zeros(1, dtype=np.int64),
                np.ones(1),
                np.zeros(1, dtype=np.int64),
                lambda index: np.broadcast_to(polar, (index.size, polar.size)),
            )
        )
    return channels



def _panels(lo: float, hi: float, cut: int, c: int, q: int, length: float, frequency: float) -> int:
    span = hi - lo
    kernel_cycles = span * c * sqrt(cut / lo) / q
    return int(ceil(kernel_cycles + frequency * span + 12 * span / length)) + 4


def _dual_blocks(spec: ShiftedSumSpec, F: SmoothWeight2D, q: int, delta: float, m_cut: int, n_cut: int):
    """Ê^{±±}(m, n) = ∫∫E(x, y)K_φ(m, x)K_ψ(n, y)dxdy for every channel pair."""
    a, b = spec.a, spec.b
    E = inner_weight(spec, F, delta)
    lx, ly = F.length_scales()
    x_lo, x_hi = E.x_support
    y_lo, y_hi = E.y_support
    x, wx = composite_gauss_legendre(x_lo, x_hi, _panels(x_lo, x_hi, m_cut, a, q, lx / a, delta * a))
    y, wy = composite_gauss_legendre(y_lo, y_hi, _panels(y_lo, y_hi, n_cut, b, q, ly / b, delta * b))
    weighted = E(x[:, None], y[None, :]) * np.outer(wx, wy)

    phi_channels = _channels(spec.phi, q, a, x, m_cut, 1)
    psi_channels = _channels(spec.psi, q, b, y, n_cut, spec.sign)
    blocks = []
    for left in phi_channels:
        partial = left.apply(weighted)
        for right in psi_channels:
            blocks.append((left, right, right.apply(partial.T).T))
    return blocks


def _nebentypus_values(source: CoefficientSource, q: int) -> np.ndarray:
    return np.asarray(nebentypus_character(source)(np.arange(q)), dtype=complex)


def _sum_blocks(blocks, weigh, m_cut: int, n_cut: int) -> tuple[complex, float, float]:
    """Σ c_φ(m)c_ψ(n)Ê(m, n)·weigh(t), t = u_φ(m) + u_ψ(n), with the tails past half of each cut."""
    value, tail_m, tail_n = [], 0.0, 0.0
    for left, right, hat in blocks:
        t = left.multipliers[:, None] + right.multipliers[None, :]
        terms = np.outer(left.coefficients, right.coefficients) * hat * weigh(t)
        value.append(block_sum(terms.ravel()))
        magnitude = np.abs(terms)
        if left.branch != Branch.main:
            tail_m += float(magnitude[left.index > m_cut // 2, :].sum())
        if right.branch != Branch.main:
            tail_n += float(magnitude[:, right.index > n_cut // 2].sum())
    return complex(tree_sum(value)), tail_m, tail_n


def _start_cut(q: int, delta: float, c: int, support: tuple[float, float], length: float) -> int:
    """Dual length at which the kernel oscillation outruns the bandwidth of E."""
    bandwidth = max(c / length, 2 * delta * c)
    estimate = support[1] / c * (q * bandwidth / c) ** 2
    return max(START_CUT, 1 << int(ceil(log2(max(estimate, 1.0)))))


def _truncated(spec: ShiftedSumSpec, F: SmoothWeight2D, q: int, delta: float, weigh, tolerance: float):
    """Doubles each dual cut until the terms past its half fall below tolerance·max(1, |value|)."""
    lx, ly = F.length_scales()
    m_cut = _start_cut(q, delta, spec.a, F.x_support, lx)
    n_cut = _start_cut(q, delta, spec.b, F.y_support, ly)
    m_limit = min(spec.phi.m_max, MAX_DUAL)
    n_limit = min(spec.psi.m_max, MAX_DUAL)
    m_cut, n_cut = min(m_cut, m_limit), min(n_cut, n_limit)
    while True:
        value, tail_m, tail_n = _sum_blocks(_dual_blocks(spec, F, q, delta, m_cut, n_cut), weigh, m_cut, n_cut)
        target = tolerance * max(1.0, abs(value))
        if tail_m <= target and tail_n <= target:
            logger.debug(f"Dual cuts m={m_cut}, n={n_cut} for q={q}: tails {tail_m:.3e}, {tail_n:.3e}")
            return value, m_cut, n_cut, tail_m + tail_n
        if tail_m > target:
            if 2 * m_cut > m_limit:
                logger.error(f"Dual sum in m not truncated at q={q}: tail {tail_m:.3e}")
                raise TruncationBudgetError(m_cut, tail_m, target)
            m_cut *= 2
        if tail_n > target:
            if 2 * n_cut > n_limit:
                logger.error(f"Dual sum in n not truncated at q={q}: tail {tail_n:.3e}")
                raise TruncationBudgetError(n_cut, tail_n, target)
            n_cut *= 2


def _check_arc_modulus(spec: ShiftedSumSpec, q: int) -> None:
    modulus = spec.phi.level * spec.a * spec.b
    if spec.psi.level != spec.phi.level or q % modulus != 0:
        raise SchemeArgumentError(
            f"q={q} must be divisible by N·a·b={modulus} with equal levels on both sources",
            q=q,
            N=spec.phi.level,
            a=spec.a,
            b=spec.b,
        )


def truncation_scale(spec: ShiftedSumSpec, F: SmoothWeight2D, scheme: JutilaScheme) -> float:
    """(δQ)²A/a: the dual length past which E^{±±} is negligible."""
    A = F.A if F.A is not None else F.x_support[0]
    return (scheme.delta * scheme.Q) ** 2 * A / spec.a


def transformed_arc_sum(
    d: int,
    q: int,
    spec: ShiftedSumSpec,
    F: SmoothWeight2D,
    scheme: JutilaScheme,
    tolerance: float = 1e-5,
    truncation_tolerance: float = 1e-7,
    check: bool = True,
) -> ArcTransform:
    """
    𝔍_{d/q} after Voronoi summation in both variables:
    e_q(−dh)χ̄_φ(d)χ̄_ψ(±d) Σ_{branches} Σ_{m,n} c_φ(m)c_ψ(n)e_q(d̄(p_φam ± p_ψbn))Ê(m, n),
    compared with the direct arc integral.
    """
    _check_arc_modulus(spec, q)
    if gcd(d, q) != 1:
        raise SchemeArgumentError(f"d={d} is not coprime to q={q}", d=d, q=q)
    d_bar = mod_inverse(d, q).value
    chi_phi = _nebentypus_values(spec.phi, q)
    chi_psi = _nebentypus_values(spec.psi, q)
    prefactor = complex(e_q(-d * spec.h, q)) * np.conj(chi_phi[d % q]) * np.conj(chi_psi[(spec.sign * d) % q])

    def weigh(t):
        return np.exp(2j * pi * np.mod(d_bar * t, q) / q)

    value, m_cut, n_cut, tail = _truncated(spec, F, q, scheme.delta, weigh, truncation_tolerance)
    value *= prefactor
    direct = arc_integral(frequency_table(spec, F), d, q, scheme.delta)
    difference = abs(value - direct)
    logger.info(f"Arc {d}/{q}: transformed {value:.10g}, direct {direct:.10g}")
    if check and difference > tolerance * max(1.0, abs(direct)):
        logger.error(f"Arc {d}/{q} mismatch {difference:.3e}")
        raise ArcMismatchError(d, q, value, direct, tolerance * max(1.0, abs(direct)))
    return ArcTransform(
        d=d,
        q=q,
        value=value,
        direct=direct,
        difference=difference,
        m_cut=m_cut,
        n_cut=n_cut,
        tail=tail,
        truncation_scale=truncation_scale(spec, F, scheme),
    )


def transformed_arc_total(
    q: int,
    spec: ShiftedSumSpec,
    F: SmoothWeight2D,
    scheme: JutilaScheme,
    tolerance: float = 1e-5,
    truncation_tolerance: float = 1e-7,
    check: bool = True,
) -> ArcTotal:
    """
    Σ*_d 𝔍_{d/q} in one pass: the d-sum of the transformed arcs collapses to
    χ̄_ψ(±1)·S_{χ̄_φχ̄_ψ}(−h, t; q), t = p_φam ± p_ψbn.
    """
    _check_arc_modulus(spec, q)
    chi = np.conj(_nebentypus_values(spec.phi, q) * _nebentypus_values(spec.psi, q))
    twist = np.conj(_nebentypus_values(spec.psi, q)[spec.sign % q])
    row = twist * twisted_kloosterman_row(chi, -spec.h, q)

    def weigh(t):
        return row[np.mod(t, q)]

    value, m_cut, n_cut, _ = _truncated(spec, F, q, scheme.delta, weigh, truncation_tolerance)
    table = frequency_table(spec, F)
    direct = complex(tree_sum([arc_integral(table, int(d), q, scheme.delta) for d in _arc_residues(q)]))
    difference = abs(value - direct)
    if check and difference > tolerance * max(1.0, abs(direct)):
        logger.error(f"Modulus {q} mismatch {difference:.3e}")
        raise ArcMismatchError(0, q, value, direct, tolerance * max(1.0, abs(direct)))
    return ArcTotal(q=q, value=value, direct=direct, difference=difference, m_cut=m_cut, n_cut=n_cut)


# --- Diagnostics ---


def balance_scales(spec: ShiftedSumSpec, scheme: JutilaScheme) -> BalanceScales:
    """
    (ab)^{1/2}δ^{1/2}Q^{−1}(AB)^{3/2}/(A + B) and δ²Q^{3/2}(ab)^{−1}(AB)^{3/2}/(A + B).
    """
    weight = spec.weight
    A = weight.A if weight.A is not None else weight.x_support[0]
    B = weight.B if weight.B is not None else weight.y_support[0]
    ab = spec.a * spec.b
    shape = (A * B) ** 1.5 / (A + B)
    return BalanceScales(
        eq15=sqrt(ab * scheme.delta) / scheme.Q * shape,
        dual=scheme.delta**2 * scheme.Q**1.5 / ab * shape,
    )


def nyquist_points(spec: ShiftedSumSpec, F: SmoothWeight2D) -> int:
    return 2 * frequency_table(spec, F).max_abs_frequency + 2


def comparison_row(spec: ShiftedSumSpec, scheme: JutilaScheme, with_main_term: bool = False) -> ComparisonRow:
    """D_F three ways: lattice sum, exact integral of G over [0, 1] and D̃_F over the arcs."""
    F = spec.weight
    direct = shifted_sum_direct(spec)
    exact = d_exact_by_integral(spec, F, nyquist_points(spec, F))
    approximate = d_tilde(spec, F, scheme)
    scales = balance_scales(spec, scheme)
    main_term = divisor_main_term(spec).value if with_main_term else None
    return ComparisonRow(
        a=spec.a,
        b=spec.b,
        h=spec.h,
        A=F.A if F.A is not None else F.x_support[0],
        B=F.B if F.B is not None else F.y_support[0],
        P=F.P,
        Q=scheme.Q,
        delta=scheme.delta,
        L=scheme.L,
        D_direct=direct.real,
        D_direct_im=direct.imag,
        D_exact_integral=exact.real,
        D_tilde=approximate.real,
        D_tilde_im=approximate.imag,
        diff=abs(direct - approximate),
        eq15_scale=scales.eq15,
        dual_scale=scales.dual,
        main_term=main_term,
    )


def wilton_ratio(source: CoefficientSource, alphas, x_max: int) -> WiltonRatio:
    """sup over α and x ≤ x_max of |Σ_{m≤x} λ(m)e(mα)|/(√x log 2x)."""
    source.require(x_max, "source")
    m = np.arange(1, x_max + 1, dtype=np.int64)
    normal = np.sqrt(m) * np.log(2.0 * m)
    best = WiltonRatio(max_ratio=0.0, alpha=0.0, x=1)
    for alpha in np.atleast_1d(np.asarray(alphas, dtype=np.float64)):
        partial = np.cumsum(source.coeffs[m] * np.exp(2j * pi * np.mod(m * alpha, 1.0)))
        ratios = np.abs(partial) / normal
        index = int(np.argmax(ratios))
        if ratios[index] > best.max_ratio:
            best = WiltonRatio(max_ratio=float(ratios[index]), alpha=float(alpha), x=index + 1)
    return best
