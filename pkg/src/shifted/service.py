from math import gcd, log
import logging

import mpmath
import numpy as np

from src.arith.service import prime_factorization, ramanujan_sum
from src.coeffs.model import SourceKind
from src.exceptions.shifted import MainTermSourceError, ScaleRatioError
from src.shifted.model import MainTermMoments, MainTermResult, MainTermSpec, ShiftedRow, ShiftedSumSpec, ShiftedSweep
from src.utils.pool import block_sum, ordered_map
from src.utils.quadrature import composite_gauss_legendre

logger = logging.getLogger(__name__)

POWER_SAVING_EPSILON = 0.01
TH1_RATIO_LIMIT = 100.0


# --- Direct evaluation ---


def _lattice_points(spec: ShiftedSumSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    All (m, n) in the support box with am + sign·bn = h, enumerating the
    slot with fewer candidates.
    """
    a, b, h, s = spec.a, spec.b, spec.h, spec.sign
    m_lo, m_hi = spec.m_range
    n_lo, n_hi = spec.n_range
    if m_hi < m_lo or n_hi < n_lo:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

    if m_hi - m_lo <= n_hi - n_lo:
        m = np.arange(m_lo, m_hi + 1, dtype=np.int64)
        numerator = s * (h - a * m)
        valid = (numerator % b == 0) & (numerator > 0)
        m, n = m[valid], numerator[valid] // b
        keep = (n >= n_lo) & (n <= n_hi)
    else:
        n = np.arange(n_lo, n_hi + 1, dtype=np.int64)
        numerator = h - s * b * n
        valid = (numerator % a == 0) & (numerator > 0)
        n, m = n[valid], numerator[valid] // a
        keep = (m >= m_lo) & (m <= m_hi)
    return m[keep], n[keep]


def shifted_sum_direct(spec: ShiftedSumSpec) -> complex:
    m, n = _lattice_points(spec)
    if m.size == 0:
        return 0j
    spec.phi.require(int(m.max()), "phi")
    spec.psi.require(int(n.max()), "psi")
    terms = spec.phi.coeffs[m] * spec.psi.coeffs[n] * spec.weight(spec.a * m.astype(float), spec.b * n.astype(float))
    return complex(block_sum(terms))


def trivial_bound(spec: ShiftedSumSpec) -> float:
    """(XY/ab)^{1/2}, from Cauchy's inequality and the Rankin-Selberg bound."""
    return float(np.sqrt(spec.X * spec.Y / (spec.a * spec.b)))


def theorem1_scale(spec: ShiftedSumSpec, epsilon: float = POWER_SAVING_EPSILON) -> float:
    """P^{11/10}(ab)^{−1/10}(X + Y)^{1/10}(XY)^{2/5+ε} with implied constant 1."""
    P, X, Y = spec.weight.P, spec.X, spec.Y
    return float(P**1.1 * (spec.a * spec.b) ** -0.1 * (X + Y) ** 0.1 * (X * Y) ** (0.4 + epsilon))


def supersedes_trivial(spec: ShiftedSumSpec, epsilon: float = POWER_SAVING_EPSILON) -> bool:
    """ab < P^{−11/4}(X + Y)^{−1/4}(XY)^{1/4−ε}, constants set to 1."""
    P, X, Y = spec.weight.P, spec.X, spec.Y
    return spec.a * spec.b < P**-2.75 * (X + Y) ** -0.25 * (X * Y) ** (0.25 - epsilon)


# --- Divisor main term ---


def _local_factor(p: int, h: int, a: int, b: int, s, u, v):
    """Σ_k c_{p^k}(h)(ab, p^k)(a, p^k)^u (b, p^k)^v p^{−ks}; c_{p^k}(h) vanishes once p^{k−1} ∤ h."""
    total = mpmath.mpf(0)
    k = 0
    while k == 0 or h % p ** (k - 1) == 0:
        pk = p**k
        term = ramanujan_sum(pk, h) * gcd(a * b, pk)
        total += term * mpmath.power(gcd(a, pk), u) * mpmath.power(gcd(b, pk), v) * mpmath.power(pk, -s)
        k += 1
    return total


def _dirichlet_series(h: int, a: int, b: int):
    """
    Φ(s, u, v) = Σ_q c_q(h)(ab, q)(a, q)^u (b, q)^v q^{−s}
               = ζ(s)^{−1} ∏_{p | hab} L_p(s, u, v)/(1 − p^{−s}),
    since the summand is multiplicative in q and equals 1 − p^{−s} at p ∤ hab.
    """
    primes = sorted(set(prime_factorization(h)) | set(prime_factorization(a * b)))

    def phi(s, u, v):
        value = 1 / mpmath.zeta(s)
        for p in primes:
            value *= _local_factor(p, h, a, b, s, u, v) / (1 - mpmath.power(p, -s))
        return value

    return phi


def main_term_moments(h: int, a: int, b: int) -> MainTermMoments:
    """
    The q-series of the main term in closed form: U_q acts as 2∂_s + 2∂_u and
    V_q as 2∂_s + 2∂_v on Φ at (2, 0, 0).
    """
    phi = _dirichlet_series(h, a, b)
    point = (mpmath.mpf(2), mpmath.mpf(0), mpmath.mpf(0))
    with mpmath.workdps(30):
        d = {
            order: mpmath.diff(phi, point, order)
            for order in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
        }
        m0 = d[(0, 0, 0)]
        m_u = 2 * d[(1, 0, 0)] + 2 * d[(0, 1, 0)]
        m_v = 2 * d[(1, 0, 0)] + 2 * d[(0, 0, 1)]
        m_uv = 4 * (d[(2, 0, 0)] + d[(1, 0, 1)] + d[(1, 1, 0)] + d[(0, 1, 1)])
    return MainTermMoments(m0=float(m0), m_u=float(m_u), m_v=float(m_v), m_uv=float(m_uv))


def main_term_moments_series(h: int, a: int, b: int, q_max: int) -> tuple[MainTermMoments, float]:
    """
    The same moments from the q-series cut at q_max, with a bound for the
    omitted tail of the largest one, Σ_{q > q_max} ab·h·(2 log q)²/q².
    """
    q = np.arange(1, q_max + 1)
    c = np.array([ramanujan_sum(int(r), h) for r in q], dtype=np.float64)
    weight = np.array([gcd(a * b, int(r)) for r in q]) * c / q.astype(np.float64) ** 2
    U = 2 * np.log(np.array([gcd(a, int(r)) for r in q]) / q)
    V = 2 * np.log(np.array([gcd(b, int(r)) for r in q]) / q)
    moments = MainTermMoments(
        m0=float(np.sum(weight)),
        m_u=float(np.sum(weight * U)),
        m_v=float(np.sum(weight * V)),
        m_uv=float(np.sum(weight * U * V)),
    )
    # |U_qV_q| ≤ 4 log² q and ∫_T^∞ 4 log² t/t² dt = (4 log² T + 8 log T + 8)/T
    T = float(max(q_max, 3))
    lead = 2 * log(T)
    tail = a * b * h * (lead**2 + 4 * lead + 8) / T
    return moments, tail


def _combine(spec: ShiftedSumSpec, moments: MainTermMoments, gamma: float) -> float:
    """∫ f(x, y)(ab)^{−1}[αβ M0 + α M_V + β M_U + M_UV] dx along the line am + sign·bn = h."""
    s, h = spec.sign, spec.h
    x_lo, x_hi = spec.weight.x_support
    y_lo, y_hi = spec.weight.y_support
    # y = s(h − x) must lie in the y-support
    bounds = sorted([h - s * y_lo, h - s * y_hi])
    lo, hi = max(x_lo, bounds[0]), min(x_hi, bounds[1])
    if hi <= lo:
        return 0.0
    length_x, length_y = spec.weight.length_scales()
    panels = 16 + int(8 * (hi - lo) / min(length_x, length_y))
    x, w = composite_gauss_legendre(lo, hi, panels)
    y = s * (h - x)
    alpha = np.log(x) - 2 * gamma - log(spec.a)
    beta = np.log(np.where(y > 0, y, 1.0)) - 2 * gamma - log(spec.b)
    bracket = alpha * beta * moments.m0 + alpha * moments.m_v + beta * moments.m_u + moments.m_uv
    integrand = spec.weight(x, y) * bracket / (spec.a * spec.b)
    return float(np.dot(w, integrand))


def divisor_main_term(spec: ShiftedSumSpec, mts: MainTermSpec | None = None) -> MainTermResult:
    """
    ∫ g(x, ∓x ± h)dx with g(x, y) = f(x, y) Σ_q (ab, q)/(abq²) c_q(h)(log x − λ_aq)(log y − λ_bq),
    λ_aq = 2γ + log(aq²/(a, q)²). The q-series is summed in closed form; the
    series cut at q_max is kept as the checkable route.
    """
    if spec.phi.kind != SourceKind.divisor or spec.psi.kind != SourceKind.divisor:
        raise MainTermSourceError(spec.phi.kind if spec.phi.kind != SourceKind.divisor else spec.psi.kind)
    mts = mts or MainTermSpec()
    logger.info(f"Divisor main term for a={spec.a}, b={spec.b}, h={spec.h}")

    exact = main_term_moments(spec.h, spec.a, spec.b)
    series, tail = main_term_moments_series(spec.h, spec.a, spec.b, mts.q_max)
    value = _combine(spec, exact, mts.euler_gamma)
    series_value = _combine(spec, series, mts.euler_gamma)
    logger.debug(f"Main term {value:.12g} (series to q={mts.q_max}: {series_value:.12g})")
    return MainTermResult(
        value=value,
        series_value=series_value,
        tail_bound=tail,
        q_max=mts.q_max,
        moments=exact,
    )


# --- Reports ---


def shifted_row(spec: ShiftedSumSpec, with_main_term: bool = False, mts: MainTermSpec | None = None) -> ShiftedRow:
    D = shifted_sum_direct(spec)
    trivial = trivial_bound(spec)
    scale = theorem1_scale(spec)
    main_term = divisor_main_term(spec, mts).value if with_main_term else None
    return ShiftedRow(
        a=spec.a,
        b=spec.b,
        h=spec.h,
        sign=spec.sign,
        X=spec.X,
        Y=spec.Y,
        P=spec.weight.P,
        D=D.real,
        D_im=D.imag,
        trivial_bound=trivial,
        th1_scale=scale,
        ratio_trivial=abs(D) / trivial,
        ratio_th1=abs(D) / scale,
        supersedes_trivial=supersedes_trivial(spec),
        main_term=main_term,
        main_term_gap=abs(D.real - main_term) if main_term is not None else None,
    )


def shifted_sweep(specs: list[ShiftedSumSpec], with_main_term: bool = False, threads: int | None = None) -> ShiftedSweep:
    """
    One row per spec, in input order. Rows with two cusp-form sources must
    keep |D|/theorem1_scale below TH1_RATIO_LIMIT.
    """
    rows = ordered_map(lambda spec: shifted_row(spec, with_main_term), specs, threads)
    for spec, row in zip(specs, rows):
        if SourceKind.divisor in (spec.phi.kind, spec.psi.kind):
            continue
        if row.ratio_th1 >= TH1_RATIO_LIMIT:
            logger.error(f"Ratio to the power-saving scale {row.ratio_th1:.6g} at X={row.X:g}, Y={row.Y:g}")
            raise ScaleRatioError(row.model_dump(), TH1_RATIO_LIMIT)
    return ShiftedSweep(rows=rows)
