from math import ceil, floor, gcd, pi, sqrt
import logging

import mpmath
import numpy as np
from scipy import special, stats

from src.arith.service import euler_phi, prime_factorization, reduced_residue_max_gap
from src.characters.model import DirichletCharacter
from src.characters.service import character_matrix, enumerate_characters, gauss_sum, primitive_characters
from src.coeffs.model import CoefficientSource, SourceKind
from src.coeffs.service import contragredient, nebentypus_character
from src.exceptions.lfun import (
    AfeWeightDisagreement,
    AmplifierIdentityError,
    LValueArgumentError,
    RootNumberError,
    UnsupportedSourceError,
)
from src.lfun.model import (
    AfeResult,
    AmplifierMoment,
    AmplifierSpec,
    LValueRequest,
    Offdiagonal,
    OmegaRow,
    ParsevalCheck,
    ShiftRow,
    SweepResult,
    SweepRow,
)
from src.shifted.model import ShiftedSumSpec
from src.shifted.service import shifted_sum_direct
from src.utils.pool import block_sum, ordered_map, tree_sum
from src.weights.service import tensor_weight

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-8
# Γ(z, x)/Γ(z) is below 1e−15 once x exceeds GAMMA_TAIL + 2(κ + |s|)
GAMMA_TAIL = 45.0
ALTERNATE_CUTOFF = 1.25
IDENTITY_TOLERANCE = 1e-8


# --- Root number and truncation ---


def _check_holomorphic(phi: CoefficientSource) -> None:
    if phi.kind != SourceKind.holomorphic:
        raise UnsupportedSourceError(phi.kind, phi.level)


def root_number(phi: CoefficientSource, chi: DirichletCharacter) -> complex:
    """
    ε(φ⊗χ) = ε(φ)·ψ(q)·χ(N)·τ(χ)²/q for φ of level N and nebentypus ψ, with
    ε(φ) = i^k at level 1 and the root from the coefficient header otherwise.
    """
    _check_holomorphic(phi)
    q = chi.modulus
    if phi.level == 1:
        base = (1, 1j, -1, -1j)[phi.weight % 4]
    elif phi.root is None:
        raise UnsupportedSourceError(phi.kind, phi.level)
    else:
        base = phi.root
    psi = nebentypus_character(phi)
    root = complex(base * psi(q) * chi(phi.level) * gauss_sum(chi) ** 2 / q)
    if abs(abs(root) - 1) > ROOT_TOLERANCE:
        logger.error(f"Root number {root} for {chi.label} is not unimodular")
        raise RootNumberError(root)
    return root


def analytic_conductor_root(phi: CoefficientSource, q: int) -> float:
    """Q = q√N/(2π), so that Λ(s) = Q^sΓ(s + (k − 1)/2)L(s)."""
    return q * sqrt(phi.level) / (2 * pi)


def afe_length(q: int, level: int, weight: int, s: complex = 0.5, cutoff: float = 1.0) -> int:
    """Last m at which either incomplete-gamma weight is above 1e−15."""
    kappa = (weight - 1) / 2
    Q = q * sqrt(level) / (2 * pi)
    return int(ceil((GAMMA_TAIL + 2 * (kappa + abs(s))) * Q * max(cutoff, 1 / cutoff))) + 1


def afe_truncation(q: int, phi: CoefficientSource, s: complex = 0.5, cutoff: float = 1.0) -> int:
    _check_holomorphic(phi)
    return afe_length(q, phi.level, phi.weight, s, cutoff)


def _regularized_upper_gamma(z: complex, x: np.ndarray) -> np.ndarray:
    if complex(z).imag == 0 and complex(z).real > 0:
        return special.gammaincc(complex(z).real, x)
    return np.array([complex(mpmath.gammainc(z, float(value), regularized=True)) for value in x])


def _gamma_ratio(numerator: complex, denominator: complex) -> complex:
    if complex(numerator).imag == 0 and complex(denominator).imag == 0:
        return float(special.gamma(complex(numerator).real) / special.gamma(complex(denominator).real))
    return complex(mpmath.gamma(numerator) / mpmath.gamma(denominator))


def afe_weights(phi: CoefficientSource, q: int, s: complex, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    """
    V₁(m) = m^{−s}Γ(s + κ, m/(QA))/Γ(s + κ) and
    V₂(m) = Q^{1−2s}m^{s−1}Γ(1 − s + κ, mA/Q)/Γ(s + κ) on m = 1..m_cut,
    so that L(s) = Σ a(m)V₁(m) + ε Σ ā(m)V₂(m).
    """
    kappa = (phi.weight - 1) / 2
    Q = analytic_conductor_root(phi, q)
    m = np.arange(1, afe_truncation(q, phi, s, cutoff) + 1, dtype=np.float64)
    if complex(s).imag == 0:
        s = complex(s).real
    first = m ** (-s) * _regularized_upper_gamma(s + kappa, m / (Q * cutoff))
    second = (
        Q ** (1 - 2 * s)
        * m ** (s - 1)
        * _regularized_upper_gamma(1 - s + kappa, m * cutoff / Q)
        * _gamma_ratio(1 - s + kappa, s + kappa)
    )
    return first, second


def _afe_batch(
    phi: CoefficientSource, characters: list[DirichletCharacter], s: complex, cutoff: float, epsilon: float = 0.0
) -> list[AfeResult]:
    """Approximate functional equation for several characters of one modulus."""
    q = characters[0].modulus
    first_weights, second_weights = afe_weights(phi, q, s, cutoff)
    m_cut = first_weights.size
    phi.require(m_cut, "phi")
    m = np.arange(1, m_cut + 1)
    twisted = character_matrix(characters, m % q) * phi.coeffs[m][None, :]
    firsts = twisted @ first_weights
    duals = np.conj(twisted) @ second_weights
    results = []
    for chi, first, dual in zip(characters, firsts, duals):
        root = root_number(phi, chi)
        results.append(
            AfeResult(
                label=chi.label,
                q=q,
                value=complex(first + root * dual),
                first=complex(first),
                second=complex(root * dual),
                root=root,
                m_cut=m_cut,
                nominal_length=float(q ** (1 + epsilon)),
                conductor=float(phi.level * q * q),
            )
        )
    return results


def afe_components(req: LValueRequest) -> AfeResult:
    _check_holomorphic(req.phi)
    return _afe_batch(req.phi, [req.chi], req.s, req.cutoff, req.epsilon)[0]


def afe_lvalue(req: LValueRequest) -> complex:
    """L(s, φ⊗χ) = Σ λ(m)χ(m)V₁(m) + ε Σ λ̄(m)χ̄(m)V₂(m)."""
    logger.info(f"L-value for {req.phi.name or req.phi.kind} ⊗ {req.chi.label} at s={req.s}")
    return afe_components(req).value


def afe_cutoff_difference(req: LValueRequest, alternate: float = ALTERNATE_CUTOFF) -> float:
    """|L_A(s) − L_{A'}(s)| for two cutoffs; small only when the root number is right."""
    other = req.model_copy(update={"cutoff": alternate})
    return abs(afe_lvalue(req) - afe_lvalue(other))


def certify_afe(req: LValueRequest, tolerance: float = 1e-4, alternate: float = ALTERNATE_CUTOFF) -> float:
    difference = afe_cutoff_difference(req, alternate)
    if difference > tolerance:
        logger.error(f"Cutoffs {req.cutoff} and {alternate} disagree by {difference:.3e} for {req.chi.label}")
        raise AfeWeightDisagreement(req.chi.label, difference, tolerance)
    return difference


def lvalues_for_modulus(
    phi: CoefficientSource, q: int, s: complex = 0.5, cutoff: float = 1.0
) -> list[AfeResult]:
    """L(s, φ⊗χ) for every primitive χ mod q."""
    _check_holomorphic(phi)
    if gcd(q, phi.level) != 1:
        raise LValueArgumentError(f"q={q} must be coprime to the level {phi.level}", q=q, level=phi.level)
    characters = primitive_characters(q)
    if not characters:
        return []
    return _afe_batch(phi, characters, s, cutoff)


# --- Amplifier ---


def optimal_amplifier_length(q: int, M: float) -> float:
    """L with q = L^{27/10}M^{9/10}."""
    return (q / M**0.9) ** (10 / 27)


def amplifier_scale(q: int, M: float) -> float:
    """q^{17/54}M^{2/3}."""
    return q ** (17 / 54) * M ** (2 / 3)


def _weighted_coefficients(spec: AmplifierSpec) -> tuple[np.ndarray, np.ndarray]:
    """(m, λ(m)k(m)) over the support of k."""
    lo, hi = spec.k_weight.support
    m = np.arange(floor(lo) + 1, ceil(hi), dtype=np.int64)
    if m.size:
        spec.phi.require(int(m[-1]), "phi")
    return m, spec.phi.coeffs[m] * spec.k_weight(m.astype(np.float64))


def _twisted_sums(spec: AmplifierSpec, characters: list[DirichletCharacter]) -> np.ndarray:
    """S_ω = Σ λ(m)ω(m)k(m) for each character."""
    m, weights = _weighted_coefficients(spec)
    return character_matrix(characters, m % spec.q) @ weights


def _amplifier_values(spec: AmplifierSpec, characters: list[DirichletCharacter]) -> np.ndarray:
    """|Σ_{l≤L} χ̄(l)ω(l)|² for each character ω."""
    l = np.arange(1, spec.L_amp + 1)
    target = np.conj(spec.chi(l))
    return np.abs(character_matrix(characters, l % spec.q) @ target) ** 2


def amplifier_moment(spec: AmplifierSpec, threads: int | None = None) -> AmplifierMoment:
    """S = Σ*_ω |Σ_{l≤L} χ̄(l)ω(l)|²|S_ω|², summed in character order."""
    q = spec.q
    logger.info(f"Amplified moment q={q}, L={spec.L_amp}, M={spec.M}")
    characters = primitive_characters(q)

    def row(omega: DirichletCharacter) -> OmegaRow:
        S = complex(_twisted_sums(spec, [omega])[0])
        amplifier = float(_amplifier_values(spec, [omega])[0])
        return OmegaRow(
            label=omega.label, amplifier=amplifier, S_abs=abs(S), S_re=S.real, S_im=S.imag, contribution=amplifier * abs(S) ** 2
        )

    rows = ordered_map(row, characters, threads)
    target = row(spec.chi)
    gap = reduced_residue_max_gap(q) if q > 1 else 1
    return AmplifierMoment(
        S=float(tree_sum([r.contribution for r in rows])),
        chi_term=target.contribution,
        gap_bound=(spec.L_amp // gap) ** 2,
        scale_ratio=target.S_abs / amplifier_scale(q, spec.M),
        rows=rows,
    )


def amplified_coefficients(spec: AmplifierSpec) -> np.ndarray:
    """a(n) = Σ_{lm=n, l≤L} χ̄(l)λ(m)k(m) on 0 ≤ n ≤ N = 2LM."""
    m, weights = _weighted_coefficients(spec)
    a = np.zeros(spec.N + 1, dtype=complex)
    for l in range(1, spec.L_amp + 1):
        np.add.at(a, l * m, np.conj(spec.chi(l)) * weights)
    return a


def moment_by_coefficients(spec: AmplifierSpec) -> float:
    """S as Σ*_ω |Σ_n a(n)ω(n)|²."""
    a = amplified_coefficients(spec)
    n = np.arange(a.size)
    sums = character_matrix(primitive_characters(spec.q), n % spec.q) @ a
    return float(block_sum(np.abs(sums) ** 2))


def _correlation(a: np.ndarray) -> np.ndarray:
    """D(h) = Σ_n a(n + h)ā(n) at index h + len(a) − 1."""
    return np.correlate(a, a, mode="full")


def offdiagonal_by_shifted_sums(spec: AmplifierSpec, h: int) -> complex:
    """
    D(h) = Σ_{l₁,l₂≤L} χ̄(l₁)χ(l₂)D_f(l₁/g, l₂/g; h/g), g = (l₁, l₂), with
    f(x, y) = k(x/a)k(y/b) and the dual coefficients in the second slot.
    """
    if h == 0:
        raise LValueArgumentError("the shifted-sum route needs h ≠ 0", h=h)
    phi, phi_dual = spec.phi, contragredient(spec.phi)
    terms = []
    for l1 in range(1, spec.L_amp + 1):
        for l2 in range(1, spec.L_amp + 1):
            g = gcd(l1, l2)
            if h % g:
                continue
            a, b, shift = l1 // g, l2 // g, h // g
            if shift > 0:
                shifted = ShiftedSumSpec(a=a, b=b, h=shift, sign=-1, phi=phi, psi=phi_dual, weight=tensor_weight(spec.k_weight, a, b))
            else:
                shifted = ShiftedSumSpec(a=b, b=a, h=-shift, sign=-1, phi=phi_dual, psi=phi, weight=tensor_weight(spec.k_weight, b, a))
            terms.append(complex(np.conj(spec.chi(l1)) * spec.chi(l2)) * shifted_sum_direct(shifted))
    return complex(tree_sum(terms))


def amplifier_offdiagonal(spec: AmplifierSpec, shifted_route: bool = True, tolerance: float | None = None) -> Offdiagonal:
    """
    D(h) = Σ_{n₁−n₂=h} a(n₁)ā(n₂) for h ≡ 0 mod q, 0 < h ≤ N, by correlation and
    (optionally) through shifted convolution sums; the bound
    φ(q)·Σ_{h≡0 (q), |h|≤N} D(h) is returned as `rhs`.
    """
    q, N = spec.q, spec.N
    a = amplified_coefficients(spec)
    correlation = _correlation(a)
    centre = a.size - 1
    D0 = float(correlation[centre].real)
    D0_squares = float(np.sum(np.abs(a) ** 2))
    shifts = np.arange(-(N // q) * q, N + 1, q)
    rhs = euler_phi(q) * float(np.sum(correlation[centre + shifts].real))

    rows = []
    for h in range(q, N + 1, q):
        D = complex(correlation[centre + h])
        row = ShiftRow(h=h, D_re=D.real, D_im=D.imag)
        if shifted_route:
            D_shifted = offdiagonal_by_shifted_sums(spec, h)
            difference = abs(D - D_shifted)
            if tolerance is not None and difference > tolerance * max(1.0, abs(D)):
                raise AmplifierIdentityError(f"D({h}) by two routes", abs(D), abs(D_shifted), tolerance)
            row = row.model_copy(
                update={"D_shifted_re": D_shifted.real, "D_shifted_im": D_shifted.imag, "difference": difference}
            )
        rows.append(row)
    logger.debug(f"D(0)={D0:.12g}, bound side {rhs:.12g} over {shifts.size} shifts")
    return Offdiagonal(
        D0=D0,
        D0_squares=D0_squares,
        rhs=rhs,
        N=N,
        scale=spec.L_amp**2.7 * spec.M**0.9,
        rows=rows,
    )


def check_amplifier_identities(spec: AmplifierSpec, tolerance: float = IDENTITY_TOLERANCE) -> tuple[AmplifierMoment, Offdiagonal]:
    """Positivity, the orthogonality bound and both D(h) routes, raising on failure."""
    moment = amplifier_moment(spec)
    second = moment_by_coefficients(spec)
    if abs(moment.S - second) > tolerance * max(1.0, moment.S):
        raise AmplifierIdentityError("S by characters and by a(n)", moment.S, second, tolerance)
    if moment.S < moment.chi_term * (1 - tolerance) and spec.chi.is_primitive:
        raise AmplifierIdentityError("S against its ω = χ term", moment.S, moment.chi_term, tolerance)
    offdiagonal = amplifier_offdiagonal(spec, shifted_route=True, tolerance=tolerance)
    if moment.S > offdiagonal.rhs * (1 + tolerance) + tolerance:
        raise AmplifierIdentityError("S against φ(q)Σ D(h)", moment.S, offdiagonal.rhs, tolerance)
    return moment, offdiagonal


def parseval_check(spec: AmplifierSpec) -> ParsevalCheck:
    """Σ_{ω mod q}|S_ω|² = φ(q)·Σ_{(r,q)=1}|Σ_{m≡r} λ(m)k(m)|²."""
    q = spec.q
    lhs = float(np.sum(np.abs(_twisted_sums(spec, enumerate_characters(q))) ** 2))
    m, weights = _weighted_coefficients(spec)
    residues = m % q
    coprime = np.gcd(residues, q) == 1
    real = np.bincount(residues[coprime], weights=np.real(weights)[coprime], minlength=q)
    imag = np.bincount(residues[coprime], weights=np.imag(weights)[coprime], minlength=q)
    rhs = euler_phi(q) * float(np.sum(real**2 + imag**2))
    return ParsevalCheck(lhs=lhs, rhs=rhs, difference=abs(lhs - rhs))


# --- Sweep ---


def _is_prime_power(q: int) -> bool:
    return q > 1 and len(prime_factorization(q)) == 1


def _has_primitive_characters(q: int) -> bool:
    return q % 4 != 2


def subconvexity_sweep(
    phi: CoefficientSource, q_range, s: complex = 0.5, cutoff: float = 1.0, threads: int | None = None
) -> SweepResult:
    """
    max_χ |L(s, φ⊗χ)| over primitive χ for each prime power q coprime to the
    level, with the least-squares slope of log max|L| against log q and its
    95% confidence interval.
    """
    moduli = [q for q in q_range if _is_prime_power(q) and _has_primitive_characters(q) and gcd(q, phi.level) == 1]
    logger.info(f"Subconvexity sweep over {len(moduli)} moduli")

    def sweep_row(q: int) -> SweepRow:
        results = lvalues_for_modulus(phi, q, s, cutoff)
        best = max(results, key=lambda result: abs(result.value))
        return SweepRow(
            q=q,
            max_abs_L=abs(best.value),
            argmax=best.label,
            sqrt_q=sqrt(q),
            subconvex_scale=q ** (0.5 - 1 / 54),
        )

    rows = ordered_map(sweep_row, moduli, threads)
    if len(rows) < 3:
        return SweepResult(rows=rows)
    x = np.log([row.q for row in rows])
    y = np.log([row.max_abs_L for row in rows])
    fit = stats.linregress(x, y)
    spread = stats.t.ppf(0.975, len(rows) - 2) * fit.stderr
    return SweepResult(
        rows=rows,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        ci_low=float(fit.slope - spread),
        ci_high=float(fit.slope + spread),
    )
