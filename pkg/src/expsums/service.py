from math import gcd, sqrt
import logging

import numpy as np

from src.arith.service import divisor_tau, gcd3, inverse_table, ramanujan_sum, reduced_residues
from src.characters.model import DirichletCharacter
from src.characters.service import character_matrix, enumerate_characters
from src.exceptions.expsums import KloostermanArgumentError, WeilBoundViolation
from src.expsums.model import KloostermanQuery, WeilRow, WeilScanResult
from src.utils.pool import ordered_map

logger = logging.getLogger(__name__)

WEIL_SLACK = 1e-9

# 20 values with many small prime factors, so that (m, n, q) > 1 occurs often
DEFAULT_SAMPLE_VALUES = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 16, 18, 20, 24, 30, 36, 60)


def default_sample() -> list[tuple[int, int]]:
    return [(m, n) for m in DEFAULT_SAMPLE_VALUES for n in DEFAULT_SAMPLE_VALUES]


def _phase_matrix(q: int, pairs: list[tuple[int, int]]) -> np.ndarray:
    """e_q(d·m + d̄·n) with rows over reduced d and columns over the pairs."""
    d = reduced_residues(q)
    d_bar = inverse_table(q)
    m = np.array([pair[0] % q for pair in pairs], dtype=np.int64)
    n = np.array([pair[1] % q for pair in pairs], dtype=np.int64)
    exponent = (np.outer(d, m) + np.outer(d_bar, n)) % q
    return np.exp(2j * np.pi * exponent / q)


def kloosterman(query: KloostermanQuery) -> complex:
    q = query.q
    d = reduced_residues(q)
    d_bar = inverse_table(q)
    exponent = (d * (query.m % q) + d_bar * (query.n % q)) % q
    terms = np.exp(2j * np.pi * exponent / q)
    if query.twist is not None:
        terms = query.twist.values[d] * terms
    return complex(np.sum(terms))


def ramanujan_via_kloosterman(q: int, h: int) -> float:
    """|S(h, 0; q) − c_q(h)|, with c_q(h) from its divisor-sum formula."""
    return abs(kloosterman(KloostermanQuery(m=h, n=0, q=q)) - ramanujan_sum(q, h))


def weil_estermann_bound(query: KloostermanQuery) -> float:
    return sqrt(gcd3(query.m, query.n, query.q)) * sqrt(query.q) * divisor_tau(query.q)


def twisted_kloosterman_row(chi_values: np.ndarray, m: int, q: int) -> np.ndarray:
    """
    S_χ(m, t; q) for every t mod q at once, with `chi_values` the table of
    χ on 0..q−1.
    """
    d = reduced_residues(q)
    d_bar = inverse_table(q)
    weights = chi_values[d] * np.exp(2j * np.pi * ((d * (m % q)) % q) / q)
    t = np.arange(q, dtype=np.int64)
    phases = np.exp(2j * np.pi * (np.outer(t, d_bar) % q) / q)
    return phases @ weights


def _scan_modulus(q: int, pairs: list[tuple[int, int]]) -> tuple[WeilRow, list[WeilRow], int]:
    characters = enumerate_characters(q)
    values = character_matrix(characters, reduced_residues(q))
    sums = values @ _phase_matrix(q, pairs)
    bounds = np.array(
        [sqrt(gcd3(m, n, q)) * sqrt(q) * divisor_tau(q) for m, n in pairs]
    )
    ratios = np.abs(sums) / bounds[None, :]

    rows = []
    for row_index, chi in enumerate(characters):
        column = int(np.argmax(ratios[row_index]))
        m, n = pairs[column]
        rows.append(
            WeilRow(
                q=q,
                character_label=chi.label,
                m=m,
                n=n,
                abs_sum=float(abs(sums[row_index, column])),
                bound=float(bounds[column]),
                ratio=float(ratios[row_index, column]),
            )
        )
    worst = max(rows, key=lambda row: row.ratio)
    return worst, rows, sums.size


def scan_weil(
    q_max: int,
    sample: list[tuple[int, int]] | None = None,
    threads: int | None = None,
    per_character_rows: bool = False,
) -> WeilScanResult:
    """
    Checks |S_χ(m, n; q)| ≤ (m, n, q)^{1/2} q^{1/2} τ(q) for every q ≤ q_max,
    every character mod q and every sampled pair. Returns the worst row per
    modulus (or per character) and raises on the first violation.
    """
    pairs = list(sample) if sample is not None else default_sample()
    logger.info(f"Weil scan up to q={q_max} with {len(pairs)} pairs")

    results = ordered_map(lambda q: _scan_modulus(q, pairs), range(1, q_max + 1), threads)

    rows: list[WeilRow] = []
    witness: WeilRow | None = None
    checked = 0
    for worst, character_rows, count in results:
        checked += count
        rows.extend(character_rows if per_character_rows else [worst])
        if witness is None or worst.ratio > witness.ratio:
            witness = worst

    if witness is not None and witness.ratio > 1 + WEIL_SLACK:
        logger.error(f"Weil bound violated: {witness}")
        raise WeilBoundViolation(witness.model_dump())

    max_ratio = witness.ratio if witness is not None else 0.0
    logger.info(f"Weil scan finished: {checked} sums, max ratio {max_ratio:.6f}")
    return WeilScanResult(
        q_max=q_max,
        sample_size=len(pairs),
        sums_checked=checked,
        max_ratio=max_ratio,
        witness=witness,
        rows=rows,
    )


def kloosterman_gcd_divides(h: int, m: int, n: int, a: int, b: int, q: int, N: int, sign: int = 1) -> bool:
    """
    For q with Nab | q and (h, q) = (h, Nab): (−h, ±(am − bn), q) divides
    N·(h, n, a)·(h, m, b), writing (x, y, z) for the gcd of three integers.
    """
    left = gcd3(-h, sign * (a * m - b * n), q)
    right = N * gcd3(h, n, a) * gcd3(h, m, b)
    return right % left == 0


def selberg_identity_defect(q1: int, q2: int) -> float:
    """|S(1, 1; q1q2) − S(q̄2², 1; q1)·S(q̄1², 1; q2)| for coprime q1, q2."""
    if q1 < 1 or q2 < 1 or gcd(q1, q2) != 1:
        raise KloostermanArgumentError(f"Moduli must be positive and coprime, got {q1} and {q2}.", q1=q1, q2=q2)
    q2_bar = pow(q2, -1, q1) if q1 > 1 else 0
    q1_bar = pow(q1, -1, q2) if q2 > 1 else 0
    whole = kloosterman(KloostermanQuery(m=1, n=1, q=q1 * q2))
    first = kloosterman(KloostermanQuery(m=q2_bar * q2_bar, n=1, q=q1))
    second = kloosterman(KloostermanQuery(m=q1_bar * q1_bar, n=1, q=q2))
    return abs(whole - first * second)


def selberg_identity_check(q_max: int) -> float:
    """Largest defect of the twisted multiplicativity over coprime q1, q2 ≤ q_max."""
    pairs = [(q1, q2) for q1 in range(1, q_max + 1) for q2 in range(1, q_max + 1) if gcd(q1, q2) == 1]
    defect = max(selberg_identity_defect(q1, q2) for q1, q2 in pairs)
    logger.debug(f"Twisted multiplicativity over {len(pairs)} pairs: max defect {defect:.3g}")
    return defect
