from pathlib import Path
from typing import TextIO
import io
import logging

import numpy as np
from cachetools import cached

from src.arith.service import divisor_tau_table
from src.characters.model import DirichletCharacter
from src.characters.service import character_by_label, principal_character
from src.coeffs.model import CoefficientFile, CoefficientHeader, CoefficientSource, DeligneReport, SourceKind
from src.coeffs.parsers import get_parser
from src.exceptions.characters import CharacterModulusError
from src.exceptions.coeffs import CoefficientArgumentError, CoefficientFileError
from src.utils.cache import tau_cache, tau_lock

logger = logging.getLogger(__name__)

DELTA_WEIGHT = 12


# --- Ramanujan tau ---


def _pentagonal_terms(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponents k ≥ 1 and signs of ∏(1 − x^n) = Σ_j (−1)^j x^{j(3j−1)/2}, for k < n_max."""
    exponents, signs = [], []
    j = 1
    while j * (3 * j - 1) // 2 < n_max:
        sign = -1 if j % 2 else 1
        for k in (j * (3 * j - 1) // 2, j * (3 * j + 1) // 2):
            if k < n_max:
                exponents.append(k)
                signs.append(sign)
        j += 1
    order = np.argsort(exponents)
    return np.array(exponents, dtype=np.int64)[order], np.array(signs, dtype=np.int64)[order]


@cached(cache=tau_cache, lock=tau_lock)
def ramanujan_tau(m_max: int) -> np.ndarray:
    """
    τ(m) for 0 ≤ m ≤ m_max as exact Python integers (τ(0) = 0), from
    x·∏(1 − x^n)^24. With P = ∏(1 − x^n) and f = P^24, comparing
    coefficients in P·f' = 24·P'·f gives n·f_n = Σ_{k≥1} a_k (25k − n) f_{n−k},
    where a_k are the sparse pentagonal coefficients of P.
    """
    if m_max < 1:
        raise CoefficientArgumentError(f"m_max must be positive, got {m_max}", m_max=m_max)
    logger.info(f"Expanding the eta product up to m={m_max}")

    n_terms = m_max
    exponents, signs = _pentagonal_terms(n_terms)
    f = np.zeros(n_terms, dtype=object)
    f[0] = 1
    for n in range(1, n_terms):
        count = int(np.searchsorted(exponents, n, side="right"))
        k = exponents[:count]
        weights = (signs[:count] * (25 * k - n)).astype(object)
        total = int(np.dot(weights, f[n - k])) if count else 0
        value, remainder = divmod(total, n)
        if remainder:
            raise ArithmeticError(f"eta-power recurrence lost exactness at n={n}")
        f[n] = value

    tau = np.zeros(m_max + 1, dtype=object)
    tau[1:] = f
    return tau


def _truncated_product(a: list[int], b: list[int], n_terms: int) -> list[int]:
    out = [0] * n_terms
    for i, ai in enumerate(a[:n_terms]):
        if ai:
            for j in range(n_terms - i):
                out[i + j] += ai * b[j]
    return out


def tau_by_squaring(m_max: int) -> np.ndarray:
    """
    Independent τ oracle: builds ∏(1 − x^n) densely and forms the 24th power
    as P^16·P^8 by repeated squaring of truncated series. Quadratic, for
    small m_max only.
    """
    n_terms = m_max
    product = [0] * n_terms
    product[0] = 1
    exponents, signs = _pentagonal_terms(n_terms)
    for k, sign in zip(exponents, signs):
        product[int(k)] = int(sign)

    powers = {1: product}
    for exponent in (2, 4, 8, 16):
        half = powers[exponent // 2]
        powers[exponent] = _truncated_product(half, half, n_terms)
    f = _truncated_product(powers[16], powers[8], n_terms)

    tau = np.zeros(m_max + 1, dtype=object)
    tau[1:] = f
    return tau


# --- Sources ---


def delta_coefficients(m_max: int) -> CoefficientSource:
    """λ(m) = τ(m)·m^{−11/2} for Ramanujan's Δ (weight 12, level 1)."""
    tau = ramanujan_tau(m_max)
    m = np.arange(1, m_max + 1, dtype=np.float64)
    coeffs = np.zeros(m_max + 1)
    coeffs[1:] = tau[1:].astype(np.float64) * m ** (-(DELTA_WEIGHT - 1) / 2)
    coeffs.setflags(write=False)
    return CoefficientSource(
        kind=SourceKind.holomorphic,
        level=1,
        weight=DELTA_WEIGHT,
        coeffs=coeffs,
        name="delta",
    )


def divisor_analog(m_max: int) -> CoefficientSource:
    if m_max < 1:
        raise CoefficientArgumentError(f"m_max must be positive, got {m_max}", m_max=m_max)
    coeffs = divisor_tau_table(m_max).astype(np.float64)
    coeffs.setflags(write=False)
    return CoefficientSource(kind=SourceKind.divisor, level=1, mu=0.0, sign=1, coeffs=coeffs, name="divisor")


def contragredient(source: CoefficientSource) -> CoefficientSource:
    coeffs = np.conj(source.coeffs) if np.iscomplexobj(source.coeffs) else source.coeffs
    root = source.root.conjugate() if source.root is not None else None
    return source.model_copy(update={"coeffs": coeffs, "root": root, "name": f"{source.name}~" if source.name else ""})


# --- Files ---


def _as_document(source: CoefficientSource) -> CoefficientFile:
    values = source.coeffs[1:]
    return CoefficientFile(
        header=CoefficientHeader(
            kind=source.kind,
            level=source.level,
            weight=source.weight,
            mu=source.mu,
            nebentypus=source.nebentypus,
            sign=source.sign,
            root=source.root,
        ),
        m=np.arange(1, values.size + 1, dtype=np.int64),
        re=np.real(values).astype(np.float64),
        im=np.imag(values).astype(np.float64) if np.iscomplexobj(values) else np.zeros(values.size),
    )


def _from_document(document: CoefficientFile, name: str) -> CoefficientSource:
    header = document.header
    if np.any(document.im != 0):
        values = document.re + 1j * document.im
    else:
        values = document.re.copy()
    coeffs = np.concatenate([np.zeros(1, dtype=values.dtype), values])
    coeffs.setflags(write=False)
    mu = header.mu
    sign = header.sign
    if header.kind == SourceKind.divisor:
        mu, sign = 0.0, 1
    return CoefficientSource(
        kind=header.kind,
        level=header.level,
        nebentypus=header.nebentypus,
        weight=header.weight,
        mu=mu,
        sign=sign,
        root=header.root,
        coeffs=coeffs,
        name=name,
    )


def load_coefficients(source: str | Path | TextIO) -> CoefficientSource:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise CoefficientFileError(0, f"file not found: {path}")
        with path.open(encoding="utf-8") as stream:
            return load_coefficients_from(stream, path.stem)
    return load_coefficients_from(source, "stream")


def load_coefficients_from(stream: TextIO, name: str) -> CoefficientSource:
    lines = stream.readlines()
    version = lines[0].split()[1] if lines and len(lines[0].split()) > 1 else ""
    document = get_parser(version).parse(lines)
    source = _from_document(document, name)
    logger.info(f"Loaded {source.kind} coefficients {name!r} up to m={source.m_max}")
    return source


def export_coefficients(source: CoefficientSource, target: str | Path | TextIO) -> None:
    document = _as_document(source)
    parser = get_parser("v1")
    if isinstance(target, (str, Path)):
        with Path(target).open("w", encoding="utf-8", newline="\n") as stream:
            parser.write(document, stream)
    else:
        parser.write(document, target)
    logger.debug(f"Exported {source.m_max} coefficients of {source.name!r}")


def export_to_text(source: CoefficientSource) -> str:
    buffer = io.StringIO()
    export_coefficients(source, buffer)
    return buffer.getvalue()


# --- Diagnostics ---


def rankin_selberg_ratio(source: CoefficientSource, x: float) -> float:
    """(Σ_{m ≤ x} |λ(m)|²)/x."""
    if x < 1:
        raise CoefficientArgumentError(f"x must be at least 1, got {x}", x=x)
    top = int(np.floor(x))
    source.require(top)
    return float(np.sum(np.abs(source.coeffs[1 : top + 1]) ** 2) / x)


def rs_local_average(source: CoefficientSource, y: float) -> float:
    """Root mean square of λ(m) over y/2 < m ≤ y, clipped to the available range."""
    top = min(int(np.floor(y)), source.m_max)
    bottom = max(1, int(np.floor(y / 2)) + 1)
    if top < bottom:
        return float(np.sqrt(np.mean(np.abs(source.coeffs[1 : top + 1]) ** 2))) if top >= 1 else 1.0
    return float(np.sqrt(np.mean(np.abs(source.coeffs[bottom : top + 1]) ** 2)))


def deligne_check(source: CoefficientSource) -> DeligneReport:
    """max |λ(m)|/τ(m), with τ the divisor function; at most 1 for Δ."""
    ratios = np.abs(source.coeffs[1:]) / divisor_tau_table(source.m_max)[1:]
    argmax = int(np.argmax(ratios))
    return DeligneReport(max_ratio=float(ratios[argmax]), argmax=argmax + 1, m_max=source.m_max)


def hecke_defect(tau: np.ndarray, p: int, j: int) -> int:
    """τ(p^{j+1}) − τ(p)τ(p^j) + p^{11}τ(p^{j−1}); zero for Δ."""
    return int(tau[p ** (j + 1)] - tau[p] * tau[p**j] + p**11 * tau[p ** (j - 1)])


def nebentypus_character(source: CoefficientSource) -> DirichletCharacter:
    """The nebentypus as a character mod N ("trivial" is the principal one)."""
    if source.nebentypus == "trivial":
        return principal_character(source.level)
    chi = character_by_label(source.nebentypus)
    if chi.modulus != source.level:
        raise CharacterModulusError(source.level, chi.modulus)
    return chi


# --- Source selection ---

BUILTIN_FORMS = {
    "delta": delta_coefficients,
    "divisor": divisor_analog,
}


def resolve_source(form: str | None, path: str | Path | None, m_max: int) -> CoefficientSource:
    """
    A built-in source generated up to m_max, or a coefficient file. Exactly
    one of `form` and `path` must be given.
    """
    if (form is None) == (path is None):
        raise CoefficientArgumentError("give exactly one of --form and --coef", form=form, path=str(path))
    if path is not None:
        return load_coefficients(path)
    if form not in BUILTIN_FORMS:
        raise CoefficientArgumentError(f"unknown form {form!r}", form=form, choices=sorted(BUILTIN_FORMS))
    return BUILTIN_FORMS[form](max(int(m_max), 1))
