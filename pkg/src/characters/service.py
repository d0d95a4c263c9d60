from itertools import product
from math import gcd, lcm
import logging

import numpy as np
from cachetools import cached
from sympy.ntheory import primitive_root

from src.arith.service import divisors, euler_phi, prime_factorization
from src.characters.model import CharacterGroup, DirichletCharacter
from src.exceptions.characters import CharacterLabelError
from src.utils.cache import character_group_cache, character_group_lock

logger = logging.getLogger(__name__)


def _prime_power_factors(p: int, e: int) -> list[tuple[int, int, dict[int, int]]]:
    """
    Cyclic factors of (ℤ/p^e)^× as (generator, order, log table) triples;
    2-adic moduli use the generators −1 and 5.
    """
    pe = p**e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [(3, 2, {1: 0, 3: 1})]
        half = 2 ** (e - 2)
        sign_logs: dict[int, int] = {}
        five_logs: dict[int, int] = {}
        power = 1
        for b in range(half):
            for a, value in ((0, power), (1, (-power) % pe)):
                sign_logs[value] = a
                five_logs[value] = b
            power = power * 5 % pe
        return [(pe - 1, 2, sign_logs), (5, half, five_logs)]

    g = int(primitive_root(pe))
    order = pe - pe // p
    table: dict[int, int] = {}
    power = 1
    for k in range(order):
        table[power] = k
        power = power * g % pe
    return [(g, order, table)]


def _crt_lift(residue: int, pe: int, cofactor: int) -> int:
    """The element ≡ residue mod p^e and ≡ 1 mod the cofactor."""
    if cofactor == 1:
        return residue % pe
    q = pe * cofactor
    return (residue * cofactor * pow(cofactor, -1, pe) + pe * pow(pe, -1, cofactor)) % q


@cached(cache=character_group_cache, lock=character_group_lock)
def character_group(q: int) -> CharacterGroup:
    residues = np.arange(q)
    coprime = np.gcd(residues, q) == 1
    generators: list[int] = []
    orders: list[int] = []
    rows: list[np.ndarray] = []

    for p, e in sorted(prime_factorization(q).items()):
        pe = p**e
        cofactor = q // pe
        for local_generator, order, table in _prime_power_factors(p, e):
            lifted = _crt_lift(local_generator, pe, cofactor)
            generators.append(lifted)
            orders.append(order)
            row = np.full(q, -1, dtype=np.int64)
            local = residues[coprime] % pe
            row[coprime] = [table[int(r)] for r in local]
            rows.append(row)

    logs = np.vstack(rows) if rows else np.zeros((0, q), dtype=np.int64)
    exponent = lcm(*orders) if orders else 1
    logger.debug(f"Character group mod {q}: orders {orders}, generators {generators}")
    return CharacterGroup(
        modulus=q,
        generators=tuple(generators),
        orders=tuple(orders),
        exponent=exponent,
        logs=logs,
        coprime=coprime,
    )


def _phases(group: CharacterGroup, exponents: tuple[int, ...]) -> np.ndarray:
    """Integer phase k(n) with χ(n) = e(k(n)/E); −1 marks non-coprime n."""
    E = group.exponent
    phase = np.zeros(group.modulus, dtype=np.int64)
    for a, order, row in zip(exponents, group.orders, group.logs):
        phase = (phase + a * (E // order) * row) % E
    return np.where(group.coprime, phase, -1)


def _conductor_from_phases(q: int, phases: np.ndarray) -> int:
    for d in divisors(q):
        classes = np.arange(1, q + 1, d) % q
        classes = classes[phases[classes] >= 0]
        if np.all(phases[classes] == 0):
            return d
    return q


def _build(group: CharacterGroup, index: int, exponents: tuple[int, ...]) -> DirichletCharacter:
    q = group.modulus
    E = group.exponent
    phases = _phases(group, exponents)
    roots = np.exp(2j * np.pi * np.arange(E) / E)
    # exact values at the real roots of unity
    roots[0] = 1.0
    if E % 2 == 0:
        roots[E // 2] = -1.0
    if E % 4 == 0:
        roots[E // 4] = 1j
        roots[3 * E // 4] = -1j
    values = np.where(phases >= 0, roots[np.maximum(phases, 0)], 0.0)
    values.setflags(write=False)
    phases.setflags(write=False)
    conductor = _conductor_from_phases(q, phases)
    return DirichletCharacter(
        modulus=q,
        index=index,
        exponents=exponents,
        phases=phases,
        order_exponent=E,
        values=values,
        conductor=conductor,
        is_primitive=conductor == q,
        is_principal=all(a == 0 for a in exponents),
    )


def iter_characters(q: int):
    """Characters mod q in canonical order: lexicographic exponent vectors."""
    group = character_group(q)
    for index, exponents in enumerate(product(*(range(order) for order in group.orders))):
        yield _build(group, index, tuple(exponents))


def enumerate_characters(q: int) -> list[DirichletCharacter]:
    characters = list(iter_characters(q))
    logger.debug(f"Enumerated {len(characters)} characters mod {q}")
    return characters


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [chi for chi in iter_characters(q) if chi.is_primitive]


def principal_character(q: int) -> DirichletCharacter:
    group = character_group(q)
    return _build(group, 0, tuple(0 for _ in group.orders))


def character_by_exponents(q: int, exponents: tuple[int, ...]) -> DirichletCharacter:
    group = character_group(q)
    index = 0
    for a, order in zip(exponents, group.orders):
        index = index * order + a % order
    return _build(group, index, tuple(a % order for a, order in zip(exponents, group.orders)))


def character_by_label(label: str) -> DirichletCharacter:
    try:
        q_text, index_text = label.split(":")
        q, index = int(q_text), int(index_text)
    except ValueError:
        raise CharacterLabelError(label, "expected the form 'q:index'")
    if q < 1:
        raise CharacterLabelError(label, "modulus must be positive")
    count = euler_phi(q)
    if not 0 <= index < count:
        raise CharacterLabelError(label, f"index must lie in [0, {count - 1}]")

    group = character_group(q)
    exponents = []
    remainder = index
    for order in reversed(group.orders):
        exponents.append(remainder % order)
        remainder //= order
    return _build(group, index, tuple(reversed(exponents)))


def conductor(chi: DirichletCharacter) -> int:
    return _conductor_from_phases(chi.modulus, chi.phases)


def conjugate(chi: DirichletCharacter) -> DirichletCharacter:
    return character_by_exponents(chi.modulus, tuple(-a for a in chi.exponents))


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.modulus
    n = np.arange(q)
    return complex(np.sum(chi.values * np.exp(2j * np.pi * n / q)))


def induced_character(chi: DirichletCharacter, q: int) -> DirichletCharacter:
    """The character mod q induced from chi (chi's modulus must divide q)."""
    if q % chi.modulus:
        raise CharacterLabelError(chi.label, f"modulus does not divide {q}")
    target = np.where(np.gcd(np.arange(q), q) == 1, chi.values[np.arange(q) % chi.modulus], 0.0)
    for candidate in iter_characters(q):
        if np.allclose(candidate.values, target, atol=1e-12):
            return candidate
    raise CharacterLabelError(chi.label, f"no induced character mod {q}")


def character_matrix(characters: list[DirichletCharacter], residues: np.ndarray) -> np.ndarray:
    """Values χ(d) for every character (rows) and residue (columns)."""
    if not characters:
        return np.zeros((0, residues.size), dtype=complex)
    return np.vstack([chi.values[residues] for chi in characters])


def coprime_to(q: int, n: int) -> bool:
    return gcd(q, n) == 1
