from math import fsum, gcd, isqrt, log
from threading import RLock
import logging

import numpy as np
from cachetools import cached

from src.arith.model import Residue, UnitComplex
from src.exceptions.arith import ArithDomainError, NonCoprimeInverseError
from src.utils.cache import sieve_cache, sieve_lock

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * np.pi
_SIEVE_FLOOR = 1 << 12


# --- Primes and factorization ---


@cached(cache=sieve_cache, lock=sieve_lock)
def _primes_up_to(bound: int) -> tuple[int, ...]:
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(bound) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(flags))


def _small_primes(limit: int) -> tuple[int, ...]:
    bound = _SIEVE_FLOOR
    while bound < limit:
        bound *= 4
    return _primes_up_to(bound)


def prime_factorization(n: int) -> dict[int, int]:
    """Trial division over a cached sieve; n must be positive."""
    if n < 1:
        raise ArithDomainError("n", n)
    factors: dict[int, int] = {}
    remaining = n
    for p in _small_primes(isqrt(n) + 1):
        if p * p > remaining:
            break
        while remaining % p == 0:
            factors[p] = factors.get(p, 0) + 1
            remaining //= p
    if remaining > 1:
        factors[remaining] = factors.get(remaining, 0) + 1
    return factors


def divisors(n: int) -> list[int]:
    result = [1]
    for p, e in prime_factorization(n).items():
        result = [d * p**k for d in result for k in range(e + 1)]
    return sorted(result)


def euler_phi(q: int) -> int:
    result = q
    for p in prime_factorization(q):
        result -= result // p
    return result


def mobius(q: int) -> int:
    factors = prime_factorization(q)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def divisor_tau(n: int) -> int:
    result = 1
    for e in prime_factorization(n).values():
        result *= e + 1
    return result


def sigma(n: int, s: float = 1.0) -> float:
    return fsum(float(d) ** s for d in divisors(n))


def gcd3(m: int, n: int, q: int) -> int:
    """gcd of three integers with gcd(0, 0, q) = q."""
    return gcd(gcd(m, n), q)


def divisor_tau_table(m_max: int) -> np.ndarray:
    """τ(m) for 0 ≤ m ≤ m_max (index 0 unused) by a divisor sieve."""
    table = np.zeros(m_max + 1, dtype=np.int64)
    for d in range(1, m_max + 1):
        table[d::d] += 1
    return table


# --- Residues and additive characters ---


def mod_inverse(d: int, q: int) -> Residue:
    if q < 1:
        raise ArithDomainError("q", q)
    g = gcd(d, q)
    if g != 1:
        raise NonCoprimeInverseError(d, q, g)
    if q == 1:
        return Residue(value=0, modulus=1)
    return Residue(value=pow(d % q, -1, q), modulus=q)


def e_q(x: int, q: int) -> UnitComplex:
    """exp(2πi x/q), reducing x mod q before any floating point step."""
    if q < 1:
        raise ArithDomainError("q", q)
    angle = _TWO_PI * (x % q) / q
    return UnitComplex(re=float(np.cos(angle)), im=float(np.sin(angle)))


def e_q_array(x, q: int) -> np.ndarray:
    """Vectorized e_q for integer arrays; reduction mod q is exact in int64."""
    reduced = np.mod(np.asarray(x, dtype=np.int64), q)
    return np.exp(1j * _TWO_PI * reduced / q)


def reduced_residues(q: int) -> np.ndarray:
    """Representatives 0 ≤ d < q coprime to q (the single class 0 when q = 1)."""
    if q == 1:
        return np.zeros(1, dtype=np.int64)
    d = np.arange(q, dtype=np.int64)
    return d[np.gcd(d, q) == 1]


def inverse_table(q: int) -> np.ndarray:
    """d̄ for each entry of `reduced_residues(q)`, in the same order."""
    return np.array([mod_inverse(int(d), q).value for d in reduced_residues(q)], dtype=np.int64)


def ramanujan_sum(q: int, h: int) -> int:
    """c_q(h) = Σ_{d | (q,h)} d·μ(q/d), exact."""
    if q < 1:
        raise ArithDomainError("q", q)
    g = gcd(q, h)
    return sum(d * mobius(q // d) for d in divisors(g))


def ramanujan_sum_direct(q: int, h: int) -> complex:
    return complex(np.sum(e_q_array(reduced_residues(q) * h, q)))


def reduced_residue_max_gap(q: int) -> int:
    if q < 2:
        raise ArithDomainError("q", q)
    residues = np.flatnonzero(np.gcd(np.arange(1, q + 1), q) == 1) + 1
    gaps = np.diff(residues)
    wrap = q + residues[0] - residues[-1]
    return int(max(wrap, gaps.max() if gaps.size else 0))


# --- Euler's constant ---

_gamma_lock = RLock()
_gamma_value: float | None = None


def euler_gamma() -> float:
    """
    γ = H_n − log n − 1/(2n) + 1/(12n²) − 1/(120n⁴) + 1/(252n⁶) − ...
    (Euler-Maclaurin on the harmonic numbers) at n = 10⁴; the first dropped
    term is 1/(240n⁸), far below 1e−14.
    """
    global _gamma_value
    with _gamma_lock:
        if _gamma_value is None:
            n = 10_000
            harmonic = fsum(1.0 / k for k in range(1, n + 1))
            _gamma_value = fsum(
                [harmonic, -log(n), -1.0 / (2 * n), 1.0 / (12 * n**2), -1.0 / (120 * n**4), 1.0 / (252 * n**6)]
            )
            logger.debug(f"Euler's constant computed: {_gamma_value!r}")
        return _gamma_value
