import pytest
from math import sqrt

import numpy as np

from src.arith.service import divisor_tau, ramanujan_sum
from src.characters.service import enumerate_characters, primitive_characters
from src.exceptions.expsums import KloostermanArgumentError, WeilBoundViolation
from src.expsums import service
from src.expsums.model import KloostermanQuery

# --- Tests for kloosterman ---


def test_kloosterman_is_real_without_twist():
    for m, n in [(1, 1), (2, 5), (3, 0), (7, 11)]:
        value = service.kloosterman(KloostermanQuery(m=m, n=n, q=13))
        assert value.imag == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("q", [1, 6, 10, 17, 36])
@pytest.mark.parametrize("h", [1, 4, 6, 12])
def test_kloosterman_with_zero_is_ramanujan_sum(q, h):
    value = service.kloosterman(KloostermanQuery(m=h, n=0, q=q))
    assert value == pytest.approx(ramanujan_sum(q, h), abs=1e-9)
    assert service.ramanujan_via_kloosterman(q, h) < 1e-9


def test_kloosterman_symmetry():
    first = service.kloosterman(KloostermanQuery(m=3, n=7, q=20))
    second = service.kloosterman(KloostermanQuery(m=7, n=3, q=20))
    assert first == pytest.approx(second, abs=1e-9)


def test_kloosterman_prime_weil_bound():
    q = 101
    for m in range(1, 8):
        value = service.kloosterman(KloostermanQuery(m=m, n=1, q=q))
        assert abs(value) <= 2 * sqrt(q) + 1e-9


def test_twisted_query_checks_modulus():
    chi = primitive_characters(5)[0]
    with pytest.raises(ValueError):
        KloostermanQuery(m=1, n=1, q=7, twist=chi)


def test_weil_estermann_bound():
    query = KloostermanQuery(m=6, n=4, q=12)
    assert service.weil_estermann_bound(query) == pytest.approx(sqrt(2) * sqrt(12) * divisor_tau(12))


# --- Tests for twisted_kloosterman_row ---


def test_twisted_row_matches_single_sums():
    q = 9
    for chi in enumerate_characters(q):
        row = service.twisted_kloosterman_row(chi.values, 2, q)
        for t in range(q):
            single = service.kloosterman(KloostermanQuery(m=2, n=t, q=q, twist=chi))
            assert row[t] == pytest.approx(single, abs=1e-9)


# --- Tests for scan_weil ---


def test_scan_weil_small_range():
    result = service.scan_weil(40)
    assert result.q_max == 40
    assert result.sample_size == 400
    assert len(result.rows) == 40
    assert 0 < result.max_ratio <= 1 + service.WEIL_SLACK
    assert result.witness is not None


def test_scan_weil_per_character_rows():
    result = service.scan_weil(12, per_character_rows=True)
    assert len(result.rows) == sum(len(enumerate_characters(q)) for q in range(1, 13))


def test_scan_weil_is_thread_independent():
    single = service.scan_weil(30, threads=1)
    pooled = service.scan_weil(30, threads=4)
    assert [row.ratio for row in single.rows] == [row.ratio for row in pooled.rows]


@pytest.mark.slow
def test_scan_weil_single_pair_up_to_50():
    result = service.scan_weil(50, sample=[(1, 1)])
    assert result.sample_size == 1
    assert len(result.rows) == 50
    assert result.max_ratio <= 1 + service.WEIL_SLACK


@pytest.mark.slow
def test_scan_weil_full_grid_up_to_300():
    result = service.scan_weil(300)
    assert len(result.rows) == 300
    assert result.max_ratio <= 1 + service.WEIL_SLACK


def test_scan_weil_raises_on_violation(monkeypatch):
    # a bound shrunk by 1000 is certainly violated
    original = service.divisor_tau
    monkeypatch.setattr(service, "divisor_tau", lambda q: original(q) / 1000)
    with pytest.raises(WeilBoundViolation) as exc:
        service.scan_weil(10)
    assert exc.value.exit_code == 3
    assert exc.value.context["ratio"] > 1


# --- Tests for kloosterman_gcd_divides ---


def test_kloosterman_gcd_divides_on_admissible_moduli():
    N, a, b, h = 1, 2, 3, 6
    for q in range(6, 200, 6):
        if np.gcd(h, q) != np.gcd(h, N * a * b):
            continue
        for m in range(1, 15):
            for n in range(1, 15):
                assert service.kloosterman_gcd_divides(h, m, n, a, b, q, N)
                assert service.kloosterman_gcd_divides(h, m, n, a, b, q, N, sign=-1)


# --- Tests for selberg_identity_check ---


def test_twisted_multiplicativity_up_to_50():
    assert service.selberg_identity_check(50) <= 1e-9


def test_twisted_multiplicativity_single_pair():
    assert service.selberg_identity_defect(7, 9) == pytest.approx(0.0, abs=1e-9)
    assert service.selberg_identity_defect(1, 13) == pytest.approx(0.0, abs=1e-9)


def test_twisted_multiplicativity_needs_coprime_moduli():
    with pytest.raises(KloostermanArgumentError) as exc:
        service.selberg_identity_defect(6, 9)
    assert exc.value.exit_code == 1
    assert exc.value.context == {"q1": 6, "q2": 9}
