import pytest
from math import pi

import mpmath

from src.coeffs.service import divisor_analog
from src.exceptions.shifted import MainTermSourceError, ScaleRatioError
from src.shifted import service
from src.shifted.model import MainTermSpec, ShiftedSumSpec
from src.weights.service import make_box_weight


def _spec(source, A, B, a=1, b=1, h=1, sign=-1, P=1.0):
    return ShiftedSumSpec(
        a=a, b=b, h=h, sign=sign, phi=source, psi=source, weight=make_box_weight(A, B, P, certify_now=False)
    )


def _brute_force(spec):
    total = 0.0
    m_lo, m_hi = spec.m_range
    n_lo, n_hi = spec.n_range
    for m in range(m_lo, m_hi + 1):
        for n in range(n_lo, n_hi + 1):
            if spec.a * m + spec.sign * spec.b * n == spec.h:
                weight = float(spec.weight(spec.a * m, spec.b * n))
                total += spec.phi.coeffs[m] * spec.psi.coeffs[n] * weight
    return total


# --- Tests for ShiftedSumSpec ---


def test_spec_ranges(divisor_source):
    spec = _spec(divisor_source, 100.0, 90.0, a=2, b=3)
    assert spec.m_range == (51, 99)
    assert spec.n_range == (31, 59)
    assert spec.X == 100.0
    assert spec.Y == 90.0


@pytest.mark.parametrize("a, b, h", [(2, 4, 1), (0, 1, 1), (1, 1, 0)])
def test_spec_validation(divisor_source, a, b, h):
    with pytest.raises(ValueError):
        _spec(divisor_source, 10.0, 10.0, a=a, b=b, h=h)


# --- Tests for shifted_sum_direct ---


@pytest.mark.parametrize(
    "a, b, h, sign, A, B",
    [
        (1, 1, 1, -1, 30.0, 30.0),
        (2, 3, 1, -1, 40.0, 50.0),
        (3, 2, 5, -1, 60.0, 45.0),
        (1, 1, 100, 1, 30.0, 30.0),
        (2, 1, 120, 1, 40.0, 35.0),
    ],
)
def test_direct_sum_matches_brute_force(delta_source, a, b, h, sign, A, B):
    spec = _spec(delta_source, A, B, a=a, b=b, h=h, sign=sign)
    assert service.shifted_sum_direct(spec).real == pytest.approx(_brute_force(spec), rel=1e-12, abs=1e-12)


def test_direct_sum_of_empty_box(divisor_source):
    # am − bn = h has no solution with x ∈ [10, 20] and y ∈ [100, 200]
    spec = _spec(divisor_source, 10.0, 100.0)
    assert service.shifted_sum_direct(spec) == 0j


# --- Tests for the scales ---


def test_trivial_bound(divisor_source):
    spec = _spec(divisor_source, 100.0, 400.0, a=2, b=3)
    assert service.trivial_bound(spec) == pytest.approx((100 * 400 / 6) ** 0.5)


def test_theorem1_scale_at_unit_parameters(divisor_source):
    spec = _spec(divisor_source, 1.0, 1.0)
    assert service.theorem1_scale(spec) == pytest.approx(2**0.1)


def test_theorem1_scale_grows_with_P(divisor_source):
    slow = _spec(divisor_source, 100.0, 100.0)
    fast = _spec(divisor_source, 100.0, 100.0, P=4.0)
    assert service.theorem1_scale(fast) == pytest.approx(4**1.1 * service.theorem1_scale(slow))


def test_supersedes_trivial(divisor_source):
    assert not service.supersedes_trivial(_spec(divisor_source, 1.0, 1.0))
    assert service.supersedes_trivial(_spec(divisor_source, 100.0, 100.0))
    assert not service.supersedes_trivial(_spec(divisor_source, 100.0, 100.0, a=2, b=3))


# --- Tests for the divisor main term ---


def test_main_term_moments_at_unit_parameters():
    moments = service.main_term_moments(1, 1, 1)
    assert moments.m0 == pytest.approx(6 / pi**2, rel=1e-12)
    zeta = mpmath.zeta(2)
    assert moments.m_u == pytest.approx(float(-2 * mpmath.zeta(2, derivative=1) / zeta**2), rel=1e-10)
    assert moments.m_u == pytest.approx(moments.m_v, rel=1e-12)


def test_main_term_series_converges_to_closed_form():
    exact = service.main_term_moments(1, 1, 1)
    series, tail = service.main_term_moments_series(1, 1, 1, 4000)
    assert series.m0 == pytest.approx(exact.m0, abs=1e-3)
    assert series.m_u == pytest.approx(exact.m_u, abs=5e-3)
    assert tail > 0


def test_main_term_series_with_coefficients():
    exact = service.main_term_moments(6, 2, 3)
    series, _ = service.main_term_moments_series(6, 2, 3, 4000)
    assert series.m0 == pytest.approx(exact.m0, abs=0.02)


def test_divisor_main_term_approximates_sum(divisor_source):
    spec = _spec(divisor_source, 4000.0, 4000.0)
    result = service.divisor_main_term(spec)
    D = service.shifted_sum_direct(spec).real
    assert abs(D - result.value) / D < 0.05
    assert result.q_max == 64


def test_main_term_value_does_not_depend_on_q_max(divisor_source):
    spec = _spec(divisor_source, 500.0, 500.0)
    coarse = service.divisor_main_term(spec)
    fine = service.divisor_main_term(spec, MainTermSpec(q_max=4096))
    assert fine.value == pytest.approx(coarse.value, rel=1e-14)
    assert fine.tail_bound < coarse.tail_bound


def test_divisor_main_term_series_route(divisor_source):
    spec = _spec(divisor_source, 500.0, 500.0)
    result = service.divisor_main_term(spec, MainTermSpec(q_max=2000))
    assert result.series_value == pytest.approx(result.value, rel=0.01)


def test_main_term_needs_divisor_sources(delta_source):
    with pytest.raises(MainTermSourceError) as exc:
        service.divisor_main_term(_spec(delta_source, 100.0, 100.0))
    assert exc.value.context["kind"] == "holomorphic"


def test_main_term_spec_validation():
    with pytest.raises(ValueError):
        MainTermSpec(q_max=0)


# --- Tests for rows and sweeps ---


def test_shifted_row(divisor_source):
    spec = _spec(divisor_source, 200.0, 200.0)
    row = service.shifted_row(spec, with_main_term=True)
    assert row.D == pytest.approx(service.shifted_sum_direct(spec).real)
    assert row.ratio_trivial == pytest.approx(abs(row.D) / row.trivial_bound)
    assert row.ratio_th1 == pytest.approx(abs(row.D) / row.th1_scale)
    assert row.main_term_gap == pytest.approx(abs(row.D - row.main_term))


def test_shifted_sweep_keeps_order(delta_source):
    specs = [_spec(delta_source, A, A) for A in (20.0, 40.0, 80.0, 160.0)]
    sweep = service.shifted_sweep(specs, threads=3)
    assert [row.X for row in sweep.rows] == [20.0, 40.0, 80.0, 160.0]
    assert all(row.main_term is None for row in sweep.rows)


def test_direct_sum_with_small_table():
    spec = _spec(divisor_analog(300), 100.0, 100.0, a=3, b=5, h=7)
    assert service.shifted_sum_direct(spec).real == pytest.approx(_brute_force(spec), rel=1e-12)


def test_direct_sum_is_linear_in_psi(delta_source):
    doubled = delta_source.model_copy(update={"coeffs": 2.0 * delta_source.coeffs})
    spec = _spec(delta_source, 300.0, 250.0, a=2, b=3, h=7)
    scaled = spec.model_copy(update={"psi": doubled})
    single = service.shifted_sum_direct(spec).real
    assert service.shifted_sum_direct(scaled).real == pytest.approx(2 * single, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("a, b, h, A, B", [(2, 3, 271, 100.0, 80.0), (1, 4, 233, 90.0, 60.0)])
def test_additive_sum_is_symmetric_in_the_slots(delta_source, divisor_source, a, b, h, A, B):
    forward = ShiftedSumSpec(
        a=a, b=b, h=h, sign=1, phi=delta_source, psi=divisor_source, weight=make_box_weight(A, B, 2.0, certify_now=False)
    )
    swapped = ShiftedSumSpec(
        a=b, b=a, h=h, sign=1, phi=divisor_source, psi=delta_source, weight=make_box_weight(B, A, 2.0, certify_now=False)
    )
    expected = _brute_force(forward)
    assert service.shifted_sum_direct(forward).real == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert service.shifted_sum_direct(swapped).real == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_difference_sum_matches_mirrored_enumeration(delta_source, divisor_source):
    # bn − am = −h, walking n first with the transposed weight
    spec = ShiftedSumSpec(
        a=3, b=2, h=5, sign=-1, phi=delta_source, psi=divisor_source, weight=make_box_weight(60.0, 45.0, certify_now=False)
    )
    mirrored = make_box_weight(45.0, 60.0, certify_now=False)
    total = 0.0
    for n in range(spec.n_range[0], spec.n_range[1] + 1):
        for m in range(spec.m_range[0], spec.m_range[1] + 1):
            if spec.b * n - spec.a * m == -spec.h:
                total += divisor_source.coeffs[n] * delta_source.coeffs[m] * float(mirrored(spec.b * n, spec.a * m))
    assert service.shifted_sum_direct(spec).real == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_sweep_stays_near_the_power_saving_scale(delta_source):
    specs = [_spec(delta_source, A, A) for A in (100.0, 400.0, 1600.0, 6400.0)]
    sweep = service.shifted_sweep(specs, threads=2)
    assert max(row.ratio_th1 for row in sweep.rows) < service.TH1_RATIO_LIMIT


def test_sweep_raises_past_the_ratio_limit(monkeypatch, delta_source, divisor_source):
    monkeypatch.setattr(service, "TH1_RATIO_LIMIT", 1e-9)
    with pytest.raises(ScaleRatioError) as exc:
        service.shifted_sweep([_spec(delta_source, 200.0, 200.0)])
    assert exc.value.exit_code == 3
    assert exc.value.context["limit"] == 1e-9
    # the divisor analog carries a main term and is not held to the limit
    assert len(service.shifted_sweep([_spec(divisor_source, 200.0, 200.0)]).rows) == 1
