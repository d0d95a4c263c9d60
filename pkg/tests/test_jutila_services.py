import pytest
from fractions import Fraction

import numpy as np

from src.exceptions.jutila import (
    ArcMismatchError,
    EmptyDenominatorSetError,
    L2BoundViolation,
    NyquistError,
    SchemeArgumentError,
)
from src.jutila import service
from src.shifted.model import ShiftedSumSpec
from src.shifted.service import shifted_sum_direct
from src.weights.service import attach_redundant_factor, make_box_weight


@pytest.fixture(scope="module")
def divisor_spec(divisor_source):
    return ShiftedSumSpec(
        a=1, b=1, h=1, phi=divisor_source, psi=divisor_source, weight=make_box_weight(60.0, 60.0, certify_now=False)
    )


@pytest.fixture(scope="module")
def delta_spec(delta_source):
    return ShiftedSumSpec(
        a=1, b=1, h=1, phi=delta_source, psi=delta_source, weight=make_box_weight(50.0, 50.0, certify_now=False)
    )


def _l2_by_steps(scheme):
    """∫(I − Ĩ)² by evaluating both step functions between consecutive breakpoints."""
    tilde = service.tilde_step(scheme)
    indicator = service.indicator_step()
    points = np.unique(np.concatenate([tilde.breakpoints, [0.0, 1.0]]))
    middle = 0.5 * (points[1:] + points[:-1])
    gap = indicator(middle) - tilde(middle)
    return float(np.sum(gap**2 * np.diff(points)))


# --- Tests for the denominator set ---


def test_denominators_unfiltered():
    scheme = service.build_scheme(3, 0.2)
    assert scheme.moduli == [3, 4, 5, 6]
    assert scheme.L == 10


def test_denominators_filtered_by_ab():
    scheme = service.build_scheme(6, 0.05, a=2, b=3)
    assert scheme.moduli == [6, 12]
    assert scheme.L == 6


def test_denominators_filtered_by_shift():
    scheme = service.build_scheme(2, 0.3, N=2, h=2)
    assert scheme.moduli == [2, 4]
    assert scheme.L == 3


@pytest.mark.parametrize(
    "Q, delta, kwargs",
    [
        (3, 0.5, {}),
        (3, 0.01, {}),
        (3, 0.2, {"a": 2, "b": 4}),
        (0.5, 1.0, {}),
    ],
)
def test_build_scheme_rejects_arguments(Q, delta, kwargs):
    with pytest.raises(SchemeArgumentError):
        service.build_scheme(Q, delta, **kwargs)


def test_build_scheme_empty_set():
    with pytest.raises(EmptyDenominatorSetError):
        service.build_scheme(1, 1.0, a=2, b=3)


def test_denominator_density():
    report = service.denominator_density(100, a=2, b=3)
    assert report.count == 17
    assert report.constant == pytest.approx(1.02)


def test_balanced_parameters():
    balanced = service.balanced_parameters(1000.0, 1000.0, 1.0)
    assert balanced.delta == pytest.approx(0.002)
    assert balanced.Q == pytest.approx(500**0.6)
    assert balanced.delta_in_range


# --- Tests for the L² error ---


def test_tilde_integral_is_one():
    for Q, delta in [(3, 0.2), (10, 0.01), (17, 17**-1.5)]:
        assert service.tilde_integral(service.build_scheme(Q, delta)) == 1


def test_l2_error_is_exact_and_order_free():
    scheme = service.build_scheme(30, 30**-1.5)
    value = service.l2_error_exact(scheme)
    assert isinstance(value, Fraction)
    assert value == service.l2_error_exact(scheme, shuffle_seed=7)
    assert value == service.l2_error_exact(scheme, shuffle_seed=11)


@pytest.mark.parametrize("Q, exponent", [(5, 1.0), (10, 1.5), (10, 2.0), (30, 1.0)])
def test_l2_error_matches_step_functions(Q, exponent):
    scheme = service.build_scheme(Q, Q**-exponent)
    assert service.l2_error(scheme) == pytest.approx(_l2_by_steps(scheme), rel=1e-8, abs=1e-12)


def test_l2_error_with_touching_arcs():
    # 1/3 + 1/6 = 1/2 is the left end of the arc at 2/3 with δ = 1/6
    scheme = service.build_scheme(3, 1 / 6)
    assert service.l2_error(scheme) == pytest.approx(_l2_by_steps(scheme), rel=1e-8)


@pytest.mark.parametrize("Q", [10, 30])
@pytest.mark.parametrize("exponent", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("a, b", [(1, 1), (2, 3)])
def test_l2_error_within_bound(Q, exponent, a, b):
    row = service.l2_row(service.build_scheme(Q, Q**-exponent, a=a, b=b), assert_bound=True)
    assert 0 <= row.l2_exact <= row.bound
    assert row.ratio == pytest.approx(row.l2_exact / row.bound)


def test_l2_bound_formula():
    scheme = service.build_scheme(10, 0.01)
    assert service.l2_bound(scheme) == pytest.approx(10 * 10**2.1 / (0.01 * scheme.L**2))


def test_l2_row_raises_above_bound(monkeypatch):
    monkeypatch.setattr(service, "L2_BOUND_CONSTANT", 1e-9)
    with pytest.raises(L2BoundViolation) as exc:
        service.l2_row(service.build_scheme(10, 0.01), assert_bound=True)
    assert exc.value.exit_code == 3


# --- Tests for step functions ---


def test_indicator_step():
    indicator = service.indicator_step()
    assert list(indicator([-0.5, 0.0, 0.5, 1.0])) == [0.0, 1.0, 1.0, 0.0]


def test_tilde_step_integrates_to_one():
    scheme = service.build_scheme(10, 10**-1.5)
    tilde = service.tilde_step(scheme)
    lengths = np.diff(tilde.breakpoints)
    assert float(np.sum(tilde.values[1:-1] * lengths)) == pytest.approx(1.0, rel=1e-12)
    assert tilde.values[0] == 0.0
    assert tilde.values[-1] == 0.0


# --- Tests for the exponential sum G ---


def test_integral_of_G_is_the_shifted_sum(divisor_spec):
    F = divisor_spec.weight
    exact = service.d_exact_by_integral(divisor_spec, F, service.nyquist_points(divisor_spec, F))
    assert exact == pytest.approx(shifted_sum_direct(divisor_spec), rel=1e-10)


def test_d_exact_needs_enough_points(divisor_spec):
    F = divisor_spec.weight
    threshold = 2 * service.frequency_table(divisor_spec, F).max_abs_frequency
    with pytest.raises(NyquistError):
        service.d_exact_by_integral(divisor_spec, F, threshold)


def test_G_at_zero_is_total_mass(divisor_spec):
    table = service.frequency_table(divisor_spec, divisor_spec.weight)
    assert service.exp_sum_G(0.0, divisor_spec, divisor_spec.weight) == pytest.approx(
        complex(np.sum(table.coefficients)), rel=1e-12
    )


def test_frequency_table_range(divisor_spec):
    table = service.frequency_table(divisor_spec, divisor_spec.weight)
    # am − bn − h over m, n ∈ [61, 119]
    assert table.k_min == 61 - 119 - 1
    assert table.k_max == 119 - 61 - 1
    assert table.m_max == 119


def test_arc_integral_matches_closed_form(divisor_spec):
    table = service.frequency_table(divisor_spec, divisor_spec.weight)
    for d, q in [(1, 5), (3, 7), (1, 1)]:
        assert service.arc_integral(table, d, q, 0.02) == pytest.approx(
            service.arc_integral_closed(table, d, q, 0.02), rel=1e-9, abs=1e-9
        )


def test_d_tilde_is_the_arc_average(divisor_spec):
    scheme = service.build_scheme(4, 0.1)
    table = service.frequency_table(divisor_spec, divisor_spec.weight)
    arcs = sum(
        service.arc_integral_closed(table, int(d), int(q), scheme.delta) for d, q in zip(*scheme.arcs())
    )
    expected = arcs / (2 * scheme.delta * scheme.L)
    assert service.d_tilde(divisor_spec, divisor_spec.weight, scheme) == pytest.approx(expected, rel=1e-9)
    assert service.d_tilde(divisor_spec, divisor_spec.weight, scheme, threads=3) == pytest.approx(
        expected, rel=1e-9
    )


def test_comparison_row(divisor_spec):
    row = service.comparison_row(divisor_spec, service.build_scheme(4, 0.1), with_main_term=True)
    assert row.D_exact_integral == pytest.approx(row.D_direct, rel=1e-10)
    assert row.diff >= 0
    assert row.main_term is not None
    assert row.eq15_scale > 0


# --- Tests for the inner weight ---


def test_inner_weight_values(divisor_spec):
    F = divisor_spec.weight
    E = service.inner_weight(divisor_spec, F, 0.05)
    assert E(90.0, 80.0) == pytest.approx(F(90.0, 80.0) * 0.1 * np.sinc(0.1 * 9))


@pytest.mark.parametrize("i, j", [(0, 0), (1, 0), (0, 1), (1, 1)])
def test_inner_weight_norm_scale(divisor_spec, i, j):
    F = attach_redundant_factor(divisor_spec.weight, 1, 0.05, certify_now=False)
    norm = service.inner_weight_norm(divisor_spec, F, 0.05, i, j)
    assert 1e-3 < norm.ratio < 1e3


# --- Tests for the transformed arcs ---


def test_transformed_arc_for_delta(delta_spec):
    scheme = service.build_scheme(2, 0.25)
    arc = service.transformed_arc_sum(1, 1, delta_spec, delta_spec.weight, scheme)
    assert arc.difference <= 1e-5 * max(1.0, abs(arc.direct))
    assert arc.m_cut >= service.START_CUT


def test_transformed_arc_total_for_delta(delta_spec):
    scheme = service.build_scheme(2, 0.25)
    total = service.transformed_arc_total(3, delta_spec, delta_spec.weight, scheme)
    singles = [service.transformed_arc_sum(d, 3, delta_spec, delta_spec.weight, scheme) for d in (1, 2)]
    assert total.direct == pytest.approx(sum(arc.direct for arc in singles), rel=1e-12, abs=1e-12)
    assert total.difference <= 1e-5 * max(1.0, abs(total.direct))


def test_transformed_arc_for_divisor(divisor_source):
    spec = ShiftedSumSpec(
        a=1, b=1, h=1, phi=divisor_source, psi=divisor_source, weight=make_box_weight(400.0, 400.0, certify_now=False)
    )
    scheme = service.build_scheme(5, 0.05)
    arc = service.transformed_arc_sum(5, 6, spec, spec.weight, scheme)
    assert arc.difference <= 1e-5 * max(1.0, abs(arc.direct))
    assert arc.truncation_scale == pytest.approx(0.0625 * 400)


def test_transformed_arc_mismatch_raises(delta_spec):
    scheme = service.build_scheme(2, 0.25)
    with pytest.raises(ArcMismatchError) as exc:
        service.transformed_arc_sum(1, 1, delta_spec, delta_spec.weight, scheme, tolerance=1e-300)
    assert exc.value.exit_code == 3


def test_transformed_arc_modulus_checks(delta_spec):
    scheme = service.build_scheme(2, 0.25)
    with pytest.raises(SchemeArgumentError):
        service.transformed_arc_sum(2, 4, delta_spec, delta_spec.weight, scheme)


# --- Tests for diagnostics ---


def test_balance_scales(divisor_spec):
    scheme = service.build_scheme(4, 0.1)
    scales = service.balance_scales(divisor_spec, scheme)
    shape = (60.0 * 60.0) ** 1.5 / 120.0
    assert scales.eq15 == pytest.approx(np.sqrt(0.1) / 4 * shape)
    assert scales.dual == pytest.approx(0.01 * 4**1.5 * shape)


def test_wilton_ratio(delta_source):
    result = service.wilton_ratio(delta_source, np.linspace(0.0, 1.0, 13), 5000)
    assert 0 < result.max_ratio < 10
    assert 1 <= result.x <= 5000
