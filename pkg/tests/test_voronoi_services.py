import pytest

import numpy as np
from scipy import integrate, special

from src.arith.service import euler_gamma, reduced_residues
from src.exceptions.voronoi import TruncationBudgetError, VoronoiArgumentError, VoronoiResidualError
from src.voronoi import service
from src.voronoi.model import VoronoiInstance, VoronoiRow
from src.weights.service import make_interval_bump

# --- Tests for voronoi_residual ---


@pytest.mark.parametrize("q, d", [(1, 0), (5, 2), (7, 3)])
def test_voronoi_identity_for_delta(delta_source, small_bump, q, d):
    instance = VoronoiInstance(source=delta_source, d=d, q=q, g=small_bump)
    result = service.voronoi_residual(instance, target=1e-6)
    assert result.residual < 1e-6
    assert result.main_term is None
    assert result.m_cut <= delta_source.m_max
    assert abs(result.lhs) > 0


REDUCED_PAIRS = [(q, int(d)) for q in (1, 2, 3, 5, 7) for d in reduced_residues(q)]
BUMP_SUPPORTS = [
    (100.0, 200.0),
    (1000.0, 2000.0),
    pytest.param((10000.0, 20000.0), marks=pytest.mark.slow),
]


@pytest.fixture(scope="module")
def bump_on():
    made = {}

    def _bump(support):
        if support not in made:
            made[support] = make_interval_bump(*support)
        return made[support]

    return _bump


@pytest.mark.parametrize("support", BUMP_SUPPORTS)
@pytest.mark.parametrize("q, d", REDUCED_PAIRS)
def test_voronoi_identity_over_moduli_and_supports(delta_source, bump_on, q, d, support):
    instance = VoronoiInstance(source=delta_source, d=d, q=q, g=bump_on(support))
    result = service.voronoi_residual(instance, target=1e-6)
    assert result.residual < 1e-6


def test_voronoi_conjugation_symmetry(delta_source, small_bump):
    q = 7
    first = service.voronoi_residual(VoronoiInstance(source=delta_source, d=2, q=q, g=small_bump))
    mirrored = service.voronoi_residual(
        VoronoiInstance(source=delta_source, d=q - 2, q=q, g=small_bump, m_cut=first.m_cut)
    )
    scale = 1e-9 * max(1.0, abs(first.lhs))
    assert abs(mirrored.lhs - first.lhs.conjugate()) <= scale
    assert abs(mirrored.rhs - first.rhs.conjugate()) <= scale


def test_voronoi_residual_settles_past_the_cut(delta_source, small_bump):
    instance = VoronoiInstance(source=delta_source, d=2, q=5, g=small_bump)
    measured = service.voronoi_residual(instance)
    residuals = [measured.residual]
    m_cut = 2 * measured.m_cut
    while m_cut <= delta_source.m_max and len(residuals) < 4:
        doubled = instance.model_copy(update={"m_cut": m_cut})
        residuals.append(service.voronoi_residual(doubled).residual)
        m_cut *= 2
    assert len(residuals) >= 2
    # up to rounding in the added terms
    for previous, current in zip(residuals, residuals[1:]):
        assert current <= previous + 1e-10


@pytest.mark.parametrize("q, d", [(1, 0), (3, 1), (4, 3)])
def test_voronoi_identity_for_divisor(divisor_source, small_bump, q, d):
    instance = VoronoiInstance(source=divisor_source, d=d, q=q, g=small_bump)
    result = service.voronoi_residual(instance, target=1e-6)
    assert result.residual < 1e-6
    assert result.main_term is not None


def test_voronoi_residual_raises_when_cut_short(delta_source, small_bump):
    instance = VoronoiInstance(source=delta_source, d=2, q=5, g=small_bump, m_cut=3)
    with pytest.raises(VoronoiResidualError) as exc:
        service.voronoi_residual(instance, target=1e-6)
    assert exc.value.exit_code == 3
    assert exc.value.context["q"] == 5


def test_voronoi_row_flattens_result(delta_source, small_bump):
    instance = VoronoiInstance(source=delta_source, d=1, q=5, g=small_bump)
    result = service.voronoi_residual(instance)
    row = VoronoiRow.from_result(result)
    assert row.lhs_re == result.lhs.real
    assert row.rhs_im == result.rhs.imag
    assert np.isnan(row.tail_estimate) or row.tail_estimate >= 0


@pytest.mark.parametrize("d, q", [(2, 4), (0, 5), (3, 0)])
def test_voronoi_instance_validation(delta_source, small_bump, d, q):
    with pytest.raises(ValueError):
        VoronoiInstance(source=delta_source, d=d, q=q, g=small_bump)


# --- Tests for the transforms ---


def test_g_hat_is_real_for_even_weight(small_bump):
    transform = service.transform_g_hat(small_bump, 5, 12)
    values = transform([1.0, 10.0, 100.0])
    assert values.dtype == np.float64
    assert values.shape == (3,)


def test_g_hat_matches_direct_quadrature(small_bump):
    transform = service.transform_g_hat(small_bump, 3, 12)
    y = 40.0
    direct, _ = integrate.quad(
        lambda x: float(small_bump(x)) * special.jv(11, 4 * np.pi * np.sqrt(x * y) / 3), 10, 60, limit=400
    )
    assert transform(y)[0] == pytest.approx(2 * np.pi / 3 * direct, abs=1e-9)


def test_transform_arguments():
    g = make_interval_bump(10.0, 60.0, certify_now=False)
    with pytest.raises(VoronoiArgumentError):
        service.transform_g_hat(g, 5, 0)
    with pytest.raises(VoronoiArgumentError):
        service.transform_g_pm(g, 5, -1.0, 1)
    with pytest.raises(VoronoiArgumentError):
        service.transform_g_pm(g, 5, 1.0, 0)
    with pytest.raises(VoronoiArgumentError):
        service.transform_g_hat(g, 5, 12)([0.0])


def test_transforms_decay(small_bump):
    transform = service.transform_g_hat(small_bump, 5, 12)
    assert service.decay_exponent(transform, 200.0) > 2


def test_divisor_main_term(small_bump):
    q = 3
    direct, _ = integrate.quad(
        lambda x: (np.log(x / q**2) + 2 * euler_gamma()) * float(small_bump(x)), 10, 60, limit=200
    )
    assert service.divisor_main_term(small_bump, q) == pytest.approx(direct / q, rel=1e-9)


# --- Tests for choose_m_cut ---


def test_choose_m_cut_needs_enough_coefficients(delta_source, small_bump):
    transforms = [service.transform_g_hat(small_bump, 5, 12)]
    with pytest.raises(TruncationBudgetError) as exc:
        service.choose_m_cut(delta_source, transforms, scale=1.0, m_limit=20)
    assert exc.value.context["m_limit"] == 20


def test_choose_m_cut_within_budget(delta_source, small_bump):
    transforms = [service.transform_g_hat(small_bump, 5, 12)]
    choice = service.choose_m_cut(delta_source, transforms, scale=1.0, tolerance=1e-8)
    assert 2 <= choice.m_cut <= delta_source.m_max
    assert choice.tail_estimate < choice.target
