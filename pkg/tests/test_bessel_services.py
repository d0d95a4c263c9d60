import pytest
from math import cosh, pi

import mpmath
import numpy as np
from scipy import special

from src.bessel import service
from src.bessel.model import KernelFamily, KernelSpec, Representation
from src.exceptions.bessel import KernelArgumentError, KernelDecayError
from src.utils.quadrature import derivative_1d

# --- Tests for the integral representations ---


@pytest.mark.parametrize("n", [0, 1, 11, 23])
@pytest.mark.parametrize("x", [0.3, 5.0, 47.5, 400.0])
def test_bessel_j_trapezoid(n, x):
    assert service.bessel_j(n, x) == pytest.approx(float(special.jv(n, x)), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 12])
def test_bessel_j_derivative_relation(n):
    # d/dx [xⁿJₙ(x)] = xⁿJₙ₋₁(x), errors measured against xⁿ
    x = np.linspace(0.5, 50.0, 34)
    scaled = np.vectorize(lambda t: t**n * service.bessel_j(n, t), otypes=[float])
    derivative = derivative_1d(scaled, x, 1, 1e-5)
    expected = np.array([t**n * service.bessel_j(n - 1, t) for t in x])
    assert np.all(np.abs(derivative - expected) <= 1e-6 * x**n)


@pytest.mark.parametrize("x", [0.05, 1.0, 10.0, 60.0])
def test_bessel_k_real_order_zero(x):
    assert service.bessel_k_imaginary(0.0, x) == pytest.approx(float(special.k0(x)), rel=1e-10)


@pytest.mark.parametrize("mu", [0.5, 2.0, 6.5])
@pytest.mark.parametrize("x", [0.5, 4.0, 30.0])
def test_bessel_k_imaginary_order(mu, x):
    expected = float(mpmath.re(mpmath.besselk(2j * mu, x)))
    scale = max(abs(expected), float(special.k0(x)) * np.exp(-pi * mu))
    assert service.bessel_k_imaginary(mu, x) == pytest.approx(expected, abs=1e-9 * scale)


def test_bessel_k_is_even_in_mu():
    assert service.bessel_k_imaginary(-1.5, 3.0) == service.bessel_k_imaginary(1.5, 3.0)


@pytest.mark.parametrize("x", [0.2, 1.0, 7.5, 80.0])
def test_mminus_at_zero_is_y0(x):
    spec = KernelSpec(family=KernelFamily.Mminus, order=0.0)
    assert service.eval_kernel(spec, x) == pytest.approx(-2 * pi * float(special.y0(x)), abs=1e-9)


@pytest.mark.parametrize("mu", [0.75, 3.0])
@pytest.mark.parametrize("x", [1.0, 12.0])
def test_mminus_matches_anchor(mu, x):
    spec = KernelSpec(family=KernelFamily.Mminus, order=mu)
    anchor = service.kernel_array(spec, [x], Representation.anchor)[0]
    assert service.eval_kernel(spec, x) == pytest.approx(anchor, abs=1e-8 * max(1.0, abs(anchor)))


def test_mplus_carries_cosh_factor():
    spec = KernelSpec(family=KernelFamily.Mplus, order=1.0)
    assert service.eval_kernel(spec, 2.0) == pytest.approx(
        4 * cosh(pi) * service.bessel_k_imaginary(1.0, 2.0), rel=1e-14
    )


# --- Tests for kernel_array ---


@pytest.mark.parametrize(
    "spec",
    [
        KernelSpec(family=KernelFamily.J, order=11),
        KernelSpec(family=KernelFamily.Mplus, order=0.0),
        KernelSpec(family=KernelFamily.Mminus, order=0.0),
    ],
)
def test_representations_agree(spec):
    x = np.array([0.5, 2.0, 9.0, 33.0, 120.0])
    anchor = service.kernel_array(spec, x, Representation.anchor)
    integral = service.kernel_array(spec, x, Representation.integral)
    assert np.allclose(integral, anchor, atol=1e-9)


def test_kernel_array_keeps_shape_and_duplicates():
    spec = KernelSpec(family=KernelFamily.J, order=3)
    x = np.array([[1.0, 2.0], [2.0, 1.0]])
    values = service.kernel_array(spec, x)
    assert values.shape == (2, 2)
    assert values[0, 0] == values[1, 1]


def test_kernel_arguments_must_be_positive():
    spec = KernelSpec(family=KernelFamily.Mplus, order=0.0)
    with pytest.raises(KernelArgumentError):
        service.kernel_array(spec, [1.0, 0.0])
    with pytest.raises(KernelArgumentError):
        service.eval_kernel(spec, -1.0)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(family=KernelFamily.J, order=1.5)
    with pytest.raises(ValueError):
        KernelSpec(family=KernelFamily.Mplus, order=-1.0)


# --- Tests for kernel_decay_check ---


def test_decay_of_j_kernel():
    spec = KernelSpec(family=KernelFamily.J, order=11)
    report = service.kernel_decay_check(spec, np.geomspace(1, 2000, 200))
    # the peak sits just past the turning point x ≈ ν
    assert 0.8 < report.sup_scaled < 1.5
    assert report.argmax > 10


def test_decay_of_mplus_is_monotone():
    spec = KernelSpec(family=KernelFamily.Mplus, order=0.0)
    report = service.kernel_decay_check(spec, np.linspace(1, 50, 100))
    assert report.decreasing


def test_decay_check_raises_above_constant():
    spec = KernelSpec(family=KernelFamily.Mminus, order=0.0)
    with pytest.raises(KernelDecayError) as exc:
        service.kernel_decay_check(spec, np.linspace(1, 30, 60), constant=0.1)
    assert exc.value.exit_code == 3


def test_decay_grid_must_increase():
    spec = KernelSpec(family=KernelFamily.J, order=0)
    with pytest.raises(KernelArgumentError):
        service.kernel_decay_check(spec, [3.0, 2.0])
