import cmath
import math

import numpy as np
import pytest

from striphyp.reps import Functional, cauchy_represent, delta, gauss_decay
from striphyp.spaces import gaussian, zero_function
from striphyp.transforms import (ExpSeries, LaplaceBoundSpec, TransformError, fourier_strip,
                                 gaussian_spectrum, inverse_fourier_functional,
                                 inverse_fourier_line, k1_norms, laplace_atoms,
                                 laplace_transform, paley_wiener_check, spectrum_of,
                                 zero_spectrum)
from striphyp.weights import linear, twosqrt

SQRT_PI = math.sqrt(math.pi)


def test_fourier_examples():
    assert abs(fourier_strip(gaussian(1.0), 0.5, 0.0) - SQRT_PI) < 1e-9
    assert abs(fourier_strip(gaussian(1.0), 0.5, 2.0) - SQRT_PI * math.exp(-1)) < 1e-9
    assert fourier_strip(zero_function(), 0.5, 1.0) == 0


@pytest.mark.parametrize("xi", [-7.0, -1.5, 0.0, 0.3, 4.0])
def test_fourier_shift_independence(xi):
    phi = gaussian(0.7, 0.4 + 0.1j)
    a = fourier_strip(phi, 0.3, xi)
    b = fourier_strip(phi, 1.1, xi)
    assert abs(a - b) < 1e-7


def test_fourier_matches_closed_form_with_shift():
    xs = np.linspace(-10, 10, 21)
    psi = gaussian_spectrum(2.0, -1.0)
    for xi in xs:
        assert abs(fourier_strip(gaussian(2.0, -1.0), 0.5, xi) - psi(xi)) < 1e-9


def test_fourier_rejects_wide_shift():
    from striphyp.spaces import make_test_function
    from striphyp.weights import power
    phi = make_test_function(power(0.5), 1.0)
    with pytest.raises(TransformError):
        fourier_strip(phi, 1.0, 0.0)


def test_inverse_examples():
    assert abs(inverse_fourier_line(gaussian_spectrum(), 0.0) - 1.0) < 1e-9
    assert inverse_fourier_line(zero_spectrum(), 3.0) == 0
    assert abs(inverse_fourier_line(gaussian_spectrum(1.0, 1.0), 1.0) - 1.0) < 1e-9


def test_round_trip_through_quadrature():
    phi = gaussian(1.0, 1.0)
    psi = spectrum_of(phi, 0.5)
    for x in (1.0, -0.5, 2.5):
        assert abs(inverse_fourier_line(psi, x) - phi(x)) < 1e-6


def test_k1_norm_examples():
    n = k1_norms(gaussian_spectrum(), linear(), 1.0)
    assert n.rho_h == pytest.approx(SQRT_PI * math.e, abs=1e-6)
    assert n.rho_omega == pytest.approx(math.exp(0.25), abs=1e-7)
    assert n.rho_combined == n.rho_h
    z = k1_norms(zero_spectrum(), linear(), 1.0)
    assert (z.rho_omega, z.rho_h, z.rho_combined) == (0.0, 0.0, 0.0)


def test_inverse_bound_on_substrips():
    # |phi(z)| <= rho^h(psi) / (pi (h - k)) for |Im z| <= k
    h = 1.0
    rho = k1_norms(gaussian_spectrum(), linear(), h).rho_h
    xs = np.linspace(-6, 6, 61)
    for k in (0.1, 0.5, 0.9):
        for y in np.linspace(-k, k, 7):
            assert np.all(np.abs(gaussian(1.0)(xs + 1j * y)) <= rho / (math.pi * (h - k)))


def test_laplace_examples():
    F0 = cauchy_represent(delta(0.0))
    for zeta in (0.0, 1.0, -2 + 0.5j, 3j):
        assert abs(laplace_transform(F0, zeta) - 1 / (2 * math.pi)) < 1e-9
    F1 = cauchy_represent(delta(1.0))
    assert abs(laplace_transform(F1, 1j) - math.exp(-1) / (2 * math.pi)) < 1e-9
    assert laplace_transform(cauchy_represent(Functional()), 1j) == 0


def test_laplace_contour_matches_closed_form(rng):
    f = delta(-1.0) + delta(0.5, 1, 2.0) + delta(2.0, 2, -0.5j)
    F = cauchy_represent(f)
    for zeta in rng.uniform(-3, 3, 10) + 1j * rng.uniform(-2, 2, 10):
        assert abs(laplace_transform(F, zeta) - laplace_atoms(f, zeta)) < 1e-8


def test_laplace_refuses_unbounded_support():
    F = cauchy_represent(delta(0.0) + Functional((), gauss_decay()))
    with pytest.raises(TransformError):
        laplace_transform(F, 1j)


@pytest.mark.parametrize("xi", [-2.0, 0.0, 1.3])
def test_laplace_boundary_value(xi):
    f = delta(0.5) + delta(2.0, 1, 3.0)
    F = cauchy_represent(f)
    target = inverse_fourier_functional(f, xi)
    gaps = [abs(laplace_transform(F, complex(xi, eta)) - target) for eta in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(laplace_transform(F, complex(xi, 1e-6)) - target) < 1e-5


def test_paley_wiener_examples():
    spec = LaplaceBoundSpec(a=0.0, region="upper")
    assert paley_wiener_check(ExpSeries(((1.0, 0, 1 / (2 * math.pi)),)), spec).status == "Holds"
    v = paley_wiener_check(ExpSeries(((-2.0, 0, 1 / (2 * math.pi)),)), spec)
    assert v.status == "Fails"
    assert paley_wiener_check(ExpSeries(()), spec).status == "Holds"


def test_paley_wiener_callable_is_graded_numerically():
    spec = LaplaceBoundSpec(a=0.0, region="upper")
    v = paley_wiener_check(lambda z: np.exp(1j * z) / (2 * math.pi), spec)
    assert v.status == "NumericallySupported"
    v = paley_wiener_check(lambda z: np.exp(-2j * z), spec)
    assert v.status == "Fails"


def test_delta_laplace_bound_is_sharp():
    for c in (-2.0, 0.0, 1.5):
        G = ExpSeries.from_functional(delta(c))
        spec = LaplaceBoundSpec(a=abs(c), region="entire")
        assert paley_wiener_check(G, spec).status == "Holds"
        if c:
            assert paley_wiener_check(G, LaplaceBoundSpec(a=abs(c) / 2, region="entire")).fails


def test_conjugate_term():
    spec = LaplaceBoundSpec(a=0.0, lam=1.0, w=twosqrt(), region="above", flavor="Beurling")
    v = paley_wiener_check(lambda z: np.exp(1j * z), spec, eta_max=50.0)
    assert v.positive


def test_spec_validation():
    with pytest.raises(TransformError):
        LaplaceBoundSpec(a=-1.0)
    with pytest.raises(TransformError):
        LaplaceBoundSpec(region="above")
    with pytest.raises(TransformError):
        LaplaceBoundSpec(lam=1.0, w=twosqrt(), region="upper", flavor="Beurling")
