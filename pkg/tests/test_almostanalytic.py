import math

import numpy as np
import pytest

from striphyp.almostanalytic import (ExtensionError, build_extension, check_extension_bounds,
                                     dbar_extension, dbar_fd, direct_pair, extension_norms,
                                     gaussian_source, stokes_boundary_pair)
from striphyp.spaces import gaussian, zero_function
from striphyp.transforms import gaussian_spectrum
from striphyp.weights import (conjugate_derivative, inverse_derivative, linear, power,
                              twosqrt, young_conjugate)

SQRT_PI = math.sqrt(math.pi)


@pytest.fixture(scope="module")
def ext():
    return build_extension(gaussian(1.0), twosqrt(), 0.5)


def test_real_axis_values(ext):
    assert abs(ext(0.0) - SQRT_PI) < 1e-6
    assert abs(ext(3.0) - SQRT_PI * math.exp(-9 / 4)) < 1e-6


def test_real_axis_agreement(ext):
    psi = gaussian_spectrum()
    xis = np.linspace(-20, 20, 81)
    assert max(abs(ext(x) - psi(x)) for x in xis) < 1e-6


def test_zero_source():
    E = build_extension(zero_function(), twosqrt(), 0.5)
    assert E(1 + 1j) == 0 and dbar_extension(E, 1 + 1j) == 0


def test_branches_agree_on_real_axis(ext):
    # xi <= 0 integrates along +ik, xi > 0 along -ik; on the real line both are the full transform
    assert abs(ext(-1e-12) - ext(1e-12)) < 1e-9


def test_branches_jump_off_axis(ext):
    # the truncated integrals do not close a contour once eta != 0; the Stokes pairing adds this jump
    left, right = ext(complex(-1e-12, 1.0)), ext(complex(1e-12, 1.0))
    assert abs(left - right) > 1e-3
    assert abs(left - right.conjugate()) < 1e-9


def test_dbar_vanishes_on_real_axis(ext):
    assert dbar_extension(ext, 2.5) == 0


def test_dbar_at_i(ext):
    nw, _ = extension_norms(ext)
    bound = nw * 2 * math.exp(-1)
    assert abs(dbar_extension(ext, 1j)) <= bound


def test_dbar_against_finite_differences(ext):
    for z in (0.3 + 0.7j, -1.2 + 0.4j, 2.0 + 1.5j):
        assert abs(dbar_extension(ext, z) - dbar_fd(ext, z)) < 1e-4


def test_dbar_continuity(ext):
    vals = [abs(dbar_extension(ext, complex(0.7, 2.0 ** -j))) for j in range(1, 9)]
    assert vals[-1] < 1e-6
    assert all(b <= a for a, b in zip(vals[3:], vals[4:]))


def test_inequalities_hold(ext):
    res = check_extension_bounds(ext)
    assert res.dbar.positive and res.size.positive
    assert res.dbar.witness["max_ratio"] <= 1 and res.size.witness["max_ratio"] <= 1


def test_inequalities_scale_invariant(ext):
    base = check_extension_bounds(ext, xis=np.linspace(-5, 5, 6), etas=[0.5, 2.0])
    E3 = build_extension(gaussian(1.0).scale(-3j), twosqrt(), 0.5)
    scaled = check_extension_bounds(E3, xis=np.linspace(-5, 5, 6), etas=[0.5, 2.0])
    assert scaled.verdict.status == base.verdict.status
    assert scaled.dbar.witness["max_ratio"] == pytest.approx(base.dbar.witness["max_ratio"], rel=1e-6)


def test_zero_source_bounds_trivial():
    E = build_extension(zero_function(), twosqrt(), 0.5)
    assert check_extension_bounds(E).verdict.holds


@pytest.mark.parametrize("w", [twosqrt(), power(0.5)], ids=["twosqrt", "sqrt"])
def test_conjugate_bookkeeping(w):
    for s in (0.05, 0.3, 1.0, 2.5):
        d = 1e-5 * s
        fd = (young_conjugate(w, s + d) - young_conjugate(w, s - d)) / (2 * d)
        assert fd == pytest.approx(-inverse_derivative(w, s), rel=1e-6)
        assert conjugate_derivative(w, s) == pytest.approx(-inverse_derivative(w, s), rel=1e-9)


def test_build_rejects():
    with pytest.raises(ExtensionError):
        build_extension(gaussian(1.0), linear(), 0.5)
    from striphyp.spaces import make_test_function
    with pytest.raises(ExtensionError):
        build_extension(make_test_function(power(0.5), 1.0), twosqrt(), 1.5)


def _G(z):
    return np.exp(1j * np.asarray(z))


def test_stokes_closed_form():
    E = build_extension(gaussian_source(0.0), twosqrt(), 0.5)
    res = stokes_boundary_pair(_G, E, 1.0)
    assert abs(res.value - SQRT_PI * math.exp(-0.25)) < 1e-5


def test_stokes_shifted_source():
    E = build_extension(gaussian_source(2.0), twosqrt(), 0.5)
    res = stokes_boundary_pair(_G, E, 1.0)
    target = SQRT_PI * math.exp(-0.25) * complex(math.cos(2), math.sin(2))
    assert abs(res.value - target) < 1e-5


def test_stokes_matches_direct_quadrature():
    E = build_extension(gaussian_source(0.0), twosqrt(), 0.5)
    eta = 1e-3
    assert abs(stokes_boundary_pair(_G, E, 1.0, eta).value - direct_pair(_G, E, eta)) < 1e-4


def test_stokes_zero_G():
    E = build_extension(gaussian_source(0.0), twosqrt(), 0.5)
    res = stokes_boundary_pair(lambda z: np.zeros(np.shape(z), dtype=complex), E, 1.0)
    assert res.value == 0
