import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from striphyp.config import GridConfig
from striphyp.spaces import (SpaceError, SpaceParams, const_function, gaussian,
                             make_test_function, membership_report, product,
                             strip_norm, zero_function)
from striphyp.weights import CATALOG, exp_weight, linear, power, zero

GRID = GridConfig(t_max=20.0, n=400)


def test_norm_of_zero():
    assert strip_norm(zero_function(), SpaceParams(linear(), 1.0), GRID).value == 0.0


def test_gaussian_linear_norm():
    res = strip_norm(gaussian(1.0), SpaceParams(linear(), 1.0, 1.0), GRID)
    assert res.value == pytest.approx(math.exp(1.25), abs=1e-4)
    assert abs(abs(res.argmax.real) - 0.5) < 1e-3


def test_gaussian_square_norm_is_boundary_limited():
    res = strip_norm(gaussian(1.0), SpaceParams(power(2.0), 1.0, 1.0), GRID)
    assert res.value == pytest.approx(math.e, abs=1e-4)
    assert res.boundary_limited


def test_norm_rejects_narrow_function():
    from striphyp.stripharmonic import build_minorant
    from striphyp.spaces import reciprocal
    phi = reciprocal(build_minorant(power(0.5), 1.0, 0.5))
    with pytest.raises(SpaceError):
        strip_norm(phi, SpaceParams(linear(), 1.0), GRID)


def test_params_validation():
    with pytest.raises(SpaceError):
        SpaceParams(linear(), 0.0)
    with pytest.raises(SpaceError):
        SpaceParams(linear(), 1.0, flavor="neither")


@given(st.floats(0.1, 50.0), st.floats(-math.pi, math.pi))
@settings(max_examples=15)
def test_norm_homogeneity(r, arg):
    c = r * complex(math.cos(arg), math.sin(arg))
    p = SpaceParams(linear(), 1.0)
    base = strip_norm(gaussian(1.0), p, GRID).value
    scaled = strip_norm(gaussian(1.0).scale(c), p, GRID).value
    assert scaled == pytest.approx(abs(c) * base, rel=1e-10)


@pytest.mark.parametrize("name", ["linear", "twosqrt", "log1p", "power"])
def test_norm_monotone_in_lambda_and_h(name):
    w = CATALOG[name]() if name != "power" else power(0.5)
    phi = gaussian(1.0)
    lam_vals = [strip_norm(phi, SpaceParams(w, 1.0, lam), GRID).value for lam in (0.25, 0.5, 1, 2)]
    h_vals = [strip_norm(phi, SpaceParams(w, h, 1.0), GRID).value for h in (0.25, 0.5, 1, 2)]
    assert all(a <= b * (1 + 1e-9) for a, b in zip(lam_vals, lam_vals[1:]))
    assert all(a <= b * (1 + 1e-9) for a, b in zip(h_vals, h_vals[1:]))


def test_membership_examples():
    rep = membership_report(gaussian(1.0), linear(), "Beurling")
    assert rep.member and rep.verdict.status == "NumericallySupported"
    rep = membership_report(gaussian(1.0), exp_weight(), "Beurling")
    assert not rep.member and rep.verdict.status == "Fails"
    assert rep.verdict.witness["h"] == 1.0 and rep.verdict.witness["lambda"] == 1.0
    rep = membership_report(zero_function(), exp_weight(), "Beurling")
    assert rep.member


def test_roumieu_needs_one_pair():
    # e^{-x^2} e^{x^2 lambda^2}: finite only for lambda < 1
    rep = membership_report(gaussian(1.0), power(2.0), "Roumieu")
    assert rep.member
    rep = membership_report(gaussian(1.0), power(2.0), "Beurling")
    assert not rep.member


def test_make_test_function_zero_weight():
    phi = make_test_function(zero(), 1.0)
    assert phi.degenerate
    assert phi(0.3 + 0.1j) == 1.0


def test_make_test_function_sqrt():
    phi = make_test_function(power(0.5), 1.0)
    xs = 2.0 ** np.arange(2, 14)
    logs = np.asarray(phi.log_abs(xs)) + np.sqrt(2 * xs)
    assert np.all(np.diff(logs[3:]) < 0)
    assert logs[-1] < logs[3] - math.log(1e3)
    for lam in (1.0, 4.0, 16.0):
        res = strip_norm(phi, SpaceParams(power(0.5), 1.0, lam), GridConfig(t_max=64.0, n=64, max_doublings=3))
        assert math.isfinite(res.value)


def test_make_test_function_refuses_exp():
    with pytest.raises(SpaceError):
        make_test_function(exp_weight(), 1.0)


def test_product_and_const():
    f = product(gaussian(1.0), const_function(2.0))
    z = 0.3 + 0.4j
    assert f(z) == pytest.approx(2 * np.exp(-z * z))
    assert f.h_max == math.inf


@pytest.mark.parametrize("name", ["linear", "twosqrt", "log1p"])
def test_epsilon_pi_condition_for_members(name):
    # a nonzero element of the (h, lambda) space forces (epsilon)_{pi/(h lambda)}
    from striphyp.weights import check_condition
    w = CATALOG[name]()
    assert math.isfinite(strip_norm(gaussian(1.0), SpaceParams(w, 1.0, 1.0), GRID).value)
    v = check_condition(w, "epsilon", mu=math.pi)
    assert v.positive
