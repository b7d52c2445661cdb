import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from striphyp.verdict import Status
from striphyp.weights import (WeightError, add_zeta, catalog_samples, check_condition,
                              compare_weights, conjugate_derivative, dominate_all_dilates,
                              eval_weight, exp_weight, inverse_derivative, linear, log1p,
                              majorize_with_delta, power, twosqrt, young_conjugate, zero)


@pytest.mark.parametrize("w, t, expected", [
    (linear(), 0.0, 0.0),
    (power(0.5), 4.0, 2.0),
    (exp_weight(), 1.0, math.e),
])
def test_eval_weight_values(w, t, expected):
    assert eval_weight(w, t) == pytest.approx(expected, abs=1e-12)


def test_weight_is_even():
    w = power(0.5)
    assert eval_weight(w, -9.0) == eval_weight(w, 9.0)


def test_alpha_fails_for_square_with_witness():
    v = check_condition(power(2.0), "alpha")
    assert v.status is Status.FAILS
    assert v.witness["t1"] == v.witness["t2"] == 1.0


def test_delta_holds_for_linear():
    v = check_condition(linear(), "delta")
    assert v.status is Status.HOLDS
    assert (v.witness["A"], v.witness["H"]) == (1.0, 2.0)


def test_epsilon_two_for_exp_integral_is_one():
    v = check_condition(exp_weight(), "epsilon(2)")
    assert v.holds
    assert v.witness["integral"] == pytest.approx(1.0, abs=1e-8)


def test_exp_epsilon_zero_fails_but_infinity_holds():
    assert check_condition(exp_weight(), "epsilon0").fails
    assert check_condition(exp_weight(), "epsilon_inf").positive


def test_unknown_condition_and_bad_mu():
    with pytest.raises(WeightError):
        check_condition(linear(), "nope")
    with pytest.raises(WeightError):
        check_condition(linear(), "epsilon(-1)")


def test_compare_weights_examples():
    assert compare_weights(power(2.0), linear()) == {"subset", "prec"}
    assert compare_weights(linear(), power(2.0)) == {"none"}


def test_compare_weights_reflexive_without_prec():
    # t <= lam * t + C fails for lam < 1, so a weight is never strictly below itself
    assert compare_weights(linear(), linear()) == {"subset", "equivalent", "star_equivalent"}


def test_majorize_with_delta():
    assert majorize_with_delta(zero()).is_zero
    s = majorize_with_delta(power(0.5))
    assert s(0.0) == pytest.approx(2.0 / 3.0, abs=1e-9)
    t = np.linspace(0, 100, 1001)
    assert np.all(s(t) >= np.sqrt(t))


def test_add_zeta_bounds_and_growth():
    w = power(0.5)
    s = add_zeta(w)
    t = np.linspace(0, 100, 1001)
    assert np.all(s(t) <= 2 * np.sqrt(t) + 1e-12)
    tn = s.data["thresholds"][1:]
    n = np.arange(1, tn.size + 1)
    inside = 2 * tn < tn[-1]  # past the last stored threshold the multiplier freezes
    tn, n = tn[inside], n[inside]
    gap = s(2 * tn) - s(tn)
    assert tn.size >= 3
    assert np.all(np.diff(gap) >= 0)
    assert np.all(gap >= n * math.log(2) - 1e-12)


def test_add_zeta_rejects_log1p():
    with pytest.raises(WeightError):
        add_zeta(log1p())


def test_dominate_all_dilates():
    w = power(0.5)
    s = dominate_all_dilates(w)
    ratios = [s(t) / w(10 * t) for t in (1e3, 1e4, 1e5)]
    assert ratios[0] < ratios[1] < ratios[2]
    with pytest.raises(WeightError):
        dominate_all_dilates(exp_weight())
    assert dominate_all_dilates(zero()).is_zero


@pytest.mark.parametrize("w, s, expected", [
    (zero(), 1.0, 0.0), (twosqrt(), 1.0, 1.0), (power(0.5), 0.5, 0.5)])
def test_young_conjugate_values(w, s, expected):
    assert young_conjugate(w, s) == pytest.approx(expected, abs=1e-8)


def test_young_conjugate_brute_force():
    t = np.geomspace(1e-6, 1e6, 200001)
    for s in (0.3, 1.0, 4.0):
        brute = float(np.max(twosqrt()(t) - s * t))
        assert young_conjugate(twosqrt(), s) == pytest.approx(brute, abs=1e-6)


def test_inverse_derivative():
    assert inverse_derivative(twosqrt(), 1.0) == pytest.approx(1.0)
    assert inverse_derivative(twosqrt(), 2.0) == pytest.approx(0.25)
    with pytest.raises(WeightError):
        inverse_derivative(linear(), 1.0)


@pytest.mark.parametrize("w", catalog_samples(), ids=lambda w: w.label)
def test_catalog_monotone(w):
    t = np.linspace(0, 50, 1000)
    with np.errstate(over="ignore"):
        v = w(t)
    assert np.all(np.diff(v) >= -1e-12 * np.abs(v[1:]))


@pytest.mark.parametrize("w", [power(0.5), twosqrt(), linear(), log1p()], ids=lambda w: w.label)
def test_concave_euler_inequality(w):
    t = np.linspace(0.01, 100, 1000)
    assert np.all(t * w.deriv(t) <= w(t) + 1e-12)


@given(st.floats(0.05, 20), st.floats(0.0, 400))
def test_fenchel_inequality(s, t):
    for w in (twosqrt(), power(0.5)):
        assert young_conjugate(w, s) + t * s >= w(t) - 1e-9


@given(st.floats(0.1, 10))
def test_conjugate_identity(s):
    for w in (twosqrt(), power(0.5)):
        H = inverse_derivative(w, s)
        assert young_conjugate(w, s) == pytest.approx(w(H) - s * H, abs=1e-6)
        assert conjugate_derivative(w, s) == pytest.approx(-H)


@pytest.mark.parametrize("w, mu", [(power(2.0), 0.5), (linear(), 0.5), (exp_weight(), 2.0)],
                         ids=["square", "linear", "exp"])
def test_growth_lemma(w, mu):
    # (epsilon)_mu forces w(t) = o(e^{nu t}) for nu > mu
    assert check_condition(w, f"epsilon({mu})").positive
    t = 2.0 ** np.arange(3, 12)
    nu = 1.5 * mu
    r = w.log(t) - nu * t
    assert np.all(np.diff(r[3:]) < 0) and r[-1] < math.log(1e-10)
