import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from striphyp.quad import Envelope, integrate_decaying
from striphyp.stripharmonic import (StripError, build_minorant, cr_residual,
                                    eval_minorant_modulus, harmonic_conjugate_path,
                                    lemma_bounds, poisson_kernel, poisson_transform,
                                    three_lines_bound, three_lines_check)
from striphyp.weights import constant, linear, power, zero

COSH1M1 = math.cosh(1.0) - 1.0


def test_kernel_values():
    assert poisson_kernel(0.0, math.pi / 2, math.pi) == pytest.approx(1.0, abs=1e-15)
    assert poisson_kernel(1.0, math.pi / 2, math.pi) == pytest.approx(0.6480543, abs=1e-6)
    assert poisson_kernel(-3.0, math.pi / 2, math.pi) == poisson_kernel(3.0, math.pi / 2, math.pi)


def test_kernel_domain():
    with pytest.raises(StripError):
        poisson_kernel(0.0, 0.0, 1.0)
    with pytest.raises(StripError):
        poisson_kernel(0.0, 2.0, 1.0)


def test_kernel_matches_textbook_form():
    x = np.linspace(-6, 6, 41)
    for y in (0.2, 1.0, 2.9):
        ref = np.sin(y) / (np.cosh(x) - np.cos(y))
        assert np.allclose(poisson_kernel(x, y, math.pi), ref, rtol=1e-12)


def test_kernel_accurate_near_corner():
    # the textbook form loses digits here; the factored form keeps them
    x, y = 1e-7, 1e-7
    # series form of cosh x - cos y, free of cancellation
    exact = math.sin(y) / ((x * x + y * y) / 2 + (x ** 4 - y ** 4) / 24)
    assert poisson_kernel(x, y, math.pi) == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("y", [0.3, math.pi / 2, 2.8])
def test_half_line_integral(y):
    f = lambda x: poisson_kernel(x, y, math.pi)
    env = Envelope.exponential(math.sin(y) * math.e / COSH1M1, 1.0)
    res = integrate_decaying(f, "ray", env)
    assert abs(res.value - (math.pi - y)) < 1e-6


def test_harmonic_stencil():
    h = 1.0
    d = 1e-4
    for x in (-2.0, 0.0, 0.7, 3.0):
        for y in (0.2, 1.0, 1.7):
            lap = (poisson_kernel(x + d, y, h) + poisson_kernel(x - d, y, h)
                   + poisson_kernel(x, y + d, h) + poisson_kernel(x, y - d, h)
                   - 4 * poisson_kernel(x, y, h)) / d ** 2
            assert abs(lap) < 1e-3 * max(1.0, poisson_kernel(x, y, h))


@given(st.floats(1.0, 40.0), st.floats(0.01, math.pi - 0.01))
def test_kernel_decay_bound(x, y):
    bound = abs(math.sin(y)) * math.exp(-abs(x) + 1) / COSH1M1
    assert poisson_kernel(x, y, math.pi) <= bound * (1 + 1e-12)


def test_transform_examples():
    assert poisson_transform(constant(1.0), 3.0, 0.5, 1.0) == pytest.approx(0.5, abs=1e-6)
    assert poisson_transform(zero(), 3.0, 0.5, 1.0) == 0.0
    assert poisson_transform(linear(), 10.0, math.pi / 2, math.pi) == pytest.approx(5.0, abs=1e-2)


def test_transform_needs_weight():
    with pytest.raises(StripError):
        poisson_transform(lambda t: t, 0.0, 0.5, 1.0)


@pytest.mark.parametrize("w", [power(0.5), linear()], ids=["sqrt", "linear"])
@pytest.mark.parametrize("h", [1.0, math.pi])
def test_lemma_sandwich_small_grid(w, h):
    for x in np.linspace(-30, 30, 7):
        for y in np.linspace(0.05, 0.95, 4) * h:
            lo, hi, _ = lemma_bounds(w, x, y, h)
            val = poisson_transform(w, x, y, h)
            assert lo - 1e-9 <= val <= hi + 1e-9


def test_minorant_zero_weight():
    F = build_minorant(zero(), 1.0, 1.0)
    assert eval_minorant_modulus(F, 0.3 + 0.2j) == 1.0
    assert harmonic_conjugate_path(F, 0.3 + 0.2j) == 0.0


def test_minorant_linear_subadditive_examples():
    F = build_minorant(linear(), 1.0, math.pi, "subadditive")
    C = F.bound_constant
    assert eval_minorant_modulus(F, 10.0) >= math.exp(10.0)
    assert 1.0 <= eval_minorant_modulus(F, 0.0) <= C
    v = eval_minorant_modulus(F, 5.0)
    assert math.exp(5.0) <= v <= C * math.exp(20.0)
    assert harmonic_conjugate_path(F, 0j) == 0.0
    z = 1 + 0.5j
    assert abs(harmonic_conjugate_path(F, z, path="hv") - harmonic_conjugate_path(F, z, path="vh")) < 1e-5


def test_minorant_sqrt_dilate_sandwich():
    F = build_minorant(power(0.5), 1.0, 1.0, "dilate")
    for x in np.linspace(0, 50, 11):
        for y in (-0.9, 0.0, 0.9):
            u = F.U(float(x), y)
            assert F.log_lower(x) <= u <= F.log_upper(x)


def test_minorant_analytic():
    F = build_minorant(power(0.5), 1.0, 1.0, "dilate")
    for z in (0.3 + 0.2j, -4 + 0.7j, 12 - 0.5j):
        assert cr_residual(F, z) < 1e-4
        w = F(z)
        assert abs(abs(w) - math.exp(F.U(z.real, z.imag))) < 1e-9 * abs(w)


def test_minorant_rejects_bad_input():
    from striphyp.weights import exp_weight
    with pytest.raises(StripError):
        build_minorant(exp_weight(), 1.0, 1.0, "dilate")
    with pytest.raises(StripError):
        build_minorant(linear(), -1.0, 1.0)
    F = build_minorant(linear(), 1.0, 1.0)
    with pytest.raises(StripError):
        F.U(0.0, 1.0)


def test_three_lines_examples():
    sq = power(2.0)
    b = three_lines_bound(math.e, 1.0, sq, 1.0, 0.5j)
    assert b == pytest.approx(math.exp(0.5))
    assert abs(np.exp(-(0.5j) ** 2)) <= b
    assert three_lines_bound(3.0, 2.0, sq, 1.0, 0.0) == pytest.approx(2.0)
    assert three_lines_bound(3.0, 2.0, sq, 1.0, 7 + 1j) == pytest.approx(3.0)


def test_three_lines_random(rng):
    pts = rng.uniform(-5, 5, 300) + 1j * rng.uniform(0, 1, 300)
    ok, worst, _ = three_lines_check(lambda z: np.exp(-z * z), math.e, 1.0, power(2.0), 1.0, pts)
    assert ok and worst <= 1.0


@pytest.mark.parametrize("args", [(power(0.5), 1.0, 2.0, "dilate"), (linear(), 1.0, math.pi, "subadditive")],
                         ids=["sqrt", "linear"])
def test_batched_log_matches_pointwise(args):
    F = build_minorant(*args)
    xs = np.linspace(-16, 16, 24)
    for y in (-0.5 * F.h, 0.0, 0.8 * F.h):
        z = xs + 1j * y
        batch = F.log_many(z)
        point = np.array([F.log(v) for v in z])
        assert np.max(np.abs(batch - point)) < 1e-8
        assert np.allclose(F.log_many(z, real_only=True), point.real, atol=1e-8)
