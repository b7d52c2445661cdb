import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from striphyp.reps import (Functional, RepError, boundary_pair, cauchy_represent, delta,
                           direct_pair, edge_continuation_check, exp_decay, gauss_decay,
                           split_point_masses, support_pair)
from striphyp.spaces import const_function, gaussian
from striphyp.stripharmonic import build_minorant
from striphyp.weights import power

TWO_PI = 2 * math.pi


def test_cauchy_kernel_values():
    F = cauchy_represent(delta(0.0))
    assert abs(F(1j)) == pytest.approx(1 / TWO_PI, abs=1e-12)
    assert F(0.7 + 0.5j) == pytest.approx(-1 / (2j * math.pi * (0.7 + 0.5j)))
    F2 = cauchy_represent(delta(2.0))
    assert abs(F2(0.0 + 0.5j)) == pytest.approx(1 / (TWO_PI * abs(2 - 0.5j)), rel=1e-12)
    assert cauchy_represent(Functional())(0.3 + 1j) == 0


def test_cauchy_refuses_outside_atoms():
    with pytest.raises(RepError):
        cauchy_represent(delta(0.5j), b=0.25)
    with pytest.raises(RepError):
        cauchy_represent(delta(0.0), b=1.0, R=0.5)


def test_pair_delta_zero():
    F = cauchy_represent(delta(0.0))
    res = boundary_pair(F, gaussian(1.0), 0.5)
    assert abs(res.value - 1.0) < 1e-6


def test_pair_derivative_atom():
    F = cauchy_represent(delta(0.0, order=1))
    res = boundary_pair(F, gaussian(1.0, 1.0), 0.5)
    assert abs(res.value - 2 / math.e) < 1e-6


def test_pair_zero_functional():
    F = cauchy_represent(Functional())
    assert boundary_pair(F, gaussian(1.0), 0.5).value == 0


CATALOG_F = [
    delta(0.0),
    delta(2.0) + delta(-1.0, coef=0.5j),
    delta(0.1j, order=2, coef=-1.0),
    delta(-3.0) + delta(5.0),
    Functional((), gauss_decay()),
    delta(1.0, 1) + Functional((), exp_decay(2.0)),
]
CATALOG_PHI = [gaussian(1.0), gaussian(0.5, 1 + 0.2j), gaussian(2.0, -1.0)]


@pytest.mark.parametrize("fi", range(len(CATALOG_F)))
@pytest.mark.parametrize("pi", range(len(CATALOG_PHI)))
def test_round_trip(fi, pi):
    f, phi = CATALOG_F[fi], CATALOG_PHI[pi]
    F = cauchy_represent(f)
    got = boundary_pair(F, phi, 0.5).value
    assert abs(got - direct_pair(f, phi)) < 1e-6


def test_round_trip_with_minorant():
    P = build_minorant(power(0.5), 1.0, 2.0)
    f = delta(0.0) + delta(1.5, 1, 2.0)
    F = cauchy_represent(f, P, b=0.25, R=2.0)
    phi = gaussian(1.0, 0.3)
    assert abs(boundary_pair(F, phi, 0.5).value - direct_pair(f, phi)) < 1e-6


def test_contour_independence():
    f = delta(0.5) + delta(-2.0, 1)
    F = cauchy_represent(f, b=0.25, R=2.0)
    phi = gaussian(1.0)
    a = boundary_pair(F, phi, 0.4).value
    b = boundary_pair(F, phi, 1.2).value
    assert abs(a - b) < 1e-7


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
@settings(max_examples=10)
def test_linearity(a, b):
    f, g = delta(0.0), delta(1.0, 1)
    phi = gaussian(1.0)
    lhs = boundary_pair(cauchy_represent(f.scale(a) + g.scale(b)), phi, 0.5).value
    rhs = a * boundary_pair(cauchy_represent(f), phi, 0.5).value \
        + b * boundary_pair(cauchy_represent(g), phi, 0.5).value
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_support_pair_examples():
    phi = gaussian(1.0)
    F2 = cauchy_represent(delta(2.0))
    assert abs(support_pair(F2, phi, [(1.0, 3.0)], 0.5).value - math.exp(-4)) < 1e-8
    assert abs(support_pair(F2, phi, [(-1.0, 1.0)], 0.5).value) < 1e-8
    F = cauchy_represent(delta(-3.0) + delta(5.0))
    got = support_pair(F, phi, [(-4.0, -2.0), (4.0, 6.0)], 0.5).value
    assert abs(got - (math.exp(-9) + math.exp(-25))) < 1e-8


def test_support_pair_tiling_matches_boundary_pair():
    f = delta(-1.5) + delta(0.5, 1, 2.0) + delta(3.0)
    F = cauchy_represent(f)
    phi = gaussian(0.5, 0.2)
    tiles = [(-math.inf, -1.0), (-1.0, 2.0), (2.0, math.inf)]
    assert abs(support_pair(F, phi, tiles, 0.5).value - boundary_pair(F, phi, 0.5).value) < 1e-6


def test_support_pair_rejects_endpoint_on_atom():
    with pytest.raises(RepError):
        support_pair(cauchy_represent(delta(2.0)), gaussian(1.0), [(2.0, 3.0)], 0.5)


def test_edge_residuals():
    assert edge_continuation_check(gaussian(1.0), None, 2.0, 1.5j) < 1e-6
    F = cauchy_represent(delta(0.0), b=0.25, R=2.0)
    r = edge_continuation_check(F, None, 1.9, 1.5j)
    assert r == pytest.approx(1 / (TWO_PI * 1.5), abs=1e-6)
    assert edge_continuation_check(cauchy_represent(Functional()), None, 1.0, 0.5j) == 0.0
    assert edge_continuation_check(const_function(0.0), None, 1.0, 0.5j) == 0.0


def test_split_examples():
    fp, fm = split_point_masses(delta(-3.0) + delta(5.0), 0.0, 0.0)
    assert [a.loc for a in fp.atoms] == [5.0]
    assert [(a.loc, a.coef) for a in fm.atoms] == [(-3.0, -1.0)]
    fp, fm = split_point_masses(delta(0.0), 0.0, 0.0)
    assert len(fp.atoms) == 1 and fm.is_zero
    fp, fm = split_point_masses(Functional(), 0.0, 0.0)
    assert fp.is_zero and fm.is_zero


def test_split_reconstructs():
    f = delta(-2.0) + delta(1.0, 1, 3.0) + Functional((), gauss_decay())
    fp, fm = split_point_masses(f, 0.0, 1.0)
    phi = gaussian(1.0, 0.4)
    assert abs(direct_pair(fp, phi) - direct_pair(fm, phi) - direct_pair(f, phi)) < 1e-9
