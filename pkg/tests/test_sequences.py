import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from striphyp.sequences import (SequenceError, assoc_weight, associated_function,
                                associated_via_counting, check_seq_condition, compare_sequences,
                                counting_function, explicit, factorial, loglog,
                                nontriviality_classify)
from striphyp.verdict import Status


def test_associated_function_spot_values():
    M = factorial(1)
    assert associated_function(M, 1.0) == 0.0
    assert associated_function(M, 2.0) == pytest.approx(math.log(2), abs=1e-12)
    assert associated_function(M, 3.0) == pytest.approx(math.log(4.5), abs=1e-12)


def test_associated_function_brute_force():
    M = factorial(1)
    p = np.arange(0, 501)
    logfact = np.array([math.lgamma(k + 1) for k in p])
    for t in (0.7, 2.0, 3.0, 17.5, 123.0):
        brute = max(0.0, float(np.max(p * math.log(t) - logfact)))
        assert associated_function(M, t) == pytest.approx(brute, abs=1e-9)


@pytest.mark.parametrize("M, t, n", [(factorial(1), 0.5, 0), (factorial(1), 3.5, 3),
                                     (factorial(2), 2.5, 1)])
def test_counting_function(M, t, n):
    assert counting_function(M, t) == n


def test_associated_via_counting_values():
    assert associated_via_counting(factorial(1), 3.0) == pytest.approx(
        math.log(2) + 2 * math.log(1.5), abs=1e-9)
    assert associated_via_counting(factorial(1), 1.0) == 0.0
    assert associated_via_counting(factorial(2), 4.0) == pytest.approx(math.log(4), abs=1e-9)


def test_sequence_conditions():
    v = check_seq_condition(factorial(1), "M2")
    assert v.holds and (v.witness["A"], v.witness["H"]) == (1.0, 2.0)
    assert check_seq_condition(loglog(1, 1), "M5_0").fails
    assert check_seq_condition(factorial(0.5), "logconvex").holds


def test_non_logconvex_prefix_fails():
    M = explicit([1, 1, 2, 3, 24, 120, 720, 5040, 40320])
    assert check_seq_condition(M, "logconvex").fails


def test_unknown_sequence_condition():
    with pytest.raises(SequenceError):
        check_seq_condition(factorial(1), "M9")


@pytest.mark.parametrize("M, label", [
    (factorial(0.5), "BeurlingAndRoumieu"), (factorial(1), "BeurlingAndRoumieu"),
    (factorial(2), "BeurlingAndRoumieu"), (loglog(1, 2), "BeurlingAndRoumieu"),
    (loglog(1, 1), "RoumieuOnly"), (loglog(0.5, 1), "Trivial")], ids=lambda x: str(x))
def test_nontriviality_labels(M, label):
    assert nontriviality_classify(M).label == label


def test_compare_sequences():
    assert compare_sequences(factorial(1), factorial(2)) == {"subset", "prec"}
    assert compare_sequences(factorial(2), factorial(1)) == {"none"}
    # M_p <= C h^p M_p fails for h < 1, so no sequence is strictly below itself
    assert compare_sequences(factorial(1), factorial(1)) == {"subset", "equivalent"}


@pytest.mark.parametrize("M", [factorial(0.5), factorial(1), factorial(2), loglog(1, 2)],
                         ids=lambda m: m.spec)
def test_counting_oracle_on_prefix(M):
    lq = M.log_quotients[:400]
    top = math.exp(float(lq[lq < 300][-1]))
    t = np.linspace(0, top, 300)
    assert np.allclose(associated_function(M, t), associated_via_counting(M, t), atol=1e-9, rtol=0)


@given(st.floats(0.0, 1.0))
def test_assoc_zero_below_first_quotient(frac):
    M = factorial(2)
    m1 = math.exp(float(M.log_quotients[0]))
    assert associated_function(M, frac * m1) == 0.0


@given(st.floats(1.01, 500.0), st.floats(1e-3, 5.0))
def test_assoc_strictly_increasing_past_first_quotient(t, dt):
    M = factorial(1)
    assert associated_function(M, t + dt) > associated_function(M, t)


def test_assoc_weight_verdicts_follow_sequence():
    from striphyp.weights import check_condition
    for M in (factorial(1), loglog(1, 1)):
        w = assoc_weight(M)
        seq = check_seq_condition(M, "M5_0").status is Status.FAILS
        wt = check_condition(w, "epsilon0").status is Status.FAILS
        assert seq == wt
