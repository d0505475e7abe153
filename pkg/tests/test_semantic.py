import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parityformer.construction import ConstructionParams
from parityformer.interpreter import Decision
from parityformer.scalar import MPBackend
from parityformer.semantic import (
    gamma_softmax_form,
    semantic_coeffs,
    semantic_decide,
    semantic_gamma,
    semantic_theta,
)

ALPHA = Fraction(1, 100)


def exact_coeffs(n, sigma):
    """Brute-force a_i in exact rationals."""
    gamma = Fraction(sigma) / (sigma + (n - sigma) * ALPHA / n)
    return [-abs(gamma - 1 + (ALPHA / i - ALPHA / n) - (ALPHA ** 2 / i ** 2 + ALPHA ** 2 / n ** 2))
            for i in range(1, n + 1)]


def test_gamma_examples():
    assert semantic_gamma("0110") == pytest.approx(float(Fraction(400, 401)), rel=1e-15)
    assert semantic_gamma("111") == 1.0
    assert semantic_gamma("000") == 0.0


@pytest.mark.parametrize("word", ["1", "0110", "0001000", "1" * 9 + "0" * 30])
def test_gamma_closed_form_equals_attention_form(word):
    mp = MPBackend(200)
    params = ConstructionParams()
    closed = semantic_gamma(word, params, mp)
    literal = gamma_softmax_form(word, params, mp)
    assert abs(closed - literal) < 1e-55
    assert gamma_softmax_form(word) == pytest.approx(float(closed), rel=1e-14)


def test_coeffs_examples():
    a = semantic_coeffs(4, 2)
    exact = exact_coeffs(4, 2)
    assert max(range(4), key=lambda k: exact[k]) == 1
    assert int(np.argmax(a)) == 1
    assert sorted(a)[-1] > sorted(a)[-2]
    np.testing.assert_allclose(a, [float(x) for x in exact], rtol=1e-9)
    # single position: a_1 = -|lambda| = -2 alpha^2 (the squared terms do not cancel)
    assert semantic_coeffs(1, 1) == pytest.approx((-2e-4,), rel=1e-12)
    with pytest.raises(ValueError, match="Lemma 2 precondition"):
        semantic_coeffs(3, 0)


def test_argmax_is_sigma_for_every_sigma_up_to_fifty():
    for sigma in range(1, 51):
        a = semantic_coeffs(50, sigma)
        top = a[sigma - 1]
        assert all(top > x for k, x in enumerate(a) if k != sigma - 1)


def test_coeffs_are_never_positive():
    for n in (1, 5, 40):
        for sigma in range(1, n + 1):
            assert all(x <= 0 for x in semantic_coeffs(n, sigma))


def test_theta_examples():
    assert semantic_theta(1, 1) == -1.0
    assert 2 / 3 <= semantic_theta(2, 2) <= 1
    assert -1 <= semantic_theta(12, 7) <= -2 / 3


@pytest.mark.parametrize("word, decision", [("0000", Decision.ACCEPT), ("01", Decision.REJECT),
                                            ("0110", Decision.ACCEPT)])
def test_decide_examples(word, decision):
    got, trace = semantic_decide(word)
    assert got is decision
    assert (got is Decision.ACCEPT) == (word.count("1") % 2 == 0)


def test_all_zero_guard():
    decision, trace = semantic_decide("0000")
    assert decision is Decision.ACCEPT
    assert trace.final == 1 / 8
    assert trace.theta is None and trace.coeffs == ()


def test_guard_for_ones_is_negative():
    decision, trace = semantic_decide("01")
    assert trace.guard == -0.25
    assert trace.theta < -2 / 3


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.randoms())
def test_trace_depends_only_on_length_and_count(bits, rnd):
    shuffled = list(bits)
    rnd.shuffle(shuffled)
    assert semantic_decide(bits)[1] == semantic_decide(shuffled)[1]


def test_guard_sign():
    for n in range(1, 60):
        for sigma in range(n + 1):
            _, trace = semantic_decide([1] * sigma + [0] * (n - sigma))
            if sigma == 0:
                assert trace.guard > 0
            else:
                assert trace.guard <= -1 / (2 * n)


def test_decisions_match_parity_up_to_ten():
    for n in range(1, 11):
        for bits in itertools.product((0, 1), repeat=n):
            assert (semantic_decide(bits)[0] is Decision.ACCEPT) == (sum(bits) % 2 == 0)


def test_high_precision_pipeline_agrees():
    mp = MPBackend(128)
    for word in ("1", "10", "0110", "1101011"):
        d_hi, hi = semantic_decide(word, backend=mp)
        d_lo, lo = semantic_decide(word)
        assert d_hi is d_lo
        assert float(hi.theta) == pytest.approx(lo.theta, rel=1e-12)
        np.testing.assert_allclose([float(x) for x in hi.coeffs], lo.coeffs, rtol=1e-9)
