import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from parityformer import _pykernels, kernels
from parityformer.scalar import FLOAT64, MPBackend, get_backend

IMPLS = kernels.implementations()

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_extension_is_built():
    # the sandbox builds the Cython core; a silent fallback would hide regressions
    assert "cython" in IMPLS


@pytest.mark.parametrize("scores, expected", [
    ([0.0, 0.0, 0.0], [1 / 3, 1 / 3, 1 / 3]),
    ([math.log(2), 0.0], [2 / 3, 1 / 3]),
])
def test_softmax_trivial(kernel_impl, scores, expected):
    w = kernels.softmax(np.array(scores))
    np.testing.assert_allclose(w, expected, rtol=1e-15)


def test_softmax_huge_scores_do_not_overflow(kernel_impl):
    # mpmath at 60 digits: e^-50 / (1 + e^-50)
    w = kernels.softmax(np.array([1e9, 1e9 - 50]))
    assert np.all(np.isfinite(w))
    assert w[0] == pytest.approx(1.0, rel=1e-15)
    assert w[1] == pytest.approx(1.92874984796391778e-22, rel=1e-12)


@pytest.mark.parametrize("bad", [[1.0, math.inf], [math.nan], [-math.inf, 0.0]])
def test_softmax_rejects_non_finite(kernel_impl, bad):
    with pytest.raises(ValueError, match="invalid score"):
        kernels.softmax(np.array(bad))


def test_softmax_rejects_empty(kernel_impl):
    with pytest.raises(ValueError, match="empty sequence"):
        kernels.softmax(np.array([], dtype=np.float64))


@given(arrays(np.float64, st.integers(1, 30), elements=finite),
       st.integers(-2 ** 20, 2 ** 20))
def test_softmax_shift_invariance(scores, shift):
    # scores on a 2^-10 grid keep s + c exact
    scores = np.round(scores * 1024) / 1024
    assert np.array_equal(kernels.softmax(scores), kernels.softmax(scores + float(shift)))


@given(arrays(np.float64, st.integers(1, 40), elements=finite))
def test_softmax_rows_sum_to_one_and_preserve_order(scores):
    w = kernels.softmax(scores)
    assert abs(math.fsum(w) - 1.0) <= 8 * FLOAT64.eps
    order = np.argsort(scores, kind="stable")
    for a, b in zip(order, order[1:]):
        if scores[b] > scores[a] and w[a] > 0:
            assert w[b] >= w[a]


@settings(max_examples=50)
@given(st.integers(1, 12), st.integers(1, 8), st.data())
def test_implementations_agree_bitwise_on_attention(n, d, data):
    scores = data.draw(arrays(np.float64, (n, n), elements=finite))
    values = data.draw(arrays(np.float64, (n, d), elements=finite))
    results = [impl.attention(scores, values) for impl in IMPLS.values()]
    for w, m in results[1:]:
        assert np.array_equal(w, results[0][0])
        assert np.array_equal(m, results[0][1])


@pytest.mark.parametrize("n", [1, 2, 7, 64, 250])
def test_implementations_agree_bitwise_on_semantic_kernels(n):
    for sigma in sorted({1, max(1, n // 3), n}):
        ref = _pykernels.coeffs(n, sigma, 0.01)
        for impl in IMPLS.values():
            a = impl.coeffs(n, sigma, 0.01)
            assert np.array_equal(a, ref)
            assert impl.theta(a, 1234.5) == _pykernels.theta(ref, 1234.5)
    sweeps = {name: impl.margin_sweep(n, 0.01, 1e4) for name, impl in IMPLS.items()}
    assert len(set(sweeps.values())) == 1


@pytest.mark.parametrize("n, num, den", [(2, 1, 100), (17, 1, 100), (40, 1, 5), (25, 9, 10)])
def test_lemma2_scan_agrees_across_implementations(n, num, den):
    alpha = num / den
    ref = _pykernels.lemma2_scan(n, num, den, alpha, exact_objects=True)
    for impl in IMPLS.values():
        assert impl.lemma2_scan(n, num, den, alpha) == ref


def test_lemma2_scan_falls_back_to_python_ints_past_int64():
    # 1/100 at n = 1000 overflows the int64 products
    assert kernels._scan_bound(1000, 1, 100) >= kernels._INT64_LIMIT
    out = kernels.lemma2_scan(3, 1, 10 ** 9, 1e-9)
    assert out["argmax_fail"][0] == 0


def test_compensated_mixing_beats_naive_summation(kernel_impl):
    values = np.array([[1e16], [1.0], [-1e16], [1.0]])
    _, mixed = kernels.attention(np.zeros((4, 4)), values)
    naive = sum(0.25 * v for v in values[:, 0])
    assert naive != 0.5
    assert np.all(mixed[:, 0] == 0.5)


def test_mp_backend_softmax_matches_float(kernel_impl):
    mp = MPBackend(200)
    s = [0.5, -3.0, 2.25, 2.25]
    w_mp = mp.softmax([mp.scalar(x) for x in s])
    np.testing.assert_allclose([float(x) for x in w_mp], kernels.softmax(np.array(s)), rtol=1e-15)
    assert abs(mp.fsum(w_mp) - 1) < mp.eps * 8


def test_get_backend(monkeypatch):
    assert get_backend() is FLOAT64
    assert get_backend(53) is FLOAT64
    assert get_backend(100).prec == 100
    monkeypatch.setenv("PARITYFORMER_PRECISION", "80")
    assert get_backend().prec == 80
    with pytest.raises(ValueError):
        MPBackend(4)


def test_benchmark_script_runs(capsys, monkeypatch):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    mod_spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(mod_spec)
    mod_spec.loader.exec_module(bench)
    bench.main(["--repeat", "1"])
    out = capsys.readouterr().out
    assert "attention" in out
    assert " NO" not in out
