"""Pure-Python/numpy implementation of the float64 hot kernels.

Mirrors ``_ckernels.pyx`` operation for operation (same summation order,
libm ``exp``), so both produce the same bits on IEEE hardware.
"""
import math

import numpy as np


def _neumaier(values):
    s = 0.0
    c = 0.0
    for x in values:
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def _check_scores(scores):
    if scores.shape[-1] == 0:
        raise ValueError("empty sequence")
    if not np.all(np.isfinite(scores)):
        raise ValueError("invalid score")


def softmax(scores):
    _check_scores(scores)
    m = float(scores.max())
    e = [math.exp(float(s) - m) for s in scores]
    total = _neumaier(e)
    return np.array([x / total for x in e], dtype=np.float64)


def attention(scores, values):
    n = scores.shape[0]
    if scores.shape != (n, n) or values.shape[0] != n:
        raise ValueError("dimension mismatch")
    _check_scores(scores)
    weights = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        weights[i] = softmax(scores[i])
    # column-wise Neumaier over keys, vectorised across queries and features
    s = np.zeros((n, values.shape[1]))
    c = np.zeros_like(s)
    for j in range(n):
        x = weights[:, j, None] * values[None, j, :]
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c += np.where(big, (s - t) + x, (x - t) + s)
        s = t
    return weights, s + c


def coeffs(n, sigma, alpha):
    gamma = sigma / (sigma + (n - sigma) * (alpha / n))
    a2 = alpha * alpha
    i = np.arange(1, n + 1, dtype=np.float64)
    z = ((gamma - 1.0) + (alpha / i - alpha / n)) - (a2 / (i * i) + a2 / (n * n))
    return -np.abs(z)


def theta(a, temperature):
    scores = [float(x) * temperature for x in a]
    m = max(scores)
    e = [math.exp(s - m) for s in scores]
    signed = [x if (k + 1) % 2 == 0 else -x for k, x in enumerate(e)]
    return _neumaier(signed) / _neumaier(e)


def margin_sweep(n, alpha, temperature):
    worst = -1.0
    worst_sigma = 0
    for sigma in range(1, n + 1):
        th = theta(coeffs(n, sigma, alpha), temperature)
        target = 1.0 if sigma % 2 == 0 else -1.0
        dev = abs(th - target)
        if dev > worst:
            worst = dev
            worst_sigma = sigma
    return worst, worst_sigma


def _new_scan():
    return {
        "min_ratio": [[math.inf, 0, 0] for _ in range(3)],
        "gt10_fail": [[0, 0, 0] for _ in range(3)],
        "floor_fail": [[0, 0, 0] for _ in range(3)],
        "argmax_fail": [0, 0, 0],
        "min_gap_rel": [math.inf, 0, 0],
        "min_gap_abs": [math.inf, 0, 0],
    }


def _record_min(slot, values, sigma, idx):
    k = int(np.argmin(values))
    v = float(values[k])
    if v < slot[0]:
        slot[0], slot[1], slot[2] = v, sigma, int(idx[k])


def _record_fail(slot, mask, sigma, idx):
    count = int(np.count_nonzero(mask))
    if count:
        if slot[0] == 0:
            slot[1], slot[2] = sigma, int(idx[np.argmax(mask)])
        slot[0] += count


def lemma2_scan(n, num, den, alpha, exact_objects=False):
    """Audit every (sigma, i != sigma) pair at length ``n``.

    The three proof ratios are formed from integer numerators and
    denominators (alpha = num/den), so threshold and floor comparisons are
    exact.  ``exact_objects`` switches to Python ints when int64 would
    overflow.
    """
    dtype = object if exact_objects else np.int64
    out = _new_scan()
    all_i = np.arange(1, n + 1)
    floor_abs = alpha / (2.0 * n * n)
    for sigma in range(1, n + 1):
        i = all_i[all_i != sigma]
        if i.size == 0:
            continue
        ii = i.astype(dtype)
        sg = int(sigma)
        b_num = num * np.abs(sg - ii)
        b_den = den * ii * sg
        c_num = num * num * np.abs(ii * ii - sg * sg)
        c_den = den * den * sg * sg * ii * ii
        l_num = 2 * num * num
        l_den = den * den * sg * n
        r_num = num ** 3
        r_den = den ** 3 * sg ** 3
        pairs = (
            (b_num * c_den, b_den * c_num),
            (b_num * l_den, b_den * l_num),
            (b_num * r_den, b_den * r_num),
        )
        floors = ((2 * num, den), (2 * num, den), (2 * num * num, den * den))
        for fam, ((p, q), (fp, fq)) in enumerate(zip(pairs, floors)):
            if exact_objects:
                ratio = np.array([pp / qq for pp, qq in zip(p, q)], dtype=np.float64)
            else:
                ratio = p.astype(np.float64) / q.astype(np.float64)
            _record_min(out["min_ratio"][fam], ratio, sigma, i)
            _record_fail(out["gt10_fail"][fam], ~(p > 10 * q), sigma, i)
            _record_fail(out["floor_fail"][fam], ~(fp * p >= fq * q), sigma, i)

        a = coeffs(n, sigma, alpha)
        top = a[sigma - 1]
        others = a[i - 1]
        if not np.all(top > others):
            slot = out["argmax_fail"]
            if slot[0] == 0:
                slot[1], slot[2] = sigma, int(np.argmax(a)) + 1
            slot[0] += 1
        gap = top - others
        b_abs = np.abs(alpha / i - alpha / sigma)
        _record_min(out["min_gap_rel"], gap / b_abs, sigma, i)
        _record_min(out["min_gap_abs"], gap / floor_abs, sigma, i)
    return out
