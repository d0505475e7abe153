# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 kernels; see ``_pykernels`` for the reference twin."""
import numpy as np

from libc.math cimport exp, fabs, isfinite, INFINITY


cdef inline void _nadd(double *s, double *c, double x) noexcept nogil:
    # branch-free TwoSum; the error term equals Neumaier's exactly
    cdef double t = s[0] + x
    cdef double xv = t - s[0]
    c[0] += (s[0] - (t - xv)) + (x - xv)
    s[0] = t


cdef int _softmax_row(const double[:] scores, double[:] out) except -1:
    cdef Py_ssize_t n = scores.shape[0], j
    cdef double m, s = 0.0, c = 0.0, total
    if n == 0:
        raise ValueError("empty sequence")
    for j in range(n):
        if not isfinite(scores[j]):
            raise ValueError("invalid score")
    m = scores[0]
    for j in range(1, n):
        if scores[j] > m:
            m = scores[j]
    for j in range(n):
        out[j] = exp(scores[j] - m)
        _nadd(&s, &c, out[j])
    total = s + c
    for j in range(n):
        out[j] = out[j] / total
    return 0


def softmax(const double[:] scores):
    out = np.empty(scores.shape[0], dtype=np.float64)
    _softmax_row(scores, out)
    return out


cdef void _mix_row(const double *w, const double *values, Py_ssize_t n, Py_ssize_t d,
                   double *sv, double *cv, double *out) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double wij, x, t, xv
    for k in range(d):
        sv[k] = 0.0
        cv[k] = 0.0
    for j in range(n):
        wij = w[j]
        for k in range(d):
            # inlined TwoSum so the k loop vectorizes
            x = wij * values[j * d + k]
            t = sv[k] + x
            xv = t - sv[k]
            cv[k] += (sv[k] - (t - xv)) + (x - xv)
            sv[k] = t
    for k in range(d):
        out[k] = sv[k] + cv[k]


def attention(scores, values):
    cdef const double[:, ::1] sc = np.ascontiguousarray(scores, dtype=np.float64)
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = sc.shape[0], d = v.shape[1], i
    if sc.shape[1] != n or v.shape[0] != n:
        raise ValueError("dimension mismatch")
    if n == 0:
        raise ValueError("empty sequence")
    weights = np.empty((n, n), dtype=np.float64)
    mixed = np.empty((n, d), dtype=np.float64)
    acc = np.empty((2, max(d, 1)), dtype=np.float64)
    cdef double[:, ::1] w = weights
    cdef double[:, ::1] mx = mixed
    cdef double[:, ::1] a = acc
    for i in range(n):
        _softmax_row(sc[i], w[i])
    if d == 0:
        return weights, mixed
    # row-major sweep; each column still sums over j in order
    for i in range(n):
        _mix_row(&w[i, 0], &v[0, 0], n, d, &a[0, 0], &a[1, 0], &mx[i, 0])
    return weights, mixed


cdef void _coeffs(long n, long sigma, double alpha, double *out) noexcept nogil:
    cdef double gamma = sigma / (sigma + (n - sigma) * (alpha / n))
    cdef double a2 = alpha * alpha
    cdef double fi, z
    cdef long i
    for i in range(1, n + 1):
        fi = <double>i
        z = ((gamma - 1.0) + (alpha / fi - alpha / n)) - (a2 / (fi * fi) + a2 / (<double>(n * n)))
        out[i - 1] = -fabs(z)


def coeffs(long n, long sigma, double alpha):
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    _coeffs(n, sigma, alpha, &o[0])
    return out


cdef double _theta(const double *a, long n, double temperature) noexcept nogil:
    cdef double m = a[0] * temperature, e
    cdef double ns = 0.0, nc = 0.0, ds = 0.0, dc = 0.0
    cdef long k
    for k in range(1, n):
        if a[k] * temperature > m:
            m = a[k] * temperature
    for k in range(n):
        e = exp(a[k] * temperature - m)
        if (k + 1) % 2 == 0:
            _nadd(&ns, &nc, e)
        else:
            _nadd(&ns, &nc, -e)
        _nadd(&ds, &dc, e)
    return (ns + nc) / (ds + dc)


def theta(const double[:] a, double temperature):
    return _theta(&a[0], a.shape[0], temperature)


def margin_sweep(long n, double alpha, double temperature):
    buf = np.empty(n, dtype=np.float64)
    cdef double[:] b = buf
    cdef double worst = -1.0, th, dev, target
    cdef long sigma, worst_sigma = 0
    for sigma in range(1, n + 1):
        _coeffs(n, sigma, alpha, &b[0])
        th = _theta(&b[0], n, temperature)
        target = 1.0 if sigma % 2 == 0 else -1.0
        dev = fabs(th - target)
        if dev > worst:
            worst = dev
            worst_sigma = sigma
    return worst, worst_sigma


def lemma2_scan(long n, long long num, long long den, double alpha, exact_objects=False):
    if exact_objects:
        raise OverflowError("compiled scan is limited to 64-bit integers")
    cdef double[3] min_ratio
    cdef long[3] min_sigma, min_i
    cdef long[3] gt_count, gt_sigma, gt_i, fl_count, fl_sigma, fl_i
    cdef long am_count = 0, am_sigma = 0, am_arg = 0
    cdef double gap_rel = INFINITY, gap_abs = INFINITY
    cdef long gr_sigma = 0, gr_i = 0, ga_sigma = 0, ga_i = 0
    cdef long long p[3]
    cdef long long q[3]
    cdef long long fp[3]
    cdef long long fq[3]
    cdef long long bn, bd, cn, cd, ln, ld, rn, rd, sg, ii
    cdef long sigma, i, fam, best
    cdef double ratio, top, gap, babs, floor_abs = alpha / (2.0 * n * n)
    cdef bint unique
    for fam in range(3):
        min_ratio[fam] = INFINITY
        min_sigma[fam] = 0
        min_i[fam] = 0
        gt_count[fam] = 0
        gt_sigma[fam] = 0
        gt_i[fam] = 0
        fl_count[fam] = 0
        fl_sigma[fam] = 0
        fl_i[fam] = 0
    fp[0] = 2 * num
    fq[0] = den
    fp[1] = 2 * num
    fq[1] = den
    fp[2] = 2 * num * num
    fq[2] = den * den
    a_buf = np.empty(n, dtype=np.float64)
    cdef double[:] a = a_buf
    for sigma in range(1, n + 1):
        sg = sigma
        for i in range(1, n + 1):
            if i == sigma:
                continue
            ii = i
            bn = num * (sg - ii if sg > ii else ii - sg)
            bd = den * ii * sg
            cn = num * num * (ii * ii - sg * sg if ii > sg else sg * sg - ii * ii)
            cd = den * den * sg * sg * ii * ii
            ln = 2 * num * num
            ld = den * den * sg * n
            rn = num * num * num
            rd = den * den * den * sg * sg * sg
            p[0] = bn * cd
            q[0] = bd * cn
            p[1] = bn * ld
            q[1] = bd * ln
            p[2] = bn * rd
            q[2] = bd * rn
            for fam in range(3):
                ratio = (<double>p[fam]) / (<double>q[fam])
                if ratio < min_ratio[fam]:
                    min_ratio[fam] = ratio
                    min_sigma[fam] = sigma
                    min_i[fam] = i
                if not (p[fam] > 10 * q[fam]):
                    if gt_count[fam] == 0:
                        gt_sigma[fam] = sigma
                        gt_i[fam] = i
                    gt_count[fam] += 1
                if not (fp[fam] * p[fam] >= fq[fam] * q[fam]):
                    if fl_count[fam] == 0:
                        fl_sigma[fam] = sigma
                        fl_i[fam] = i
                    fl_count[fam] += 1
        if n == 1:
            continue
        _coeffs(n, sigma, alpha, &a[0])
        top = a[sigma - 1]
        unique = True
        best = 0
        for i in range(1, n + 1):
            if a[i - 1] > a[best]:
                best = i - 1
            if i == sigma:
                continue
            if not (top > a[i - 1]):
                unique = False
        if not unique:
            if am_count == 0:
                am_sigma = sigma
                am_arg = best + 1
            am_count += 1
        for i in range(1, n + 1):
            if i == sigma:
                continue
            gap = top - a[i - 1]
            babs = fabs(alpha / (<double>i) - alpha / (<double>sigma))
            if gap / babs < gap_rel:
                gap_rel = gap / babs
                gr_sigma = sigma
                gr_i = i
            if gap / floor_abs < gap_abs:
                gap_abs = gap / floor_abs
                ga_sigma = sigma
                ga_i = i
    return {
        "min_ratio": [[min_ratio[f], min_sigma[f], min_i[f]] for f in range(3)],
        "gt10_fail": [[gt_count[f], gt_sigma[f], gt_i[f]] for f in range(3)],
        "floor_fail": [[fl_count[f], fl_sigma[f], fl_i[f]] for f in range(3)],
        "argmax_fail": [am_count, am_sigma, am_arg],
        "min_gap_rel": [gap_rel, gr_sigma, gr_i],
        "min_gap_abs": [gap_abs, ga_sigma, ga_i],
    }
