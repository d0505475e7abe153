"""Scalar backends: IEEE double (default) and mpmath software floats.

Both backends expose the same small operation set, so the interpreter runs
identical control flow under either and only the rounding differs.
"""
from __future__ import annotations

import math
import os
import sys

import mpmath
import numpy as np

from . import kernels

PRECISION_ENV = "PARITYFORMER_PRECISION"


class Float64Backend:
    name = "float64"
    eps = sys.float_info.epsilon

    def scalar(self, value):
        return float(value)

    def array(self, values):
        return np.array(values, dtype=np.float64)

    def zeros(self, shape):
        return np.zeros(shape, dtype=np.float64)

    def exp(self, x):
        return math.exp(x)

    def log(self, x):
        return math.log(x)

    def fsum(self, values):
        return math.fsum(values)

    def isfinite(self, x):
        return math.isfinite(x)

    def to_float(self, x):
        return float(x)

    def softmax(self, scores):
        return kernels.softmax(np.ascontiguousarray(scores, dtype=np.float64))

    def attention(self, scores, values):
        return kernels.attention(
            np.ascontiguousarray(scores, dtype=np.float64),
            np.ascontiguousarray(values, dtype=np.float64),
        )

    def relu(self, x):
        return np.maximum(x, 0.0)

    def __repr__(self):
        return "Float64Backend()"


class MPBackend:
    """Software floats with ``prec`` mantissa bits (mpmath).

    Each instance owns a private context, so two backends with different
    precisions can be used side by side.
    """

    name = "mpmath"

    def __init__(self, prec=128):
        if prec < 8:
            raise ValueError("mantissa width must be at least 8 bits")
        self.prec = int(prec)
        self.ctx = mpmath.MPContext()
        self.ctx.prec = self.prec
        self.eps = self.ctx.ldexp(1, 1 - self.prec)

    def scalar(self, value):
        if isinstance(value, str):
            return self.ctx.mpf(value)
        if isinstance(value, (int, np.integer)):
            return self.ctx.mpf(int(value))
        return self.ctx.mpf(value)

    def array(self, values):
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = self.scalar(v)
        return out

    def zeros(self, shape):
        out = np.empty(shape, dtype=object)
        out.fill(self.ctx.zero)
        return out

    def exp(self, x):
        return self.ctx.exp(x)

    def log(self, x):
        return self.ctx.log(x)

    def fsum(self, values):
        return self.ctx.fsum(values)

    def isfinite(self, x):
        return bool(self.ctx.isfinite(x))

    def to_float(self, x):
        return float(x)

    def softmax(self, scores):
        scores = list(scores)
        if not scores:
            raise ValueError("empty sequence")
        if not all(self.ctx.isfinite(s) for s in scores):
            raise ValueError("invalid score")
        m = max(scores)
        e = [self.ctx.exp(s - m) for s in scores]
        total = self.ctx.fsum(e)
        return np.array([x / total for x in e], dtype=object)

    def attention(self, scores, values):
        n = scores.shape[0]
        d = values.shape[1]
        weights = np.empty((n, n), dtype=object)
        mixed = np.empty((n, d), dtype=object)
        for i in range(n):
            w = self.softmax(scores[i])
            weights[i] = w
            for k in range(d):
                mixed[i, k] = self.ctx.fsum(w[j] * values[j, k] for j in range(n))
        return weights, mixed

    def relu(self, x):
        zero = self.ctx.zero
        out = np.empty(x.shape, dtype=object)
        for idx, v in np.ndenumerate(x):
            out[idx] = v if v > zero else zero
        return out

    def __repr__(self):
        return f"MPBackend(prec={self.prec})"


FLOAT64 = Float64Backend()


def get_backend(precision=None):
    """Backend for a mantissa width; ``None`` or 53 means IEEE double.

    When ``precision`` is omitted the ``PARITYFORMER_PRECISION`` environment
    variable is consulted.
    """
    if precision is None:
        env = os.environ.get(PRECISION_ENV, "").strip()
        precision = int(env) if env else None
    if precision is None or precision == 53:
        return FLOAT64
    return MPBackend(precision)
