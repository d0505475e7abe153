"""Explicit weights for the length-independent 3-layer parity transformer.

Residual stream registers (see ``StreamLayout``)::

    layer 1  uniform attention averages the telescoped encodings and the
             bits: ln n, f(n), alpha/n, alpha^2/n^2, mean bit, and the guard
             1/(2n) - (ones)/n.
    layer 2  scores (1 - x_j)(delta - ln n) put weight alpha/n on zeros
             relative to ones; the averaged bit is gamma.  The MLP forms
             a_i = -|gamma - 1 + alpha/i - alpha^2/i^2 - alpha/n - alpha^2/n^2|.
    layer 3  scores a_j f(n) concentrate on j = (number of ones); the
             averaged sign (-1)^j is theta, and OUT = max(theta, guard).
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .encoding import (
    AlternatingSign,
    Constant,
    InverseQuadratic,
    Telescope,
    alpha_text,
    temperature,
)
from .errors import ConfigurationError
from .interpreter import AffineMap, AttentionLayer, PiecewiseLinearNet, TransformerSpec
from .scalar import FLOAT64


@dataclass(frozen=True)
class StreamLayout:
    """Coordinate index of every named register.

    After layer 1 the three telescope registers PE_TEMP, PE_INV_N and
    PE_INV_N2 are overwritten with the values they average to (f(n),
    alpha/n, alpha^2/n^2); ``TEMP``/``INV_N``/``INV_N2`` alias them.  During
    layer 1 the still-empty GAMMA, ACOEFF and THETA registers stage those
    averages.  SCORE is never written into the stream: K and Q use it to
    carry the two factors of a bilinear score.
    """

    OUT: int = 0
    BIAS: int = 1
    TOKEN: int = 2
    SIGN: int = 3
    PE_INVQUAD: int = 4
    PE_LNN: int = 5
    PE_TEMP: int = 6
    PE_INV_N: int = 7
    PE_INV_N2: int = 8
    LNN: int = 9
    MEAN_X: int = 10
    GUARD: int = 11
    GAMMA: int = 12
    ACOEFF: int = 13
    THETA: int = 14
    SCORE: int = 15
    dim: int = 16

    def __post_init__(self):
        idx = self.indices()
        if len(set(idx.values())) != len(idx):
            raise ConfigurationError("layout collision: two registers share a coordinate")
        bad = [name for name, k in idx.items() if not 0 <= k < self.dim]
        if bad:
            raise ConfigurationError(f"registers outside 0..{self.dim - 1}: {', '.join(bad)}")
        if self.OUT != 0:
            raise ConfigurationError("OUT must be coordinate 0")

    def indices(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "dim"}

    @property
    def TEMP(self):
        return self.PE_TEMP

    @property
    def INV_N(self):
        return self.PE_INV_N

    @property
    def INV_N2(self):
        return self.PE_INV_N2


DEFAULT_LAYOUT = StreamLayout()


@dataclass(frozen=True)
class ConstructionParams:
    alpha: float = 0.01
    d: int = 16

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie strictly between 0 and 1")

    def delta(self, backend=FLOAT64):
        """ln(alpha) in the given backend."""
        return backend.log(backend.scalar(alpha_text(self.alpha)))

    def temperature(self, n):
        return temperature(n, self.alpha)


class _MLPBuilder:
    """Two-stage ReLU network assembled from named hidden units."""

    def __init__(self, d):
        self.d = d
        self.rows = []
        self.biases = []
        self.writes = []

    def unit(self, weights, bias=0.0):
        row = np.zeros(self.d)
        for src, w in weights.items():
            row[src] += w
        self.rows.append(row)
        self.biases.append(bias)
        return len(self.rows) - 1

    def write(self, dst, unit, coef=1.0):
        self.writes.append((dst, unit, coef))

    def linear(self, dst, weights):
        """dst += sum(w * x[src]) exactly, via ReLU(v) - ReLU(-v)."""
        pos = self.unit(weights)
        neg = self.unit({k: -w for k, w in weights.items()})
        self.write(dst, pos, 1.0)
        self.write(dst, neg, -1.0)

    def keep(self, *coords):
        for c in coords:
            self.linear(c, {c: 1.0})

    def move(self, src, dst):
        self.linear(dst, {src: 1.0})

    def build(self):
        hidden = len(self.rows)
        out = np.zeros((self.d, hidden))
        for dst, unit, coef in self.writes:
            out[dst, unit] += coef
        return PiecewiseLinearNet((
            AffineMap(np.array(self.rows), np.array(self.biases)),
            AffineMap(out, np.zeros(self.d)),
        ))


def _layer_one(L, alpha):
    d = L.dim
    K = np.zeros((d, d))
    Q = np.zeros((d, d))
    O = np.zeros((d, d))
    O[L.LNN, L.PE_LNN] = 1.0
    O[L.MEAN_X, L.TOKEN] = 1.0
    O[L.GAMMA, L.PE_TEMP] = 1.0
    O[L.ACOEFF, L.PE_INV_N] = 1.0
    O[L.THETA, L.PE_INV_N2] = 1.0

    net = _MLPBuilder(d)
    net.keep(L.BIAS, L.TOKEN, L.SIGN, L.PE_INVQUAD, L.LNN, L.MEAN_X)
    net.move(L.GAMMA, L.TEMP)
    net.move(L.ACOEFF, L.INV_N)
    net.move(L.THETA, L.INV_N2)
    # 1/(2n) - mean = (1/(2 alpha)) * (alpha/n) - mean
    net.linear(L.GUARD, {L.ACOEFF: 1.0 / (2.0 * alpha), L.MEAN_X: -1.0})
    return AttentionLayer(K, Q, O, net.build())


def _layer_two(L, delta):
    d = L.dim
    K = np.zeros((d, d))
    Q = np.zeros((d, d))
    O = np.zeros((d, d))
    K[L.SCORE, L.BIAS] = 1.0
    K[L.SCORE, L.TOKEN] = -1.0
    Q[L.SCORE, L.BIAS] = delta
    Q[L.SCORE, L.LNN] = -1.0
    O[L.GAMMA, L.TOKEN] = 1.0

    net = _MLPBuilder(d)
    net.keep(L.BIAS, L.TOKEN, L.SIGN, L.PE_INVQUAD, L.LNN, L.MEAN_X,
             L.TEMP, L.INV_N, L.INV_N2, L.GUARD, L.GAMMA)
    z = {L.GAMMA: 1.0, L.BIAS: -1.0, L.PE_INVQUAD: 1.0, L.INV_N: -1.0, L.INV_N2: -1.0}
    pos = net.unit(z)
    neg = net.unit({k: -w for k, w in z.items()})
    net.write(L.ACOEFF, pos, -1.0)
    net.write(L.ACOEFF, neg, -1.0)
    return AttentionLayer(K, Q, O, net.build())


def _layer_three(L):
    d = L.dim
    K = np.zeros((d, d))
    Q = np.zeros((d, d))
    O = np.zeros((d, d))
    K[L.SCORE, L.ACOEFF] = 1.0
    Q[L.SCORE, L.TEMP] = 1.0
    O[L.THETA, L.SIGN] = 1.0

    net = _MLPBuilder(d)
    net.keep(L.BIAS, L.TOKEN, L.SIGN, L.PE_INVQUAD, L.LNN, L.MEAN_X,
             L.TEMP, L.INV_N, L.INV_N2, L.GUARD, L.GAMMA, L.ACOEFF, L.THETA)
    # OUT = guard + ReLU(theta - guard) = max(theta, guard)
    net.linear(L.OUT, {L.GUARD: 1.0})
    excess = net.unit({L.THETA: 1.0, L.GUARD: -1.0})
    net.write(L.OUT, excess, 1.0)
    return AttentionLayer(K, Q, O, net.build())


def build_parity_spec(params=None, layout=DEFAULT_LAYOUT):
    """The 3-layer parity recognizer as a ``TransformerSpec``."""
    params = params or ConstructionParams()
    L = layout
    if params.d != L.dim:
        raise ConfigurationError(f"params.d={params.d} but layout has {L.dim} coordinates")
    alpha = params.alpha
    letters = (np.zeros(L.dim), np.zeros(L.dim))
    letters[1][L.TOKEN] = 1.0
    positional = (
        (L.BIAS, Constant(1.0)),
        (L.SIGN, AlternatingSign()),
        (L.PE_INVQUAD, InverseQuadratic(alpha)),
        (L.PE_LNN, Telescope("ln_n", alpha)),
        (L.PE_TEMP, Telescope("temperature", alpha)),
        (L.PE_INV_N, Telescope("alpha_over_n", alpha)),
        (L.PE_INV_N2, Telescope("alpha2_over_n2", alpha)),
    )
    layers = (
        _layer_one(L, alpha),
        _layer_two(L, params.delta()),
        _layer_three(L),
    )
    return TransformerSpec(L.dim, layers, letters, positional)


def params_from_spec(spec):
    """Recover ``ConstructionParams`` from the alpha stored in the encodings."""
    for _, rule in spec.positional:
        if isinstance(rule, (InverseQuadratic, Telescope)):
            return ConstructionParams(alpha=rule.alpha, d=spec.d)
    raise ConfigurationError("spec carries no alpha-parameterised encoding")
