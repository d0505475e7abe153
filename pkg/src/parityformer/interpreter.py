"""Generic evaluator for softmax attention layers followed by ReLU networks.

A layer maps ``f_1..f_n`` to ``N(f_i + O a_i)`` where ``a_i`` is the
softmax(<K f_j, Q f_i>)-weighted average of the ``f_j``.  Nothing here knows
about parity; the construction only supplies weights and encodings.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import IndeterminateDecision
from .scalar import FLOAT64


def _as_matrix(values, rows=None, cols=None, name="matrix"):
    m = np.array(values, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional")
    if rows is not None and m.shape[0] != rows or cols is not None and m.shape[1] != cols:
        raise ValueError(f"{name} has shape {m.shape}, expected ({rows}, {cols})")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class AffineMap:
    matrix: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        b = np.array(self.bias, dtype=np.float64).reshape(-1)
        if b.shape[0] != m.shape[0]:
            raise ValueError("bias length must equal the number of matrix rows")
        b.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self):
        return self.matrix.shape[1]

    @property
    def out_dim(self):
        return self.matrix.shape[0]

    def __call__(self, rows, backend=FLOAT64):
        if backend is FLOAT64:
            return rows @ self.matrix.T + self.bias
        return rows.dot(backend.array(self.matrix).T) + backend.array(self.bias)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearNet:
    """Affine stages with ReLU between them (none after the last)."""

    stages: tuple

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise ValueError("a network needs at least one stage")
        for k in range(len(stages) - 1):
            if stages[k].out_dim != stages[k + 1].in_dim:
                raise ValueError(f"stage {k} output does not feed stage {k + 1}")
        if stages[0].in_dim != stages[-1].out_dim:
            raise ValueError("network must map R^d to R^d")
        object.__setattr__(self, "stages", stages)

    @property
    def dim(self):
        return self.stages[0].in_dim

    @classmethod
    def identity(cls, d):
        """Exact identity through one hidden layer: x = ReLU(x) - ReLU(-x)."""
        eye = np.eye(d)
        return cls((
            AffineMap(np.vstack([eye, -eye]), np.zeros(2 * d)),
            AffineMap(np.hstack([eye, -eye]), np.zeros(d)),
        ))

    def __call__(self, rows, backend=FLOAT64):
        x = rows
        last = len(self.stages) - 1
        for k, stage in enumerate(self.stages):
            x = stage(x, backend)
            if k != last:
                x = backend.relu(x)
        return x


@dataclass(frozen=True, eq=False)
class AttentionLayer:
    K: np.ndarray
    Q: np.ndarray
    O: np.ndarray
    mlp: PiecewiseLinearNet

    def __post_init__(self):
        d = self.mlp.dim
        for name in ("K", "Q", "O"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), d, d, name))

    @property
    def dim(self):
        return self.mlp.dim


@dataclass(frozen=True, eq=False)
class TransformerSpec:
    """A complete model: layers plus letter and positional encodings.

    ``positional`` pairs a coordinate index with a rule callable as
    ``rule(i, backend)``; coordinates without a rule are zero.  No field
    depends on the input length.
    """

    d: int
    layers: tuple
    letter_embedding: tuple
    positional: tuple = ()

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a transformer needs at least one layer")
        for k, layer in enumerate(layers):
            if layer.dim != self.d:
                raise ValueError(f"layer {k} has dimension {layer.dim}, expected {self.d}")
        letters = tuple(np.array(v, dtype=np.float64).reshape(-1) for v in self.letter_embedding)
        if len(letters) != 2 or any(v.shape[0] != self.d for v in letters):
            raise ValueError("letter embedding needs two vectors of length d")
        for v in letters:
            v.setflags(write=False)
        coords = [c for c, _ in self.positional]
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate positional coordinate")
        if any(not 0 <= c < self.d for c in coords):
            raise ValueError("positional coordinate out of range")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "letter_embedding", letters)
        object.__setattr__(self, "positional", tuple((int(c), r) for c, r in self.positional))
        # memo of float64 rows p(i), keyed by position only
        object.__setattr__(self, "_rows", {})

    def encode_position(self, i, backend=FLOAT64):
        """p(i) for any position i >= 1."""
        if i < 1:
            raise ValueError("positions start at 1")
        if backend is FLOAT64 and i in self._rows:
            return self._rows[i].copy()
        p = backend.zeros(self.d)
        for coord, rule in self.positional:
            p[coord] = rule(i, backend)
        if backend is FLOAT64:
            self._rows[i] = p.copy()
        return p

    def embed(self, bits, backend=FLOAT64):
        bits = parse_bits(bits)
        if backend is FLOAT64:
            n = len(bits)
            for i in range(1, n + 1):
                if i not in self._rows:
                    self.encode_position(i)
            pos = np.array([self._rows[i] for i in range(1, n + 1)]).reshape(n, self.d)
            letters = np.array(self.letter_embedding)
            return letters[list(bits)] + pos
        letters = [backend.array(v) for v in self.letter_embedding]
        rows = [letters[b] + self.encode_position(i, backend) for i, b in enumerate(bits, start=1)]
        out = np.empty((len(rows), self.d), dtype=object)
        for i, r in enumerate(rows):
            out[i] = r
        return out


class Decision(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass
class LayerRecord:
    scores: np.ndarray
    weights: np.ndarray
    mixed: np.ndarray
    output: np.ndarray


@dataclass
class RunTrace:
    embedded: np.ndarray
    layers: list = field(default_factory=list)

    @property
    def final(self):
        """g_1, the first output vector of the last layer."""
        return self.layers[-1].output[0]


@dataclass
class RunResult:
    decision: Decision
    margin: object
    trace: RunTrace

    @property
    def accepted(self):
        return self.decision is Decision.ACCEPT


def parse_bits(bits):
    """Accept ``"0110"`` or an iterable of 0/1 and return a tuple of ints."""
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"input must be a binary string, got {bits!r}")
        return tuple(int(ch) for ch in bits)
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ValueError("input bits must be 0 or 1")
    return out


def softmax_weights(scores, backend=FLOAT64):
    """Max-subtracted softmax; raises on empty or non-finite scores."""
    if backend is FLOAT64:
        scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    else:
        scores = np.asarray(scores, dtype=object).reshape(-1)
    return backend.softmax(scores)


def attention_scores(layer, seq, backend=FLOAT64):
    """n x n matrix whose (i, j) entry is <K f_j, Q f_i>."""
    _check_seq(layer, seq)
    if backend is FLOAT64:
        keys = seq @ layer.K.T
        queries = seq @ layer.Q.T
        return queries @ keys.T
    keys = seq.dot(backend.array(layer.K).T)
    queries = seq.dot(backend.array(layer.Q).T)
    return queries.dot(keys.T)


def _check_seq(layer, seq):
    if seq.ndim != 2 or seq.shape[1] != layer.dim:
        raise ValueError(f"dimension mismatch: sequence rows must have length {layer.dim}")
    if seq.shape[0] == 0:
        raise ValueError("empty sequence")


def attend(layer, seq, backend=FLOAT64):
    """a_1..a_n as an n x d array."""
    return _attend(layer, seq, backend)[2]


def _attend(layer, seq, backend):
    scores = attention_scores(layer, seq, backend)
    weights, mixed = backend.attention(scores, seq)
    return scores, weights, mixed


def apply_layer(layer, seq, backend=FLOAT64, record=None):
    scores, weights, mixed = _attend(layer, seq, backend)
    if backend is FLOAT64:
        routed = seq + mixed @ layer.O.T
    else:
        routed = seq + mixed.dot(backend.array(layer.O).T)
    out = layer.mlp(routed, backend)
    if record is not None:
        record.append(LayerRecord(scores, weights, mixed, out))
    return out


def run_transformer(spec, bits, backend=FLOAT64):
    """Embed, apply every layer, and read the sign of g_1^1."""
    bits = parse_bits(bits)
    if not bits:
        raise ValueError("empty input not in model scope")
    seq = spec.embed(bits, backend)
    trace = RunTrace(embedded=seq)
    for layer in spec.layers:
        seq = apply_layer(layer, seq, backend, record=trace.layers)
    value = seq[0, 0]
    if value > 0:
        decision = Decision.ACCEPT
    elif value < 0:
        decision = Decision.REJECT
    else:
        raise IndeterminateDecision(
            f"indeterminate decision: g_1^1 is exactly zero on {''.join(map(str, bits))}"
        )
    return RunResult(decision, abs(value), trace)
