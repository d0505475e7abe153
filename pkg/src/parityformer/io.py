"""JSON documents for specs and run traces.

Floats are written with Python's shortest round-trip ``repr`` (the json
module's default), so a document reloads to bit-identical weights.
Telescoping encodings are stored by function name, never as value tables.
"""
from __future__ import annotations

import json

import numpy as np

from .encoding import RULE_TYPES, TELESCOPE_FUNCTIONS, AlternatingSign, Constant, InverseQuadratic, Telescope, alpha_text
from .errors import DocumentError
from .interpreter import AffineMap, AttentionLayer, PiecewiseLinearNet, TransformerSpec

SCHEMA_VERSION = "1"


def _floats(arr):
    return np.asarray(arr, dtype=np.float64).tolist()


def serialize_spec(spec):
    alpha = None
    for _, rule in spec.positional:
        if hasattr(rule, "alpha"):
            alpha = alpha_text(rule.alpha)
            break
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": spec.d,
        "alpha": alpha,
        "letter_embedding": [_floats(v) for v in spec.letter_embedding],
        "positional_encoding": [
            {"coordinate": coord, "rule": rule.tag, "params": rule.params()}
            for coord, rule in spec.positional
        ],
        "layers": [
            {
                "K": _floats(layer.K),
                "Q": _floats(layer.Q),
                "O": _floats(layer.O),
                "mlp": [{"matrix": _floats(s.matrix), "bias": _floats(s.bias)} for s in layer.mlp.stages],
            }
            for layer in spec.layers
        ],
    }


def _require(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise DocumentError(f"missing field {key!r}", where)
    return doc[key]


def _matrix(value, where, rows=None, cols=None):
    try:
        m = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise DocumentError("not a numeric array", where) from None
    if m.ndim != 2:
        raise DocumentError("expected a two-dimensional array", where)
    if rows is not None and m.shape != (rows, cols):
        raise DocumentError(f"dim mismatch: shape {m.shape[0]}x{m.shape[1]}, expected {rows}x{cols}", where)
    if not np.all(np.isfinite(m)):
        raise DocumentError("non-finite entry", where)
    return m


def _vector(value, where, length=None):
    try:
        v = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise DocumentError("not a numeric array", where) from None
    if v.ndim != 1 or (length is not None and v.shape[0] != length):
        raise DocumentError(f"expected a vector of length {length}", where)
    return v


def _rule(entry, where, default_alpha):
    tag = _require(entry, "rule", where)
    params = entry.get("params", {}) or {}
    if tag not in RULE_TYPES:
        raise DocumentError(f"unknown rule tag {tag!r}", f"{where}.rule")
    alpha = params.get("alpha", default_alpha)
    if tag == "constant":
        return Constant(float(_require(params, "value", f"{where}.params")))
    if tag == "alternating_sign":
        return AlternatingSign()
    if alpha is None:
        raise DocumentError("rule needs alpha", f"{where}.params.alpha")
    if tag == "inverse_quadratic":
        return InverseQuadratic(float(alpha))
    name = _require(params, "function", f"{where}.params")
    if name not in TELESCOPE_FUNCTIONS:
        raise DocumentError(
            f"unknown telescope function {name!r} (known: {', '.join(sorted(TELESCOPE_FUNCTIONS))})",
            f"{where}.params.function",
        )
    return Telescope(name, float(alpha))


def deserialize_spec(doc):
    version = _require(doc, "schema_version", "document")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unknown schema version {version!r}", "schema_version")
    d = _require(doc, "dim", "document")
    if not isinstance(d, int) or d < 1:
        raise DocumentError("dim must be a positive integer", "dim")
    default_alpha = doc.get("alpha")

    letters = _require(doc, "letter_embedding", "document")
    if not isinstance(letters, list) or len(letters) != 2:
        raise DocumentError("expected two letter vectors", "letter_embedding")
    letters = tuple(_vector(v, f"letter_embedding[{k}]", d) for k, v in enumerate(letters))

    positional = []
    seen = set()
    for k, entry in enumerate(_require(doc, "positional_encoding", "document")):
        where = f"positional_encoding[{k}]"
        coord = _require(entry, "coordinate", where)
        if not isinstance(coord, int) or not 0 <= coord < d:
            raise DocumentError(f"coordinate must be an integer in 0..{d - 1}", f"{where}.coordinate")
        if coord in seen:
            raise DocumentError(f"duplicate coordinate rule for coordinate {coord}", f"{where}.coordinate")
        seen.add(coord)
        positional.append((coord, _rule(entry, where, default_alpha)))

    layers = []
    raw_layers = _require(doc, "layers", "document")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise DocumentError("expected a non-empty list of layers", "layers")
    for k, raw in enumerate(raw_layers):
        where = f"layers[{k}]"
        K, Q, O = (_matrix(_require(raw, name, where), f"{where}.{name}", d, d) for name in ("K", "Q", "O"))
        stages = []
        raw_stages = _require(raw, "mlp", where)
        if not isinstance(raw_stages, list) or not raw_stages:
            raise DocumentError("expected a non-empty list of stages", f"{where}.mlp")
        prev = d
        for s, stage in enumerate(raw_stages):
            sw = f"{where}.mlp[{s}]"
            m = _matrix(_require(stage, "matrix", sw), f"{sw}.matrix")
            if m.shape[1] != prev:
                raise DocumentError(f"dim mismatch: stage takes {m.shape[1]} inputs, expected {prev}", f"{sw}.matrix")
            b = _vector(_require(stage, "bias", sw), f"{sw}.bias", m.shape[0])
            stages.append(AffineMap(m, b))
            prev = m.shape[0]
        if prev != d:
            raise DocumentError(f"dim mismatch: network outputs {prev} values, expected {d}", f"{where}.mlp")
        layers.append(AttentionLayer(K, Q, O, PiecewiseLinearNet(tuple(stages))))
    return TransformerSpec(d, tuple(layers), letters, tuple(positional))


def dump_spec(spec, fp):
    json.dump(serialize_spec(spec), fp, indent=1)
    fp.write("\n")


def load_spec(path):
    try:
        with open(path, encoding="utf-8") as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}", str(path)) from None
    return deserialize_spec(doc)


def _plain(x):
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x]
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None or isinstance(x, (int, str)):
        return x
    return float(x)


def trace_document(bits, result, semantic=None):
    """TraceDocument for one run; ``semantic`` is an optional SemanticTrace."""
    word = bits if isinstance(bits, str) else "".join(map(str, bits))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "input": word,
        "embedded": _plain(result.trace.embedded),
        "layers": [
            {
                "scores": _plain(rec.scores),
                "weights": _plain(rec.weights),
                "mixed": _plain(rec.mixed),
                "post": _plain(rec.output),
            }
            for rec in result.trace.layers
        ],
        "decision": result.decision.value,
        "margin": float(result.margin),
    }
    if semantic is not None:
        doc["semantic"] = {
            "n": semantic.n,
            "sigma": semantic.sigma,
            "lnn": _plain(semantic.lnn),
            "gamma": _plain(semantic.gamma),
            "coeffs": _plain(semantic.coeffs),
            "temperature": semantic.temperature,
            "theta": _plain(semantic.theta),
            "guard": _plain(semantic.guard),
            "final": _plain(semantic.final),
        }
    return doc
