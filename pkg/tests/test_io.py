import copy
import io
import itertools
import json
import math

import pytest

from parityformer.errors import DocumentError
from parityformer.interpreter import run_transformer
from parityformer.io import deserialize_spec, dump_spec, load_spec, serialize_spec, trace_document
from parityformer.semantic import semantic_decide


@pytest.fixture(scope="module")
def doc(spec):
    return serialize_spec(spec)


def test_round_trip_is_behaviourally_identical(spec, doc):
    text = json.dumps(doc)
    again = deserialize_spec(json.loads(text))
    for n in range(1, 9):
        for bits in itertools.product((0, 1), repeat=n):
            a = run_transformer(spec, bits)
            b = run_transformer(again, bits)
            assert a.decision is b.decision
            assert a.margin == b.margin


def test_document_is_stable(spec, doc):
    assert serialize_spec(deserialize_spec(doc)) == doc
    buf1, buf2 = io.StringIO(), io.StringIO()
    dump_spec(spec, buf1)
    dump_spec(deserialize_spec(doc), buf2)
    assert buf1.getvalue() == buf2.getvalue()


def test_telescopes_are_symbolic(doc):
    rules = {e["params"].get("function") for e in doc["positional_encoding"] if e["rule"] == "telescope"}
    assert rules == {"ln_n", "temperature", "alpha_over_n", "alpha2_over_n2"}
    assert doc["alpha"] == "0.01"


def test_full_precision_numbers(doc):
    delta = doc["layers"][1]["Q"][15][1]
    assert delta == math.log(0.01)


def broken(doc, mutate):
    d = copy.deepcopy(doc)
    mutate(d)
    return d


def test_dim_mismatch_between_layers(doc):
    bad = broken(doc, lambda d: d["layers"][1].__setitem__("K", [[0.0] * 15] * 15))
    with pytest.raises(DocumentError, match=r"layers\[1\]\.K.*dim mismatch"):
        deserialize_spec(bad)


def test_unknown_telescope_name(doc):
    def mutate(d):
        entry = next(e for e in d["positional_encoding"] if e["rule"] == "telescope")
        entry["params"]["function"] = "sqrt_n"
    with pytest.raises(DocumentError, match=r"params\.function") as info:
        deserialize_spec(broken(doc, mutate))
    assert "sqrt_n" in str(info.value)


def test_unknown_schema_version(doc):
    with pytest.raises(DocumentError, match="schema"):
        deserialize_spec(broken(doc, lambda d: d.__setitem__("schema_version", "9")))


def test_duplicate_coordinate_rule(doc):
    def mutate(d):
        d["positional_encoding"].append(dict(d["positional_encoding"][0]))
    with pytest.raises(DocumentError, match="duplicate coordinate"):
        deserialize_spec(broken(doc, mutate))


def test_malformed_arrays(doc):
    with pytest.raises(DocumentError, match=r"layers\[0\]\.mlp\[0\]\.matrix"):
        deserialize_spec(broken(doc, lambda d: d["layers"][0]["mlp"][0].__setitem__("matrix", "oops")))
    with pytest.raises(DocumentError, match="missing field"):
        deserialize_spec(broken(doc, lambda d: d["layers"][2].pop("O")))


def test_load_spec_reports_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(DocumentError, match="invalid JSON"):
        load_spec(p)


def test_trace_document(spec):
    result = run_transformer(spec, "0110")
    _, sem = semantic_decide("0110")
    doc = json.loads(json.dumps(trace_document("0110", result, sem)))
    assert doc["input"] == "0110" and doc["decision"] == "accept"
    assert len(doc["layers"]) == 3
    for layer in doc["layers"]:
        for row in layer["weights"]:
            assert abs(math.fsum(row) - 1) <= 1e-9
    assert doc["semantic"]["sigma"] == 2
    assert len(doc["semantic"]["coeffs"]) == 4
