import json

import numpy as np
import pytest

from freecalc.errors import ValidationError
from freecalc.freepoly import FreePoly, PolyMatrix, diag_delta, gap_delta
from freecalc.funcalc import CalcParams, sharp
from freecalc.matrix_core import ComplexMatrix, MatrixTuple, random_matrix, random_tuple, task_rng
from freecalc.realization import poly_to_colligation, random_isometric
from freecalc.serialize import (
    decode_any,
    decode_colligation,
    decode_job,
    decode_matrix,
    decode_params,
    decode_poly,
    decode_polymatrix,
    decode_tuple,
    detect_kind,
    dumps_canonical,
    encode,
    load_path,
    loads,
)
from freecalc.spectral import SampleConfig, sup_norm_estimate


def _roundtrip(obj, decoder):
    text = dumps_canonical(obj)
    return decoder(json.loads(text)), text


def test_matrix_roundtrip_is_bit_exact():
    a = ComplexMatrix(random_matrix(3, 4, task_rng(0, 1)))
    back, text = _roundtrip(a, decode_matrix)
    assert back == a  # array_equal: every bit of every float survives
    assert text.endswith("\n")
    # canonical text is a fixed point of decode + re-encode
    assert dumps_canonical(back) == text


def test_matrix_key_order_is_sorted():
    text = dumps_canonical(ComplexMatrix(np.eye(2)))
    assert text.index('"cols"') < text.index('"data"') < text.index('"rows"')


def test_tuple_roundtrip():
    x = random_tuple(3, 2, 0.9, 5)
    back, text = _roundtrip(x, decode_tuple)
    assert back == x
    assert dumps_canonical(back) == text


def test_poly_roundtrip_preserves_canonical_order():
    p = FreePoly(2, {(2, 1): 1.5 - 0.5j, (1,): 2.0, (): -1.0, (1, 1): 0.25})
    back, text = _roundtrip(p, decode_poly)
    assert back == p
    payload = json.loads(text)
    words = [tuple(t["word"]) for t in payload["terms"]]
    assert words == [(), (1,), (1, 1), (2, 1)]


def test_polymatrix_roundtrip():
    delta = gap_delta(0.1)
    back, text = _roundtrip(delta, decode_polymatrix)
    assert back == delta
    assert dumps_canonical(back) == text


def test_colligation_roundtrip_both_flag_states():
    iso = random_isometric(2, 2, 2, 1, 1, 3)
    back, _ = _roundtrip(iso, decode_colligation)
    assert back == iso and back.isometric_certified
    plain = poly_to_colligation(FreePoly(1, {(1, 1): 2.0}), 1, 1)
    back2, _ = _roundtrip(plain, decode_colligation)
    assert back2 == plain and not back2.isometric_certified


def test_flag_lie_is_rejected():
    iso = random_isometric(2, 2, 2, 1, 1, 4)
    payload = encode(iso)
    payload["isometric_certified"] = False
    with pytest.raises(ValidationError, match="contradicts"):
        decode_colligation(payload)


def test_detect_kind_on_every_document_type():
    samples = {
        "matrix": encode(ComplexMatrix(np.eye(2))),
        "tuple": encode(random_tuple(2, 2, 0.5, 1)),
        "freepoly": encode(FreePoly.letter(1, 2)),
        "polymatrix": encode(diag_delta(2)),
        "colligation": encode(random_isometric(1, 1, 1, 1, 1, 0)),
    }
    for kind, payload in samples.items():
        assert detect_kind(payload) == kind
        decoded = decode_any(payload)
        assert decoded is not None
    with pytest.raises(ValidationError, match="unrecognized"):
        detect_kind({"foo": 1})


def test_job_roundtrip_and_detection():
    F = random_isometric(2, 2, 1, 1, 1, 6)
    delta = diag_delta(2)
    T = random_tuple(2, 2, 0.6, 7)
    job = {
        "F": encode(F),
        "delta": encode(delta),
        "T": encode(T),
        "params": {"s": 1.0, "tol": 1e-10},
    }
    assert detect_kind(job) == "job"
    parts = decode_job(job)
    assert parts["F"] == F and parts["delta"] == delta and parts["T"] == T
    assert parts["params"].s == 1.0
    # params are optional and default when absent
    bare = decode_job({"F": encode(F), "delta": encode(delta), "T": encode(T)})
    assert bare["params"] == CalcParams()
    # the decoded job actually runs
    rep = sharp(parts["F"], parts["delta"], parts["T"], parts["params"])
    assert rep.ok


def test_loads_reports_syntax_position():
    with pytest.raises(ValidationError) as exc_info:
        loads('{"rows": 1,\n "cols": }')
    err = exc_info.value
    assert "invalid JSON" in str(err)
    assert err.line == 2
    assert err.col is not None


def test_load_path(tmp_path):
    x = random_tuple(2, 3, 0.4, 9)
    f = tmp_path / "point.json"
    f.write_text(dumps_canonical(x), encoding="utf-8")
    assert load_path(str(f)) == x


def test_error_paths_name_the_location():
    bad = encode(random_tuple(2, 2, 0.5, 10))
    bad["coords"][1]["rows"] = 3
    with pytest.raises(ValidationError, match=r"\$\.coords\[1\]"):
        decode_tuple(bad)
    with pytest.raises(ValidationError, match="missing key"):
        decode_matrix({"rows": 1, "cols": 1})
    with pytest.raises(ValidationError, match="unknown key"):
        decode_matrix({"rows": 1, "cols": 1, "data": [[0.0, 0.0]], "extra": 1})
    with pytest.raises(ValidationError, match="2-array"):
        decode_matrix({"rows": 1, "cols": 1, "data": [[1.0, 0.0, 0.0]]})
    with pytest.raises(ValidationError, match="1 element"):
        decode_matrix({"rows": 1, "cols": 1, "data": []})


def test_colligation_block_shape_error_names_the_block():
    F = random_isometric(2, 2, 1, 1, 1, 11)
    payload = encode(F)
    payload["C"] = encode(ComplexMatrix(np.zeros((1, 1))))
    with pytest.raises(ValidationError, match=r"block C is 1x1, expected 2x1"):
        decode_colligation(payload)


def test_poly_canonical_form_enforced():
    base = {"d": 2, "terms": [{"word": [1], "coeff": [1.0, 0.0]}]}
    decode_poly(base)  # sanity: the well-formed document passes
    with pytest.raises(ValidationError, match="zero coefficient"):
        decode_poly({"d": 2, "terms": [{"word": [1], "coeff": [0.0, 0.0]}]})
    with pytest.raises(ValidationError, match="duplicate word"):
        decode_poly(
            {
                "d": 2,
                "terms": [
                    {"word": [1], "coeff": [1.0, 0.0]},
                    {"word": [1], "coeff": [2.0, 0.0]},
                ],
            }
        )
    with pytest.raises(ValidationError, match="canonical"):
        decode_poly(
            {
                "d": 2,
                "terms": [
                    {"word": [1, 1], "coeff": [1.0, 0.0]},
                    {"word": [2], "coeff": [1.0, 0.0]},
                ],
            }
        )
    with pytest.raises(ValidationError, match="outside alphabet"):
        decode_poly({"d": 2, "terms": [{"word": [3], "coeff": [1.0, 0.0]}]})


def test_non_finite_numbers_rejected():
    # python's json parser accepts bare NaN; the decoder must not
    with pytest.raises(ValidationError, match="finite"):
        loads('{"rows": 1, "cols": 1, "data": [[NaN, 0.0]]}')


def test_params_decoding():
    assert decode_params({}) == CalcParams()
    p = decode_params({"s": 0.5, "tol": 1e-8, "max_terms": 50})
    assert (p.s, p.tol, p.max_terms) == (0.5, 1e-8, 50)
    assert decode_params({"s": None}).s is None
    with pytest.raises(ValidationError):
        decode_params({"tol": "tight"})
    with pytest.raises(ValidationError, match="\\(0, 1\\]"):
        decode_params({"s": 2.0})
    with pytest.raises(ValidationError, match="max_terms"):
        decode_params({"max_terms": 0})


def test_reports_serialize_to_plain_json():
    F = random_isometric(1, 1, 2, 1, 1, 12)
    from freecalc.freepoly import row_delta

    rep = sharp(F, row_delta(1), random_tuple(2, 1, 0.5, 13), CalcParams(s=1.0))
    payload = json.loads(dumps_canonical(rep))
    assert payload["ok"] is True
    assert isinstance(payload["certificates"], list)
    cfg = SampleConfig(levels=(1,), trials_per_level=5, ascent_steps=0)
    srep = sup_norm_estimate(FreePoly.letter(1, 1), row_delta(1), cfg)
    spayload = json.loads(dumps_canonical(srep))
    assert spayload["kind"] == "sup_norm"
    assert spayload["config"]["levels"] == [1]
    assert spayload["witness"]["n"] == 1


def test_mixed_alphabets_rejected_in_polymatrix():
    good = encode(diag_delta(2))
    good["entries"][0][0]["d"] = 3
    with pytest.raises(ValidationError, match="alphabet"):
        decode_polymatrix(good)
