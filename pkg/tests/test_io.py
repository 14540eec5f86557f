import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jspec.algebra import ExactComplex, MultiPoly
from jspec.criteria import AnalysisOptions, analyze
from jspec.io import (
    TupleFileError,
    emit_tuple,
    load_tuple_dict,
    parse_tuple,
    poly_from_dict,
    poly_to_dict,
    report_to_dict,
    tuple_to_dict,
)
from jspec.pencil import make_tuple

from conftest import exact_matrices, fixture_path


def _doc(matrices, entries="exact", **kw):
    N = len(matrices[0])
    return {"format": "jspec-tuple", "version": "v1", "n": len(matrices), "N": N,
            "entries": entries, "matrices": matrices, **kw}


@given(exact_matrices(2), exact_matrices(2))
def test_exact_roundtrip(A, B):
    t = make_tuple([A, B])
    back = load_tuple_dict(json.loads(emit_tuple(t)))
    assert back.exact and back.shift == t.shift
    for M, R in zip(t.unshifted().matrices, back.unshifted().matrices):
        assert M.tolist() == R.tolist()


@given(st.integers(0, 10_000))
def test_float_roundtrip_is_bitwise(seed):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(2)]
    t = make_tuple(mats, exact=False)
    back = load_tuple_dict(json.loads(emit_tuple(t)))
    assert not back.exact
    for M, R in zip(mats, back.unshifted().float_matrices()):
        assert np.array_equal(M, R)


def test_fixtures_load_with_declared_modes(load):
    t = load("idempotent_pair")
    assert t.exact and not t.selfadjoint and (t.n, t.N) == (2, 2)
    t = load("line_conic")
    assert t.exact and t.selfadjoint
    assert t.unshifted().matrices[1][2, 2] == ExactComplex.parse("1/2")
    assert not load("reflection_pair").exact


def test_emitted_fixture_reproduces_file(load):
    t = load("idempotent_pair")
    data = json.loads(fixture_path("idempotent_pair").read_text())
    emitted = json.loads(emit_tuple(t, name="idempotent_pair", extra={"description": data["description"]}))
    assert emitted == data


@pytest.mark.parametrize(
    "doc, fragment",
    [
        (_doc([[["1", "2", "3"], ["4", "5", "6"]]]), r"matrices\[0\]: row 0 has 3 entries, expected 2 \(matrix 1 is not square\)"),
        (_doc([[["1", "0"], ["0", "1"]], [["1", "2", "3"], ["4", "5", "6"]]]), r"matrices\[1\].*matrix 2 is not square"),
        (_doc([[["1", "x/2"], ["0", "1"]]]), r"matrices\[0\]\[0\]\[1\]: invalid rational string"),
        (_doc([[[1.5, 0], [0, 1]]]), r"matrices\[0\]\[0\]\[0\]: exact entries must be rational strings"),
        (_doc([[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]], entries="float"), None),
        (_doc([[[1, 0], [0, 1]]], entries="float"), None),
        (_doc([[[1, 0], [0, 1]]]), None),
        (_doc([[["1", 0], [0, 1]]], entries="float"), r"float entries must be \[re, im\] pairs"),
        (_doc([[["1", "0"], ["0", "1"]]], entries="decimal"), "entries"),
        (_doc([[["1", "i"], ["0", "1"]]], selfadjoint=True), "not Hermitian"),
        ({**_doc([[["1"]]]), "version": "v2"}, "version"),
        ({**_doc([[["1"]]]), "n": 2}, "n: declared 2"),
        ({**_doc([[["1"]]]), "format": "other"}, "format"),
        ([1, 2], "JSON object"),
    ],
)
def test_tuple_errors_name_the_field(doc, fragment):
    if fragment is None:
        assert load_tuple_dict(doc).N == 2  # integers and bare reals are lossless
        return
    with pytest.raises(TupleFileError, match=fragment):
        load_tuple_dict(doc)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "format": "jspec-tuple",\n  "matrices": [1,,2]\n}')
    with pytest.raises(TupleFileError, match=r"bad\.json: malformed JSON at line 3, column"):
        parse_tuple(p)
    with pytest.raises(TupleFileError, match="missing"):
        parse_tuple(tmp_path / "missing.json")


def test_poly_dict_roundtrip():
    x = [MultiPoly.variable(3, i) for i in range(3)]
    p = (x[0] + x[1] * ExactComplex.parse("1/2-i")) * x[2] - x[2] ** 2
    assert poly_from_dict(poly_to_dict(p), 3) == p
    pf = p.to_float()
    assert poly_from_dict(json.loads(json.dumps(poly_to_dict(pf))), 3).allclose(pf, rtol=0)


def test_tuple_dict_is_unshifted(load):
    t = load("idempotent_pair")
    assert t.shift > 0
    assert tuple_to_dict(t)["matrices"][0] == [["1", "1"], ["0", "0"]]


def test_report_is_reproducible_apart_from_timing(load):
    t = load("block_idempotent_pair")
    a = report_to_dict(analyze(t, AnalysisOptions(seed=4)), timing=False)
    b = report_to_dict(analyze(t, AnalysisOptions(seed=4)), timing=False)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    full = report_to_dict(analyze(t, AnalysisOptions(seed=4)))
    assert "timing" in full and "timing" not in a
    assert min(c["id"] for c in a["decomposition"]["components"]) == 1
