import json
from pathlib import Path

import pytest

from src.noriq import formats
from src.noriq.exactlin import RatMatrix
from src.noriq.noriquiver import commutant
from src.noriq.pairtop import interval_pair, relative_cohomology

CIRCLE = {"vertices": ["0", "1"], "simplices": [["0", "1"]], "sub": [["0"], ["1"]]}
TWO_POINTS = {"vertices": ["x0", "x1"], "simplices": [["x0"], ["x1"]], "sub": [["x0"]]}


def _write(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_load_pair(tmp_path: Path):
    pair = formats.load_pair(_write(tmp_path / "circle.json", CIRCLE))
    assert pair == interval_pair()
    assert relative_cohomology(pair, 1).dim == 1


def test_parse_document_reports_json_position():
    with pytest.raises(formats.DocumentError) as excinfo:
        formats.parse_document('{"vertices": [', formats.PairDocument)
    assert "line 1" in str(excinfo.value)


def test_unknown_fields_are_rejected():
    payload = dict(CIRCLE, colour="red")
    with pytest.raises(formats.DocumentError):
        formats.parse_document(json.dumps(payload), formats.PairDocument)


def test_validation_error_names_the_field():
    payload = dict(CIRCLE, colour="red")
    with pytest.raises(formats.DocumentError, match="colour"):
        formats.parse_document(json.dumps(payload), formats.PairDocument)
    payload = dict(CIRCLE, simplices=[["0", 1.5]])
    with pytest.raises(formats.DocumentError, match=r"at simplices\.0\.1"):
        formats.parse_document(json.dumps(payload), formats.PairDocument)


def test_invalid_complex_becomes_document_error(tmp_path: Path):
    payload = {"vertices": ["a"], "simplices": [["a", "b"]], "sub": [["a"]]}
    with pytest.raises(formats.DocumentError):
        formats.load_pair(_write(tmp_path / "bad.json", payload))


def test_missing_file_is_document_error(tmp_path: Path):
    with pytest.raises(formats.DocumentError):
        formats.load_pair(tmp_path / "absent.json")


def test_load_map_resolves_relative_paths(tmp_path: Path):
    _write(tmp_path / "circle.json", CIRCLE)
    path = _write(
        tmp_path / "flip.json",
        {"source": "circle.json", "target": CIRCLE, "vertex_map": {"0": "1", "1": "0"}},
    )
    f = formats.load_map(path)
    assert f("0") == "1"
    with pytest.raises(formats.DocumentError):
        formats.load_map(_write(tmp_path / "short.json", {"source": CIRCLE, "target": CIRCLE, "vertex_map": {"0": "0"}}))


def test_matrices_must_be_exact():
    doc = {
        "objects": [{"id": "A", "dim": 1}],
        "morphisms": [{"id": "m", "kind": "a", "source": "A", "target": "A", "matrix": [[0.5]]}],
    }
    with pytest.raises(formats.DocumentError):
        formats.parse_document(json.dumps(doc), formats.QuiverDocument)
    assert formats.parse_matrix([["1/2", 3]]) == RatMatrix.from_rows([["1/2", 3]])


def test_object_needs_exactly_one_space():
    doc = {"objects": [{"id": "A", "dim": 1, "pair": CIRCLE}]}
    with pytest.raises(formats.DocumentError):
        formats.parse_document(json.dumps(doc), formats.QuiverDocument)


def test_duplicate_ids_are_rejected():
    doc = {"objects": [{"id": "A", "dim": 1}, {"id": "A", "dim": 2}]}
    with pytest.raises(formats.DocumentError):
        formats.parse_document(json.dumps(doc), formats.QuiverDocument)


def test_quiver_with_zigzag_defaults(tmp_path: Path):
    doc = {
        "objects": [{"id": "S", "degree": 1, "pair": CIRCLE}],
        "morphisms": [
            {
                "id": "flip",
                "kind": "a",
                "source": "S",
                "target": "S",
                "zigzag": [{"direction": "forward", "map": {"vertex_map": {"0": "1", "1": "0"}}}],
            }
        ],
    }
    rep = formats.load_quiver(_write(tmp_path / "quiver.json", doc))
    assert rep.rho["flip"] == RatMatrix.from_rows([[-1]])


def test_quiver_with_circle_twist(tmp_path: Path):
    doc = {
        "objects": [
            {"id": "P", "pair": TWO_POINTS},
            {"id": "SP", "degree": 1, "twist": 1, "circle_twist_of": "P"},
        ],
        "morphisms": [{"id": "c", "kind": "c", "source": "SP", "target": "P"}],
    }
    rep = formats.load_quiver(_write(tmp_path / "quiver.json", doc))
    assert rep.rho["c"].is_invertible()
    assert rep.twists == [0, 1]


def test_quiver_rejects_unknown_endpoints(tmp_path: Path):
    doc = {
        "objects": [{"id": "A", "dim": 1}],
        "morphisms": [{"id": "m", "kind": "a", "source": "A", "target": "B", "matrix": [[1]]}],
    }
    with pytest.raises(formats.DocumentError):
        formats.load_quiver(_write(tmp_path / "quiver.json", doc))


def test_load_module_variants(tmp_path: Path):
    doc = {
        "objects": [{"id": "A", "dim": 1}],
        "morphisms": [],
    }
    c = commutant(formats.load_quiver(_write(tmp_path / "quiver.json", doc)))
    assert formats.load_module("regular", c).dim == 1
    assert formats.load_module("zero", c).dim == 0
    explicit = _write(tmp_path / "module.json", {"kind": "explicit", "dim": 2, "action": [[[1, 0], [0, 1]]]})
    assert formats.load_module(str(explicit), c).dim == 2
    broken = _write(tmp_path / "broken.json", {"kind": "explicit", "dim": 1, "action": [[[2]]]})
    with pytest.raises(formats.DocumentError):
        formats.load_module(str(broken), c)


def test_load_manifest_checks_entries(tmp_path: Path):
    _write(tmp_path / "circle.json", CIRCLE)
    manifest = _write(
        tmp_path / "manifest.json",
        {"version": "1", "entries": [{"name": "circle", "kind": "pair", "path": "circle.json"}]},
    )
    doc, resolved = formats.load_manifest(manifest)
    assert doc.entries[0].kind == "pair"
    assert resolved["circle"] == tmp_path / "circle.json"

    _write(
        manifest,
        {"version": "1", "entries": [{"name": "gone", "kind": "pair", "path": "gone.json"}]},
    )
    with pytest.raises(formats.DocumentError):
        formats.load_manifest(manifest)


def test_pair_document_round_trip(tmp_path: Path):
    pair = interval_pair()
    text = formats.dump_document(formats.pair_document(pair))
    path = tmp_path / "out.json"
    path.write_text(text, encoding="utf-8")
    assert formats.load_pair(path) == pair
    assert formats.matrix_rows(RatMatrix.from_rows([["1/2", 1]])) == [["1/2", "1"]]
