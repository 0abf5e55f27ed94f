import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from h3flat import halg
from h3flat.cli import build_parser, main, parse_complex, parse_size
from h3flat.io import (DocumentError, caustic_mesh, obj_text, read_json, read_obj_vertices,
                       surface_document, surface_from_document, surface_mesh, validate_document)

from conftest import flat_surface


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.fixture(scope="module")
def power_doc(tmp_path_factory):
    path = tmp_path_factory.mktemp("docs") / "power.json"
    assert main(["gen", "power", "--gamma", "4/3", "--size", "15", "--lambda", "0.01",
                 "-o", str(path)]) == 0
    return path


def test_flag_parsers():
    assert parse_complex("0.3i") == 0.3j
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("3*I/10") == pytest.approx(0.3j)
    assert parse_size("15") == (15, 15) and parse_size("20x40") == (20, 40)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["gen", "power", "--gamma", "four"])


def test_round_trip_is_bit_exact(power15):
    doc = json.loads(json.dumps(surface_document(power15, {"kind": "power"})))
    back = surface_from_document(doc)
    assert np.array_equal(back.f, power15.f) and np.array_equal(back.N, power15.N)
    assert np.array_equal(back.frame.matrices, power15.frame.matrices)
    assert np.array_equal(back.g.values, power15.g.values)
    assert back.kind == power15.kind and back.lam == power15.lam


@settings(max_examples=50)
@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300))
def test_json_float_round_trip(x):
    s = flat_surface("linear", 2)
    doc = surface_document(s)
    doc["vertices"][0][0][1] = x
    assert json.loads(json.dumps(doc))["vertices"][0][0][1] == x


def test_schema_error_names_field(power15):
    doc = surface_document(power15)
    doc["vertices"][3][2] = [1.0, 2.0]
    with pytest.raises(DocumentError) as exc:
        validate_document(doc)
    assert exc.value.path == "/vertices/3/2"
    doc = surface_document(power15)
    doc["kind"] = "minimal"
    with pytest.raises(DocumentError, match="/kind"):
        validate_document(doc)
    doc = surface_document(power15)
    doc["alpha_h"] = doc["alpha_h"][:-1]
    with pytest.raises(DocumentError, match="/alpha_h"):
        validate_document(doc)


def test_obj_coordinates_exact(power15):
    mesh = surface_mesh(power15, "poincare")
    text = obj_text([mesh])
    assert np.array_equal(read_obj_vertices(text), mesh.vertices)
    faces = [ln for ln in text.splitlines() if ln.startswith("f ")]
    assert len(faces) == 2 * 14 * 14
    assert faces[0] == "f 1 16 17" and faces[1] == "f 1 17 2"


def test_klein_export_of_geodesic_is_straight(tmp_path, capsys):
    x = halg.from_klein(np.array([0.1, -0.2, 0.3]))
    v = np.array([0.3, 0.5, -0.2, 0.1])
    v = v + halg.minkowski(v, x) * x
    v = v / np.sqrt(halg.mnorm2(v))
    pts = halg.geodesic_point(x, v, np.array([0.0, 0.7, 1.9]))
    doc = tmp_path / "pts.json"
    doc.write_text(json.dumps({"format_version": 1, "type": "points", "vertices": pts.tolist()}))
    out = tmp_path / "geo.obj"
    assert run(capsys, "export", doc, "--model", "klein", "-o", out)[0] == 0
    a, b, c = read_obj_vertices(out.read_text())
    assert np.linalg.norm(np.cross(b - a, c - a)) < 1e-14


def test_base_point_exports_origin(tmp_path, capsys):
    doc = tmp_path / "bp.json"
    doc.write_text(json.dumps({"format_version": 1, "type": "points", "vertices": [[1, 0, 0, 0]]}))
    out = tmp_path / "bp.obj"
    assert run(capsys, "export", doc, "-o", out)[0] == 0
    assert np.array_equal(read_obj_vertices(out.read_text()), [[0, 0, 0]])
    doc.write_text(json.dumps({"format_version": 1, "type": "points", "vertices": [[2, 0, 0, 0]]}))
    rc, _, err = run(capsys, "export", doc, "-o", out)
    assert rc == 2 and "/vertices" in err


def test_gen_is_deterministic(power_doc, tmp_path):
    other = tmp_path / "again.json"
    assert main(["gen", "power", "--gamma", "4/3", "--size", "15", "--lambda", "0.01",
                 "-o", str(other)]) == 0
    assert other.read_text() == power_doc.read_text()


def test_verify_power_all_pass(power_doc, capsys):
    rc, out, _ = run(capsys, "verify", power_doc)
    report = json.loads(out)
    assert rc == 0 and report["ok"]
    for name, suite in report["suites"].items():
        assert suite["status"] == "pass", name


def test_verify_respects_env_tolerance(power_doc, capsys, monkeypatch):
    monkeypatch.setenv("H3FLAT_TOL", "1e-30")
    rc, out, _ = run(capsys, "verify", power_doc)
    assert rc == 1 and json.loads(out)["tol"] == 1e-30
    monkeypatch.setenv("H3FLAT_TOL", "abc")
    assert run(capsys, "verify", power_doc)[0] == 2
    rc, out, _ = run(capsys, "verify", power_doc, "--tol", "1e-6")
    assert rc == 0


def test_verify_rejects_bad_document(tmp_path, capsys, power_doc):
    doc = read_json(power_doc)
    doc["lambda"] = "x"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    rc, _, err = run(capsys, "verify", bad)
    assert rc == 2 and "/lambda" in err
    bad.write_text("{")
    assert run(capsys, "verify", bad)[0] == 2
    assert run(capsys, "verify", tmp_path / "missing.json")[0] == 2


def test_gen_invalid_parameters(capsys):
    assert run(capsys, "gen", "power", "--size", "5")[0] == 2
    assert run(capsys, "gen", "exp", "--size", "5")[0] == 2
    assert run(capsys, "gen", "spline")[0] == 2
    assert run(capsys, "gen", "power", "--gamma", "4/3", "--t", "2")[0] == 2


def test_gen_variants(tmp_path, capsys):
    for argv, kind in ((["exp", "--c", "0.3i", "--size", "20x40"], "flat"),
                       (["fixture:exa9pt1", "--lambda", "0.01"], "flat"),
                       (["linear", "--size", "6", "--t", "1"], "cmc1"),
                       (["linear", "--size", "6", "--t", "1/2"], "weingarten")):
        out = tmp_path / "x.json"
        assert run(capsys, "gen", *argv, "-o", out)[0] == 0
        assert surface_from_document(read_json(out)).kind == kind


@pytest.mark.parametrize("jobs", [1, 3])
def test_family_sweep(power_doc, tmp_path, capsys, jobs):
    rc, out, _ = run(capsys, "family", power_doc, "--t", "0,0.25,0.5,0.75,1",
                     "--out-dir", tmp_path, "--jobs", jobs)
    assert rc == 0
    paths = out.split()
    assert len(paths) == 5
    kinds = [surface_from_document(read_json(p)).kind for p in paths]
    assert kinds == ["flat", "weingarten", "weingarten", "weingarten", "cmc1"]
    ts = [surface_from_document(read_json(p)).t for p in paths]
    assert ts == [0, 0.25, 0.5, 0.75, 1]


def test_family_parallel_and_errors(power_doc, tmp_path, capsys):
    rc, out, _ = run(capsys, "family", power_doc, "--d", "0.5,2", "--out-dir", tmp_path)
    assert rc == 0
    assert [surface_from_document(read_json(p)).d for p in out.split()] == [0.5, 2.0]
    assert run(capsys, "family", power_doc, "--out-dir", tmp_path)[0] == 2


def test_caustic_document(power_doc, capsys):
    rc, out, _ = run(capsys, "caustic", power_doc, "-a", "0")
    doc = json.loads(out)
    assert rc == 0 and doc["type"] == "caustic" and doc["a"] == 0
    assert max(doc["checks"]["lift_vs_focal"].values()) < 1e-10
    assert np.shape(doc["points"]) == (15, 14, 4)


def test_singular_on_fixtures(tmp_path, capsys):
    hour = tmp_path / "hour.json"
    assert run(capsys, "gen", "exp", "--c", "0.3", "--size", "20x40", "-o", hour)[0] == 0
    rc, out, err = run(capsys, "singular", hour, "--d", "1")
    assert rc == 0 and "skipped: hypotheses violated" in err
    assert json.loads(out)["suites"]["valence"]["status"] == "skipped: hypotheses violated"
    exa = tmp_path / "exa.json"
    assert run(capsys, "gen", "fixture:exa9pt1", "-o", exa)[0] == 0
    rc, out, err = run(capsys, "singular", exa, "--d", "1/10")
    doc = json.loads(out)
    assert rc == 0 and len(doc["nodes"]) == 1 and not doc["segments"]
    assert run(capsys, "singular", exa, "--d", "0")[0] == 2


def test_snowman_export_with_caustic(tmp_path, capsys):
    snow = tmp_path / "snow.json"
    assert run(capsys, "gen", "exp", "--c", "0.3i", "--size", "20x40", "-o", snow)[0] == 0
    rc, out, _ = run(capsys, "verify", snow, "--d", "1.1")
    assert rc == 0 and json.loads(out)["suites"]["valence"]["status"] == "pass"
    obj = tmp_path / "snow.obj"
    assert run(capsys, "export", snow, "--with-caustic", "-o", obj)[0] == 0
    text = obj.read_text()
    assert [ln for ln in text.splitlines() if ln.startswith("o ")] == ["o surface", "o caustic"]
    assert len(read_obj_vertices(text)) == 20 * 40 + 20 * 39
    assert np.all(np.linalg.norm(read_obj_vertices(text), axis=1) < 1)


def test_caustic_mesh_drops_collapsed_corners(power15):
    from h3flat.caustics import build_caustic, caustic_faces
    c = build_caustic(power15, with_normals=False)
    mesh = caustic_mesh(c, caustic_faces(c, power15))
    assert any(len(f) == 3 for f in mesh.faces)
    assert all("degenerate" in fl for f, fl in zip(mesh.faces, mesh.flags) if len(f) == 3)
