import json

from mvtangent.cli.main import RunConfig, main, run


def _write(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_check_regular_reports_divisor(fixtures_dir, capsys):
    code = main(["check-regular", str(fixtures_dir / "bad_simplex.json")])
    out = capsys.readouterr()
    assert code == 1
    report = json.loads(out.out)
    assert report["ok"] is False
    assert "non-regular: elementary divisor 2" in report["checks"][0]["detail"]
    assert "non-regular: elementary divisor 2" in out.err


def test_check_outgoing_cusp(fixtures_dir, capsys):
    code = run(RunConfig(
        command="check-outgoing",
        inputs=[str(fixtures_dir / "cusp.json"), str(fixtures_dir / "cusp_cert.json")],
    ))
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert {c["id"]: c["ok"] for c in report["checks"]} == {"a": True, "b": True, "c": True, "d": True, "e": True}
    assert all(c["anchor"] for c in report["checks"])
    assert {c["id"]: c["anchor"] for c in report["checks"]}["e"] == "k-tangent"


def test_witness_then_verify(fixtures_dir, tmp_path, capsys):
    pair = tmp_path / "pair.json"
    assert main(["witness", str(fixtures_dir / "cusp_cert.json"), "--n", "2", "--out", str(pair)]) == 0
    doc = json.loads(pair.read_text())
    assert set(doc) == {"carrier", "f", "g", "certificate"}
    code = main(["verify-witness", str(pair), str(fixtures_dir / "cusp.json"), "--m-max", "64"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["refuted_up_to"] == 64
    assert len(report["refutations"]) == 64


def test_check_planar_emits_certificate(fixtures_dir, capsys):
    code = main(["check-planar", str(fixtures_dir / "cusp.json"), str(fixtures_dir / "cusp_planar.json")])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["certificate"]["lambda"] == ["1/2"]


def test_regularize_is_deterministic(fixtures_dir, tmp_path):
    src = _write(tmp_path / "k.json", {"cells": [json.loads((fixtures_dir / "bad_simplex.json").read_text())]})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["regularize", src, "--out", str(a)]) == 0
    assert main(["regularize", src, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["check-regular", str(a)]) == 0


def test_zmap_commands(tmp_path, capsys):
    hat = {
        "carrier": {"cells": [{"vertices": [["0"], ["1/2"]]}, {"vertices": [["1/2"], ["1"]]}]},
        "values": {"0": "0", "1": "1", "2": "0"},
    }
    zmap = _write(tmp_path / "hat.json", hat)
    assert main(["zero-set", zmap]) == 0
    zeros = json.loads(capsys.readouterr().out)
    assert zeros["generators"] == [{"vertices": [["0"]]}, {"vertices": [["1"]]}]

    upper = _write(tmp_path / "upper.json", {"generators": [{"vertices": [["1/2"], ["1"]]}]})
    assert main(["preimage", zmap, upper]) == 0
    pre = json.loads(capsys.readouterr().out)
    assert pre["generators"] == [{"vertices": [["1/4"], ["1/2"]]}, {"vertices": [["1/2"], ["3/4"]]}]

    ev = _write(tmp_path / "eval.json", {"zmap": hat, "points": [["1/4"], [0.3]]})
    assert main(["eval", ev]) == 0
    values = json.loads(capsys.readouterr().out)["values"]
    assert values[0] == ["1/2"]
    assert abs(values[1][0] - 0.6) < 1e-12

    assert main(["extend-zmap", zmap, "--mcnaughton"]) == 0
    pieces = json.loads(capsys.readouterr().out)["pieces"]
    assert [p["A"] for p in pieces] == [[[2]], [[-2]]]


def test_float_rational_is_a_schema_error(tmp_path, capsys):
    bad = _write(tmp_path / "s.json", {"vertices": [[0.5, 0], ["1", "0"]]})
    assert main(["check-regular", bad]) == 2
    err = capsys.readouterr().err
    assert "exact rational" in err and "vertices.0.0" in err


def test_broken_json_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "vertices": [\n', encoding="utf-8")
    assert main(["check-regular", str(path)]) == 2
    assert "line" in capsys.readouterr().err


def test_divisibility_error_exit_code(tmp_path, capsys):
    zmap = _write(tmp_path / "z.json", {
        "carrier": {"cells": [{"vertices": [["0"], ["1/2"]]}]},
        "values": {"0": "0", "1": "1/3"},
    })
    assert main(["extend-zmap", zmap]) == 2
    assert "den" in capsys.readouterr().err


def test_plot_cusp_svg(fixtures_dir, tmp_path):
    out = tmp_path / "cusp.svg"
    code = main(["plot2d", str(fixtures_dir / "cusp.json"), str(fixtures_dir / "cusp_cert.json"), "--out", str(out)])
    assert code == 0
    assert out.read_text().lstrip().startswith("<?xml")


def test_plot_refuses_3d_without_projection(fixtures_dir, tmp_path):
    cube = _write(tmp_path / "cube.json", json.loads((fixtures_dir / "projection.json").read_text())["eta"]["carrier"])
    out = tmp_path / "cube.svg"
    assert main(["plot2d", cube, "--out", str(out)]) == 2
    assert main(["plot2d", cube, "--out", str(out), "--force-projection"]) == 0
    assert out.exists()


def test_negative_tolerance_is_rejected(fixtures_dir, capsys):
    assert main(["check-regular", str(fixtures_dir / "bad_simplex.json"), "--tol", "-1"]) == 2


def test_tangent_simplex_faces_checked_on_the_chosen_generator(tmp_path, capsys):
    src = _write(tmp_path / "p.json", {
        "polyhedron": {"generators": [
            {"vertices": [["0", "0"], ["1", "0"], ["0", "1"]]},
            {"vertices": [["1/2", "0"], ["1", "1"]]},
        ]},
        "x": ["0", "0"],
        "frame": [["1", "0"]],
    })
    code = main(["tangent-simplex", src])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["generator"] == {"vertices": [["0", "0"], ["0", "1"], ["1", "0"]]}
    assert {c["id"]: c["ok"] for c in report["checks"]} == {"exists": True, "faces": True}
    assert all(c["anchor"] for c in report["checks"])


def test_tangent_simplex_missing_reports_negative(tmp_path, capsys):
    src = _write(tmp_path / "p.json", {
        "polyhedron": {"generators": [{"vertices": [["1/2", "0"], ["1", "1"]]}]},
        "x": ["0", "0"],
        "frame": [["1", "0"]],
    })
    assert main(["tangent-simplex", src]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["checks"][0]["anchor"] == "(x,u)-simplex"
