import json
import os
import subprocess
import sys

import pytest

from spherecong import cli
from spherecong.files import atomic_write_text


def run(tmp_path, command, cfg, *extra, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return cli.main([command, "--config", str(path), *extra])


def job(**kw):
    base = {"schema": 1, "grid": {"nu": 7, "nv": 7}, "output": "out"}
    base.update(kw)
    return base


def test_analyze_holo_curve(tmp_path):
    code = run(tmp_path, "analyze", job(surface="holo_curve_z2", grid={"nu": 21, "nv": 21},
                                       formats=["json", "csv", "obj"]))
    assert code == 0
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["residuals"]["superconformal_residual"]["max"] < 1e-10
    assert s["excluded"] == 0 and s["points"] == 441
    csv = (tmp_path / "out" / "points.csv").read_bytes()
    assert csv.startswith(b"u,v,") and b"\r" not in csv and csv.count(b"\n") == 442
    obj = (tmp_path / "out" / "surface.obj").read_text().splitlines()
    assert sum(line.startswith("v ") for line in obj) == 441
    assert sum(line.startswith("f ") for line in obj) == 400


def test_config_errors_name_field(tmp_path, capsys):
    assert run(tmp_path, "analyze", job(surface="holo_curve_z2", grid={"nu": 1, "nv": 5})) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["field"] == "grid.nu" and err["exit_code"] == 1
    assert run(tmp_path, "analyze", job(surface="holo_curve_z2", colour="red")) == 1
    assert json.loads(capsys.readouterr().err)["field"] == "colour"
    cases = [
        (dict(order=5), "order"),
        (dict(tolerances={"verify": -1.0}), "tolerances.verify"),
        (dict(tolerances={"speed": 1.0}), "tolerances.speed"),
        (dict(formats=["png"]), "formats"),
        (dict(schema=2), "schema"),
        (dict(surface="nope"), "surface"),
        (dict(surface="missing.surf"), "surface"),
        (dict(command="verify"), "command"),
        (dict(moebius=[{"kind": "inversion", "center": [0, 0, 0, 1], "radius": 0}]), "moebius[0].radius"),
    ]
    for override, fld in cases:
        cfg = job(surface="holo_curve_z2")
        cfg.update(override)
        assert run(tmp_path, "analyze", cfg) == 1, override
        assert json.loads(capsys.readouterr().err)["field"] == fld
    assert not (tmp_path / "out").exists()


def test_verify_torus_dual(tmp_path):
    code = run(tmp_path, "verify", job(surface="stereo_torus_r5", grid={"nu": 11, "nv": 11}, formats=["json", "csv"]))
    assert code == 0
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["failed"] == [] and all(v < 1e-6 for v in s["maxima"].values())
    assert (tmp_path / "out" / "verify.csv").exists()


def test_verify_failure_exit_3(tmp_path, capsys):
    # a partner that is not the dual fails the residuals
    code = run(tmp_path, "verify", job(surface="rouxel_generic_r4", partner="rouxel_enneper_r4"))
    assert code == 3
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["failed"]
    assert json.loads(capsys.readouterr().err.splitlines()[-1])["exit_code"] == 3


def test_coverage_failure_exit_2(tmp_path, capsys):
    # no point of a non-superconformal surface admits a dual
    assert run(tmp_path, "dual", job(surface="graph_generic_r5")) == 2
    assert json.loads(capsys.readouterr().err)["exit_code"] == 2
    assert not (tmp_path / "out").exists()


def test_classify_and_dual(tmp_path):
    assert run(tmp_path, "classify", job(surface="stereo_torus_r5", grid={"nu": 11, "nv": 11})) == 0
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["classification"]["kind"] == "InversionReflection"
    assert run(tmp_path, "dual", job(surface="inverted_isotropic_r6", formats=["json", "csv", "obj"],
                                     projection="pca")) == 0
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["diameter"] < 1e-6
    header = (tmp_path / "out" / "dual.csv").read_text().splitlines()[0]
    assert header == "u,v,x1,x2,x3,x4,x5,x6"
    assert len(s["projection"]["basis"]) == 3


def test_gallery_and_export(tmp_path):
    assert run(tmp_path, "gallery", {"schema": 1, "output": "g"}) == 0
    entries = json.loads((tmp_path / "g" / "gallery.json").read_text())
    assert {e["id"] for e in entries} >= {"stereo_torus_r5", "holo_curve_z2"}
    assert run(tmp_path, "export", job(surface="stereo_torus_r5")) == 0
    src = (tmp_path / "out" / "surface.surf").read_text()
    assert src.lstrip().startswith(("let", "domain", "["))
    # the exported file is a valid surface input
    assert run(tmp_path, "analyze", job(surface="out/surface.surf", output="again")) == 0


def test_moebius_maps_applied(tmp_path):
    cfg = job(surface="holo_curve_z2", moebius=[{"kind": "inversion", "center": [0, 0, 0, 3], "radius": 1.0}])
    assert run(tmp_path, "analyze", cfg) == 0
    s = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert s["residuals"]["superconformal_residual"]["max"] < 1e-8


@pytest.mark.parametrize("command,surface", [("analyze", "stereo_torus_r5"), ("verify", "stereo_torus_r5"),
                                             ("classify", "inverted_isotropic_r6")])
def test_deterministic_across_threads(tmp_path, command, surface):
    # theta vanishes on the diagonal of an n x n torus grid, so n must exceed 10
    outs = []
    for threads, d in (("1", "a"), ("1", "b"), ("4", "c")):
        cfg = job(surface=surface, grid={"nu": 11, "nv": 11})
        assert run(tmp_path, command, cfg, "--threads", threads, "--out", str(tmp_path / d)) == 0
        outs.append((tmp_path / d / "summary.json").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "x.json"
    atomic_write_text(target, "{}\n")
    atomic_write_text(target, "[]\n")
    assert target.read_text() == "[]\n"
    assert os.listdir(tmp_path) == ["x.json"]
    umask = os.umask(0)
    os.umask(umask)
    assert target.stat().st_mode & 0o777 == 0o666 & ~umask


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"schema": 1, "surface": "plane", "output": "o"}))
    r = subprocess.run([sys.executable, "-m", "spherecong", "export", "--config", str(cfg)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "o" / "surface.surf").read_text().strip().endswith("[u, v, 0, 0]")
