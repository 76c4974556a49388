import json

import numpy as np
import pytest

from declat.cli import main


@pytest.fixture
def kuhn_file(tmp_path):
    path = tmp_path / "kuhn.mesh"
    assert main(["genmesh", "--kind", "kuhn", "--out", str(path)]) == 0
    return path


def test_genmesh_kinds(tmp_path):
    for kind in ("tet1", "kuhn", "annulus"):
        out = tmp_path / f"{kind}.mesh"
        assert main(["genmesh", "--kind", kind, "--out", str(out)]) == 0
        assert out.read_text().startswith("declat-mesh 1")
    out = tmp_path / "box.mesh"
    assert main(["genmesh", "--kind", "box", "--n", "2", "--out", str(out)]) == 0


def test_audit_clean_mesh_exit_zero(kuhn_file, tmp_path):
    out = tmp_path / "report.txt"
    assert main(["audit", "--mesh", str(kuhn_file), "--out", str(out)]) == 0
    assert "overall: PASS" in out.read_text()


def test_audit_json_flag(kuhn_file, tmp_path):
    out = tmp_path / "report.json"
    assert main(["audit", "--mesh", str(kuhn_file), "--json", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == "declat-audit-1" and payload["passed"]


def test_audit_corrupt_mesh_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.mesh"
    # Sliver-dominated mesh: the metric section fails its margin.
    from declat import generators
    from declat.mesh import write_mesh

    write_mesh(generators.sliver_mesh(delta=1e-13), bad)
    code = main(["audit", "--mesh", str(bad), "--json"])
    assert code == 1
    payload = json.loads(capsys.readouterr().out)
    failed = [
        c["name"]
        for s in payload["sections"]
        for c in s["checks"]
        if not c["passed"]
    ]
    assert failed  # the failing check is named


def test_assemble_writes_coo(kuhn_file, tmp_path):
    out = tmp_path / "h.coo"
    assert main(["assemble", "--mesh", str(kuhn_file), "--out", str(out)]) == 0
    assert out.read_text().startswith("declat-coo 19 19")


def test_simulate_trace_and_force(kuhn_file, tmp_path):
    out = tmp_path / "trace.csv"
    assert (
        main(
            ["simulate", "--mesh", str(kuhn_file), "--steps", "100",
             "--out", str(out), "--seed", "3"]
        )
        == 0
    )
    lines = out.read_text().splitlines()
    assert lines[0].startswith("step,time_s,H_total_J")
    assert len(lines) == 102  # header + steps + initial sample

    with pytest.raises(SystemExit):
        main(
            ["simulate", "--mesh", str(kuhn_file), "--steps", "10",
             "--dt", "100.0", "--out", str(out)]
        )


def test_simulate_deterministic(kuhn_file, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        main(
            ["simulate", "--mesh", str(kuhn_file), "--steps", "50",
             "--seed", "11", "--out", str(out)]
        )
    assert a.read_bytes() == b.read_bytes()


def test_eigen_json(kuhn_file, tmp_path):
    out = tmp_path / "modes.json"
    assert main(["eigen", "--mesh", str(kuhn_file), "--count", "1",
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == "declat-eigen-1"
    assert payload["zero_mode_count_certified"] == 0
    assert payload["nonzero_mode_count_certified"] == 1


def test_dof_exit_and_schema(tmp_path):
    ann = tmp_path / "ann.mesh"
    main(["genmesh", "--kind", "annulus", "--segments", "8", "--out", str(ann)])
    out = tmp_path / "dof.json"
    assert main(["dof", "--mesh", str(ann), "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["theta_E"] == payload["theta_B"]
    assert payload["harmonic_dimensions"]["h2_rel"] == 1


def test_pic_conservation_exit_zero(tmp_path):
    out = tmp_path / "cons.json"
    assert main(["pic", "--paths", "300", "--seed", "7", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["max_residual_relative"] <= 1e-12


def test_pml_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(
        ["pml", "--sweep", "--nx", "2", "--nz", "10", "--length", "2.5",
         "--pml-start", "1.5", "--window-lo", "0.9", "--window-hi", "1.4",
         "--omega-maxes", "0,6", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "omega,omega_max_profile,thickness,reflection_mag"
    assert len(lines) == 3
