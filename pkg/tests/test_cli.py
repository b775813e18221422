import io
import json
import math
import subprocess
import sys

import pytest

from orliczmorrey.field import indicator_ball, log_field, save_field, uniform_grid
from orliczmorrey.harness.cli import main


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    text = out.getvalue()
    return code, (json.loads(text) if text.startswith("{") else text)


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    g = uniform_grid(1, 4.0, 4096)
    save_field(indicator_ball(g, 0.0, 1.0), d / "ball.csv")
    save_field(indicator_ball(g, 0.0, 1.0), d / "ball.okf")
    save_field(log_field(uniform_grid(1, 4.0, 512), 1 / 64), d / "b.csv")
    save_field(indicator_ball(uniform_grid(1, 4.0, 512), 0.0, 1.0), d / "f512.csv")
    spec = {"scenario": "riesz_boundedness", "seed": 2, "n": 1, "alpha": 0.25, "resolutions": [512, 1024]}
    (d / "spec.json").write_text(json.dumps(spec))
    return d


def test_spanne_exit_codes():
    assert run(["check", "spanne", "--p", "2", "--q", "4", "--lambda", "0.4", "--mu", "0.8", "--alpha", "0.25",
                "--n", "1"])[0] == 0
    assert run(["check", "spanne", "--p", "2", "--q", "4", "--lambda", "0.4", "--mu", "0.6", "--alpha", "0.25",
                "--n", "1"])[0] == 1
    assert run(["check", "spanne", "--p", "2", "--q", "2", "--lambda", "0.4", "--mu", "0.4", "--alpha", "0",
                "--n", "1"])[0] == 2
    assert run(["check", "spanne", "--p", "2"])[0] == 3


def test_luxemburg_matches_l2(files):
    code, rep = run(["norm", "luxemburg", "--phi", "power:2", "--field", str(files / "ball.csv")])
    assert code == 0
    assert rep["value"] == pytest.approx(math.sqrt(2), rel=1e-9)


def test_riesz_point_value(files):
    code, rep = run(["op", "riesz", "--alpha", "0.5", "--n", "1", "--field", str(files / "ball.okf"), "--at", "0"])
    assert code == 0
    assert rep["value"][0] == pytest.approx(4.0, rel=5e-3)


def test_riesz_dimension_mismatch(files):
    assert run(["op", "riesz", "--alpha", "0.5", "--n", "2", "--field", str(files / "ball.csv")])[0] == 3


def test_op_writes_output(files, tmp_path):
    out = tmp_path / "m.csv"
    code, rep = run(["op", "maximal", "--alpha", "0.5", "--field", str(files / "f512.csv"), "--out", str(out)])
    assert code == 0 and out.exists()
    assert rep["max"] == pytest.approx(math.sqrt(2), rel=0.01)


def test_commutator_cli(files):
    code, rep = run(["op", "commutator", "--alpha", "0.5", "--field", str(files / "f512.csv"),
                     "--b", str(files / "b.csv")])
    assert code == 0 and rep["shape"] == [512]


def test_hardy_cli():
    code, rep = run(["op", "hardy", "--w", "-2", "--t", "3"])
    assert code == 0
    assert rep["B"] == pytest.approx(1.0, abs=1e-6)
    assert rep["H_w g"][0] == pytest.approx(1 / 3)


def test_zygmund_cli():
    code, rep = run(["check", "zygmund", "--n", "1", "--model", "2", "4", "0.4", "0.8"])
    assert code == 0 and rep["constant"] == pytest.approx(20.0, rel=1e-6)
    assert run(["check", "zygmund", "--n", "1", "--model", "2", "4", "0.4", "0.6"])[0] == 1


def test_cianchi_cli():
    code, rep = run(["check", "cianchi", "--phi", "power:1", "--psi", '{"kind": "power", "p": 1.3333333333333333}',
                     "--alpha", "0.25", "--n", "1"])
    assert code == 0
    assert rep["strong"]["status"] != "holds"
    code, _ = run(["check", "cianchi", "--phi", "power:1", "--psi", "power:1.3333333333333333", "--alpha", "0.25",
                   "--n", "1", "--strong"])
    assert code in (1, 2)


def test_young_cli():
    code, rep = run(["young", "inspect", "--phi", "power:2", "--at", "2"])
    assert code == 0 and rep["eval"] == [4.0]
    code, rep = run(["young", "construct", "--phi", "power:1.5", "--p", "2", "--at", "1"])
    assert code == 0 and rep["value"][0] == pytest.approx(243 / 32, rel=5e-3)
    assert run(["young", "construct", "--phi", "power:2", "--p", "2"])[0] == 1
    assert run(["young", "indices", "--phi", "power:1"])[0] == 1
    assert run(["young", "inspect", "--phi", "cube:2"])[0] == 3


def test_usage_errors(capsys):
    assert run([])[0] == 3
    assert run(["norm", "bogus", "--field", "x.csv"])[0] == 3
    assert run(["norm", "luxemburg", "--field", "missing.csv"])[0] == 3
    assert "missing.csv" in capsys.readouterr().err


def test_malformed_spec_names_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"scenario": "riesz_boundedness", "resolutions": "many"}))
    assert run(["experiment", "run", str(p)])[0] == 3
    assert "resolutions" in capsys.readouterr().err


def test_experiment_and_report(files, tmp_path):
    out, csv, svg = tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "r.svg"
    code, _ = run(["experiment", "run", str(files / "spec.json"), "--out", str(out), "--csv", str(csv),
                   "--svg", str(svg)])
    assert code == 0
    assert csv.read_text().startswith("cells,constant")
    assert svg.read_text().startswith("<svg")
    code, text = run(["report", "render", str(out)])
    assert code == 0 and "riesz_boundedness" in text


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "orliczmorrey", "check", "spanne", "--p", "2", "--q", "4",
                          "--lambda", "0.4", "--mu", "0.8", "--alpha", "0.25", "--n", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["status"] == "holds"
