import json
import subprocess
import sys

from cuspfields.cli import _strip_json, main
from cuspfields.etaforms import corpus_form


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run(argv + ["--json"], capsys)
    return code, json.loads(out), out


def test_cusps_level20(capsys):
    code, doc, _ = run_json(["cusps", "--level", "20"], capsys)
    assert code == 0 and len(doc["cusps"]) == 6
    assert sum(c["width"] for c in doc["cusps"]) == 36
    code, out, _ = run(["cusps", "--level", "20"], capsys)
    assert len(out.strip().splitlines()) == 7


def test_bound(capsys):
    code, doc, _ = run_json(["bound", "--level", "20", "--cusp", "1/2"], capsys)
    assert code == 0 and doc["N_prime"] == 10 and doc["width"] == 5


def test_hbound_worked_example(capsys):
    code, doc, _ = run_json(["hbound", "--field", "Qsqrt5", "--ideal", "2",
                             "--sigma", "1,0;r,1", "--height", "4"], capsys)
    assert code == 0 and doc["N0"] == 2
    assert doc["checks"]["alpha_checked"] == doc["checks"]["alpha_passed"] > 0


def test_verify_fricke(capsys):
    code, doc, _ = run_json(["verify", "--form", "11a", "--cusp", "0/1", "--nmax", "6"], capsys)
    assert code == 0 and doc["all_recognized"]
    f = corpus_form("11a")
    for e in doc["entries"][1:]:
        assert e["element"]["coords"] == [f"{-f.a(e['n'])}/11"]


def test_exit_codes(capsys):
    assert run(["bound", "--level", "20", "--sigma", "2,0,0,1"], capsys)[0] == 2
    assert run(["expand", "--form", "nosuch", "--cusp", "oo"], capsys)[0] == 2
    assert run(["expand", "--form", "11a", "--cusp", "oo", "--tol", "1e-300",
                "--prec", "80", "--nmax", "4"], capsys)[0] == 3
    assert run(["verify", "--form", "20a", "--cusp", "1/2", "--modulus", "1",
                "--nmax", "3"], capsys)[0] == 4


def test_json_is_deterministic(capsys):
    argv = ["expand", "--form", "27a", "--cusp", "1/3", "--nmax", "5"]
    a = run(argv + ["--json"], capsys)[1]
    b = run(argv + ["--json"], capsys)[1]
    assert a == b


def test_replay_round_trip(capsys, tmp_path):
    argv = ["verify", "--form", "32a", "--cusp", "1/4", "--nmax", "4"]
    code, first, _ = run(argv + ["--json", str(tmp_path / "out.json")], capsys)
    assert code == 0
    saved = (tmp_path / "out.json").read_text()
    code, replayed, _ = run(["replay", str(tmp_path / "out.json")], capsys)
    assert code == 0 and replayed == saved


def test_strip_json():
    assert _strip_json(["cusps", "--level", "5", "--json", "-"]) == ["cusps", "--level", "5", "--json"]
    assert _strip_json(["cusps", "--json", "x.json", "--level", "5"]) == ["cusps", "--level", "5", "--json"]


def test_empty_sweep(capsys):
    code, doc, _ = run_json(["sweep", "--forms"], capsys)
    assert code == 0 and doc["rows"] == []


def test_sweep_single_form(capsys):
    code, doc, _ = run_json(["sweep", "--forms", "11a", "--cusps", "oo", "--nmax", "5"], capsys)
    assert code == 0 and len(doc["rows"]) == 1
    row = doc["rows"][0]
    assert row["all_recognized"] and row["error"] is None and row["width"] == 1


def test_sweep_jobs_match(capsys):
    base = ["sweep", "--forms", "11a", "27a", "--nmax", "3"]
    one = run_json(base, capsys)[1]["rows"]
    two = run_json(base + ["--jobs", "2"], capsys)[1]["rows"]
    assert one == two


def test_corpus_build_matches_shipped(capsys, tmp_path):
    assert main(["corpus", "build", "--label", "11a", "--trunc", "50", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "11a.json").read_text())
    assert data["coeffs"] == list(corpus_form("11a").coeffs[1:51])


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "cuspfields.cli", "cusps", "--level", "11"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "oo" in out.stdout
