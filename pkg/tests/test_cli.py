import json
import subprocess
import sys


from cubiclab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, load_polynomial, read_config, run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qdecomp_single(capsys):
    code, out, _ = call(capsys, "qdecomp", "--q", "720")
    assert code == EXIT_OK
    assert out.strip() == "720,5,3,4,1,1"


def test_qdecomp_census(capsys):
    code, out, _ = call(capsys, "qdecomp", "census", "--max", "64")
    assert code == EXIT_OK
    assert out.splitlines()[1].startswith("64,8,")


def test_certify_all_at_five(capsys):
    code, out, _ = call(capsys, "certify", "--case", "all", "--n", "5", "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out)
    assert rows and all(r["certified"] for r in rows if r["applies"])


def test_certify_n4_fails(capsys):
    code, _, _ = call(capsys, "certify", "--case", "S2a-Vterm", "--n", "4")
    assert code == EXIT_FAIL


def test_usage_errors(capsys):
    assert call(capsys, "count", "--poly", "x1^3", "--P", "0")[0] == EXIT_USAGE
    assert call(capsys, "bogus")[0] == EXIT_USAGE
    assert call(capsys, "count", "--poly", "x1^4 + x2", "--P", "3")[0] == EXIT_USAGE
    assert call(capsys, "count", "--poly", "x1^3", "--P", "3", "--threads", "0")[0] == EXIT_USAGE


def test_verify_commands_pass(capsys):
    poly = "x1^3 + 2*x2^3 - 5"
    assert call(capsys, "verify", "orthogonality", "--poly", poly, "--P", "5")[0] == EXIT_OK
    assert call(capsys, "verify", "slice", "--poly", poly, "--m", "1,1", "--P", "5")[0] == EXIT_OK
    assert call(capsys, "verify", "weyl-linearization", "--poly", poly)[0] == EXIT_OK
    code, out, _ = call(capsys, "verify", "mult", "--poly", poly, "--u", "1", "--config", "r=4", "--config", "s=9")
    assert code == EXIT_OK


def test_output_is_deterministic(capsys):
    argv = ["expsum", "arc", "--poly", "x1^3 + 2*x2^3", "--q", "5", "--u", "1", "--z", "0.001", "--P", "5"]
    first = call(capsys, *argv)[1]
    second = call(capsys, *argv, "--threads", "3")[1]
    assert first == second
    argv = ["report", "weyl-bound", "--poly", "x1^3 + 2*x2^3", "--P", "6"]
    assert call(capsys, *argv)[1] == call(capsys, *argv, "--threads", "2")[1]


def test_out_file(tmp_path, capsys):
    path = tmp_path / "q.json"
    code, out, _ = call(capsys, "qdecomp", "--range", "2000", "--format", "json", "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert json.loads(path.read_text()) == [{"failures": 0, "limit": 2000}]


def test_slice_command_searches(capsys):
    code, out, _ = call(capsys, "slice", "--poly", "x1^3 + x2^3 + x3^3", "--n", "4", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)[0]["m"] == [0, 0, 0, 1]


def test_config_and_polynomial_files(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nP = 6\nr=4\n")
    assert read_config([f"@{cfg}", "s=9"]) == {"P": "6", "r": "4", "s": "9"}
    poly = tmp_path / "g.txt"
    poly.write_text("x1^3 + x3\n")
    assert load_polynomial(f"@{poly}").n == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cubiclab", "qdecomp", "--q", "32"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "32,1,1,4,2,2"
