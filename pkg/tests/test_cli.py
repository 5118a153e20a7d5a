import subprocess
import sys

import pytest

from entiredyn.cli import main

ES = ["--family", "expshift", "--param", "-2,0"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_land_ray(capsys):
    code, out, _ = run(capsys, "land-ray", *ES, "--address", "p:0")
    assert code == 0
    addr, status, re_, im, mult, cls = out.strip().split(";")
    assert (addr, status, cls) == ("p:0", "landed", "repelling")
    assert abs(float(re_) - 1.146193) < 1e-6 and abs(float(mult) - 3.14619) < 1e-4


def test_land_ray_no_convergence_exit_code(capsys):
    code, out, _ = run(capsys, "land-ray", *ES, "--address", "p:0", "--max-pullbacks", "1")
    assert code == 2 and ";no_convergence;" in out


def test_fixed_points(capsys):
    code, out, _ = run(capsys, "fixed-points", *ES, "--box", "-3,3,-3,3", "--grid", "16")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "re,im,period,mult_re,mult_im,class"
    assert [ln.split(",")[-1] for ln in lines[1:]] == ["attracting", "repelling"]


def test_verify_expansion(capsys):
    code, out, _ = run(capsys, "verify-expansion", "--family", "cosine", "--param", "1,0",
                       "--param", "1,0", "--samples", "2000")
    row = out.strip().splitlines()[1].split(",")
    assert code == 0 and row[0] == "cosine" and row[2:4] == ["2000", "0"]


def test_find_cf_with_audit(capsys):
    code, out, _ = run(capsys, "find-cf", *ES, "--r-max", "200", "--audit", "200")
    assert code == 0
    assert out.splitlines()[2] == "# audit samples=200 violations=0"


def test_find_cf_failure_exit_code(capsys):
    code, _, err = run(capsys, "find-cf", *ES, "--r-max", "1")
    assert code == 2 and "NoThreshold" in err


def test_classify_orbit(capsys):
    code, out, _ = run(capsys, "classify-orbit", *ES, "--z", "60,0", "--z", "-1.8414,0",
                       "--domains", "0", "--R", "5", "--nmax", "500")
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert code == 0 and rows[0][2] == "escaping_fiat" and rows[1][2] == "undecided"


def test_estimate_rprime(capsys):
    code, out, _ = run(capsys, "estimate-rprime", *ES, "--domains", "0", "--R", "5",
                       "--probes", "10")
    assert code == 0 and out.splitlines()[1].endswith(",10")


def test_trace_ray_to_file(capsys, tmp_path):
    path = tmp_path / "ray.csv"
    code, out, _ = run(capsys, "trace-ray", *ES, "--address", "p:1", "--samples", "4",
                       "--out", str(path))
    lines = path.read_text().splitlines()
    assert code == 0 and out == "" and lines[0] == "t,re,im,digit" and len(lines) == 5


def test_render_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    for p in (a, b):
        code, _, _ = run(capsys, "render", "--family", "expaffine",
                         "--param", "-0.7373688780783199,-0.6754902942615236",
                         "--viewport", "0,0,8", "--pixels", "32", "--nmax", "500",
                         "--out", str(p))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"P6\n32 32\n255\n")


def test_overlay_marks_pixels(capsys, tmp_path):
    path = tmp_path / "o.ppm"
    code, _, _ = run(capsys, "overlay", "--family", "expaffine",
                     "--param", "-0.7373688780783199,-0.6754902942615236",
                     "--viewport", "0,0,8", "--pixels", "32", "--nmax", "500",
                     "--n-orbit", "200", "--out", str(path))
    assert code == 0
    body = path.read_bytes()[len(b"P6\n32 32\n255\n"):]
    assert b"\x00\x00\x00" in body


@pytest.mark.parametrize("argv", [
    [],
    ["render", "--family", "expaffine", "--param", "1,0", "--viewport", "0,0,8"],
    ["land-ray", *ES],
    ["land-ray", *ES, "--address", "q:1"],
    ["fixed-points", *ES, "--box", "1,2"],
    ["fixed-points", "--family", "nope"],
    ["fixed-points", "--family", "expshift"],
    ["trace-ray", *ES, "--address", "p:0", "--t-start", "3", "--t-end", "1"],
])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "entiredyn.cli", "land-ray", *ES,
                          "--address", "p:0"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("p:0;landed;")
