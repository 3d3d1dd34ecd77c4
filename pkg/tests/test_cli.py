import csv
import subprocess
import sys

import pytest

from inhomog.cli import main, parse_int_list, resolve_code
from inhomog.config import parse_config
from inhomog.errors import ConfigError

C322 = """
m = 3
n = 4
digits = [[0,0],[0,1],[0,2],[1,0],[1,1],[2,0],[2,1]]
[measure]
kind = "column_uniform"
"""

C411 = """
m = 3
n = 4
digits = [[0,0],[0,1],[0,2],[0,3],[1,0],[2,0]]
"""


@pytest.fixture
def cfg322(tmp_path):
    path = tmp_path / "c322.toml"
    path.write_text(C322)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _fields(line):
    return dict(part.split("=", 1) for part in line.split() if "=" in part)


def test_dims_322(cfg322, capsys):
    code, out, _ = run(["--config", cfg322, "dims"], capsys)
    assert code == 0
    f = _fields(out)
    assert float(f["assouad"]) == pytest.approx(1.792, abs=1e-3)
    assert float(f["box"]) == pytest.approx(1.611, abs=1e-3)
    assert f["uniform_fibres"] == "0"
    assert float(f["argmax_mass"]) == pytest.approx(1 / 3)


def test_dims_411(tmp_path, capsys):
    path = tmp_path / "c411.toml"
    path.write_text(C411)
    code, out, _ = run(["dims", "--config", str(path)], capsys)
    assert code == 0
    f = _fields(out)
    assert float(f["assouad"]) == pytest.approx(2.0, abs=1e-12)
    assert float(f["box"]) == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize(
    "text,field",
    [
        ("m = 3\nn = 4\ndigits = [[0,0],[0,'x']]\n", "digits[1][1]"),
        ("m = 3\nn = 4\ndigits = [[0,0],[0]]\n", "digits[1]"),
        ("m = 3\nn = 4\ndigits = [[0,0],[5,0]]\n", "digits"),
        ("m = 3\ndigits = [[0,0],[1,0]]\n", "n"),
        ("m = 3\nn = 3\ndigits = [[0,0],[1,0]]\n", "m"),
        ("m = 3\nn = 4\nextra = 1\ndigits = [[0,0],[1,0]]\n", "extra"),
        ("m = 3\nn = 4\ndigits = [[0,0],[1,0]]\n[measure]\nkind = 'odd'\n", "measure.kind"),
        (
            "m = 3\nn = 4\ndigits = [[0,0],[1,0]]\n[measure]\nkind = 'explicit'\n"
            "weights = [[0,0,0.5],[1,0,0.4]]\n",
            "measure.weights",
        ),
    ],
)
def test_config_field_errors(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert field in str(info.value)


def test_config_syntax_error_has_line():
    with pytest.raises(ConfigError, match="line"):
        parse_config("m = 3\nn = = 4\n")


def test_config_explicit_weights():
    cfg = parse_config(
        "m = 2\nn = 3\ndigits = [[0,0],[1,1]]\n[measure]\nkind = 'explicit'\n"
        "weights = [[1,1,0.75],[0,0,0.25]]\n"
    )
    assert cfg.measure.weights == pytest.approx((0.25, 0.75))
    assert cfg.kind == "explicit"


def test_malformed_digits_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("m = 3\nn = 4\ndigits = [[0,0],[0,'x']]\n")
    code, _, err = run(["--config", str(path), "dims"], capsys)
    assert code == 2
    assert "digits[1][1]" in err


def test_missing_config_exit_2(tmp_path, capsys):
    assert run(["dims"], capsys)[0] == 2
    assert run(["--config", str(tmp_path / "nope.toml"), "dims"], capsys)[0] == 2
    assert run(["--config", "x", "frobnicate"], capsys)[0] == 2


def test_precondition_exit_3(cfg322, capsys):
    code, _, err = run(["--config", cfg322, "ldp", "--lambda", "1.9", "--k", "100"], capsys)
    assert code == 3
    assert "LambdaOutOfRange" in err
    assert run(["--config", cfg322, "render", "--depth", "40"], capsys)[0] == 3


def test_ldp_exact(cfg322, tmp_path, capsys):
    out = tmp_path / "tail.csv"
    code, text, _ = run(
        ["--config", cfg322, "--out", str(out), "ldp", "--lambda", "1.75", "--k", "100:1000:100"], capsys
    )
    assert code == 0
    f = _fields(text)
    assert f["mode"] == "exact"
    assert float(f["relative_error"]) <= 0.05
    assert float(f["predicted"]) == pytest.approx(0.2 * 0.58357, abs=1e-5)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["k", "probability", "rate_estimate"]
    assert len(rows) == 11


def test_ldp_monte_carlo_seeded(cfg322, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["--config", cfg322, "--seed", "7", "ldp", "--lambda", "1.7", "--k", "20,40", "--trials", "2000"]
    assert run(argv[:2] + ["--out", str(a)] + argv[2:], capsys)[0] == 0
    assert run(argv[:2] + ["--out", str(b), "--threads", "3"] + argv[2:], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_rate_command(cfg322, tmp_path, capsys):
    out = tmp_path / "rate.csv"
    code, text, _ = run(["--config", cfg322, "--out", str(out), "rate", "--points", "20"], capsys)
    assert code == 0
    assert float(_fields(text)["I_right_limit"]) == pytest.approx(1.0986, abs=1e-4)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["lambda", "I", "rate_symbolic", "rate_geometric"]
    assert len(rows) == 21


def test_rate_second_pair_differs(tmp_path, capsys):
    limits = []
    for digits in ("[[0,0],[0,1],[0,2],[1,0],[1,1],[2,0],[2,1]]", "[[0,0],[0,1],[0,2],[1,0],[1,1],[1,2],[2,0]]"):
        path = tmp_path / "c.toml"
        path.write_text(f"m = 3\nn = 4\ndigits = {digits}\n[measure]\nkind = 'column_uniform'\n")
        code, text, _ = run(["--config", str(path), "rate"], capsys)
        assert code == 0
        limits.append(float(_fields(text)["I_right_limit"]))
    assert limits[0] == pytest.approx(1.098612, abs=1e-6)
    assert limits[1] == pytest.approx(0.405465, abs=1e-6)


def test_cover_check(cfg322, capsys):
    code, text, _ = run(["--config", cfg322, "cover-check", "--code", "random:1", "--R", "n^-1", "--r", "n^-4"], capsys)
    assert code == 0
    f = _fields(text)
    assert f["formula"] == f["enumeration"]
    assert int(f["mesh"]) > 0
    assert float(f["log_ratio"]) >= 0


def test_profile_and_figure2(cfg322, tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _, _ = run(["--config", cfg322, "--out", str(out), "profile", "--code", "const:0,0", "--R", "n^-3"], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["r", "A", "branch"]
    out2 = tmp_path / "f.csv"
    code, _, _ = run(["--config", cfg322, "--out", str(out2), "profile", "--figure2", "--points", "10"], capsys)
    assert code == 0
    assert next(csv.reader(out2.open())) == ["shape", "r", "A", "branch"]


def test_clt_command(cfg322, tmp_path, capsys):
    out = tmp_path / "clt.csv"
    code, text, _ = run(["--config", cfg322, "--out", str(out), "clt", "--k", "200", "--trials", "2000"], capsys)
    assert code == 0
    assert int(_fields(text)["window"]) == 41
    assert next(csv.reader(out.open())) == ["tau", "empirical", "phi"]


def test_render_command(cfg322, tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, text, _ = run(["--config", cfg322, "--out", str(out), "render", "--depth", "2"], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "y", "width", "height"]
    assert len(rows) == 50


def test_resolve_code(cfg322):
    cfg = parse_config(C322)
    assert resolve_code("const:0,1", cfg, 4).word == ((0, 1),) * 4
    assert resolve_code("0,0;1,1", cfg, 5).word == ((0, 0), (1, 1), (0, 0), (1, 1), (0, 0))
    assert resolve_code("random:3", cfg, 10) == resolve_code("random:3", cfg, 10)
    with pytest.raises(ConfigError):
        resolve_code("const:2,3", cfg, 4)
    with pytest.raises(ConfigError):
        resolve_code("random:x", cfg, 4)


def test_parse_int_list():
    assert parse_int_list("100:300:100") == [100, 200, 300]
    assert parse_int_list("5,7") == [5, 7]
    with pytest.raises(ConfigError):
        parse_int_list("a:b")


def test_console_entry_point(cfg322):
    proc = subprocess.run(
        [sys.executable, "-m", "inhomog.cli", "--config", cfg322, "dims"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "assouad=" in proc.stdout
