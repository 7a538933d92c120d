import csv
import io
import json
import subprocess
import sys

import mpmath
import pytest

from hankel_p3 import cli
from hankel_p3.precision import PREC_ENV_VAR


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_compute_sigma_example(capsys):
    code, out, _ = run(["compute", "--n", "2", "--t", "1", "--quantity", "sigma"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["n", "t", "sigma_n"]
    with mpmath.workprec(256):
        assert abs(mpmath.mpf(table[1][2]) - (-2 - mpmath.mpf(4) / 3)) < mpmath.mpf(10) ** -70


def test_compute_schemas(capsys):
    _, out, _ = run(["compute", "--n-max", "3", "--t", "0.5,2"], capsys)
    table = rows(out)
    assert table[0] == ["n", "t", "h_n", "beta_n", "p_n", "logD_n"]
    assert len(table) == 1 + 2 * 4
    _, out, _ = run(["compute", "--n-max", "2", "--t", "1", "--quantity", "aux"], capsys)
    assert rows(out)[0] == ["n", "t", "R_n", "r_n", "sigma_n", "dR_n", "dr_n", "dsigma_n"]


def test_verify_ladder_example(capsys):
    code, out, err = run(["verify", "--what", "ladder", "--n-max", "40", "--t", "1", "--prec-bits", "512"], capsys)
    assert code == 0, err
    table = rows(out)
    assert table[0] == ["identity", "n", "t", "residual", "status"]
    assert all(r[4] == "pass" for r in table[1:])


def test_verify_reports_violations(capsys):
    # guard bits leave no slack, so the roughly 2^-230 residuals exceed a 2^-255 tolerance
    code, _, err = run(["verify", "--what", "difference", "--n-max", "20", "--t", "10", "--prec-bits", "256",
                        "--guard-bits", "1"], capsys)
    assert code == 1
    assert "above tolerance" in err


def test_verify_all_groups_pass(capsys):
    code, out, err = run(["verify", "--n-max", "6", "--t-start", "0.1", "--t-stop", "10", "--t-count", "3",
                          "--spacing", "log"], capsys)
    assert code == 0, err
    names = {r[0] for r in rows(out)[1:]}
    assert {"sigma_difference", "painleve_iii", "sigma_ode", "det_even", "lowering"} <= names
    assert any(n.startswith("H_equation") for n in names)


def test_series_example(capsys):
    code, out, _ = run(["series", "--which", "Delta1", "--regime", "large", "--s", "10", "--truncation", "auto"],
                       capsys)
    assert code == 0
    head, row = rows(out)
    assert head == ["name", "regime", "s", "terms", "value", "next_term_bound"]
    assert abs(float(row[4]) + 10.945662704910703) < 1e-12
    assert float(row[5]) > 0


def test_recursion_and_json_roundtrip(capsys):
    code, out, _ = run(["recursion", "--quantity", "r", "--t", "1", "--n-target", "6", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["columns"] == ["quantity", "n", "t", "value", "source", "residual"]
    assert data["rows"][3]["value"].startswith("2.16666666666")
    assert "envelope" in data["error_growth"]["1"]
    # re-serialization reproduces the same decimal strings
    assert json.loads(json.dumps(data)) == data


def test_integrate_log(capsys):
    code, out, _ = run(["integrate", "--n", "1", "--t-start", "1", "--t-end", "2", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert set(data["integration"]) == {"n", "t0", "t1", "steps", "rejected_steps", "final_error_estimate"}
    with mpmath.workprec(256):
        y = mpmath.mpf(data["rows"][1]["R_n"])
        assert abs(y - 8 / (2 * mpmath.sqrt(2) + 1)) < mpmath.mpf(10) ** -20


def test_dump_moments(capsys):
    code, out, _ = run(["dump-moments", "--t", "1", "--k-min", "-2", "--k-max", "4", "--format", "json"], capsys)
    assert code == 0
    tab = json.loads(out)["tables"][0]
    assert set(tab) == {"family", "t", "alpha", "k", "mu", "dmu"}
    assert tab["mu"][tab["k"].index(1)] in ("0.0", "0")


def test_scale_command(capsys):
    code, out, _ = run(["scale", "--quantity", "sigma", "--s", "1", "--n-list", "4,8,16"], capsys)
    assert code == 0
    t = rows(out)
    assert t[0] == ["quantity", "regime", "n", "s", "t", "sample", "series", "next_term_bound", "deviation"]
    assert [r[2] for r in t[1:]] == ["4", "8", "16"]


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["compute", "--bogus"])
    assert e.value.code == 64
    code, _, _ = run(["compute", "--n", "2"], capsys)
    assert code == 64
    code, _, _ = run(["verify", "--n-max", "2", "--t", "1"], capsys)
    assert code == 64
    code, _, _ = run(["compute", "--n", "1", "--t", "1", "--prec-bits", "16"], capsys)
    assert code == 64


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(["compute", "--n", "1", "--t", "1", "-o", str(tmp_path / "no" / "x.csv")], capsys)
    assert code == 74


def test_file_output_lf_and_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["compute", "--n-max", "4", "--t", "0.3,3", "--quantity", "aux", "-o", str(p)]) == 0
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    assert b"\r\n" not in a and a.endswith(b"\n")


def test_jobs_match_serial(tmp_path):
    p1, p2 = tmp_path / "s.csv", tmp_path / "j.csv"
    args = ["compute", "--n-max", "3", "--t", "0.2,1,5"]
    assert cli.main(args + ["-o", str(p1)]) == 0
    assert cli.main(args + ["--jobs", "2", "-o", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_env_precision(monkeypatch):
    monkeypatch.setenv(PREC_ENV_VAR, "320")
    assert cli.resolve_precision(4).work_bits == 320
    monkeypatch.setenv(PREC_ENV_VAR, "x")
    with pytest.raises(cli.UsageError):
        cli.resolve_precision(4)


def test_precision_retry_then_exit_2(monkeypatch, capsys):
    from hankel_p3.errors import PrecisionFailure
    calls = []

    def failing(cfg):
        calls.append(cfg.prec.work_bits)
        raise PrecisionFailure(7)

    monkeypatch.setitem(cli.DISPATCH, "compute", failing)
    code, _, err = run(["compute", "--n", "1", "--t", "1", "--prec-bits", "128"], capsys)
    assert code == 2
    assert calls == [128, 256]
    assert "precision failure" in err


def test_parse_grid():
    assert cli.parse_grid("1, 2,3") == ("1", "2", "3")
    g = cli.parse_grid(None, "0.001", "100", 6, "log")
    assert len(g) == 6 and abs(float(g[0]) - 1e-3) < 1e-15 and abs(float(g[-1]) - 100) < 1e-9
    with pytest.raises(cli.UsageError):
        cli.parse_grid(None, "-1", "1", 3, "log")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hankel_p3", "compute", "--n", "1", "--t", "1", "--quantity", "R"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("n,t,R_n\n1,1.0,1.333")
