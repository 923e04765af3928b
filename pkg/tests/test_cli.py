import subprocess
import sys

import pytest

from backhaul_mcp import asymptotics as asy
from backhaul_mcp import cli
from backhaul_mcp.oblivious import oblivious_rate
from backhaul_mcp.params import NumericError, SystemParams, ValidationError


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rate_command(capsys):
    code, out, _ = _run(["rate", "--alpha", "0.4", "--p-db", "10", "--c-bits", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "axis,scheme,rate_bits,r_star,uncertainty,wall_ms"
    obl = next(line for line in lines if ",oblivious," in line)
    ref = oblivious_rate(SystemParams(alpha=0.4, p=10.0, c_backhaul=3.0)).rate
    assert obl.split(",")[2] == f"{ref:.9g}"


def test_sweep_grid_forms(capsys):
    code, out, _ = _run(["sweep", "--axis", "c_bits", "--grid", "0:2:0.5", "--scheme", "oblivious"],
                        capsys)
    assert code == 0
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["0", "0.5", "1", "1.5", "2"]
    code, out, _ = _run(["sweep", "--axis", "alpha", "--grid", "0.1,0.9", "--model", "sh",
                         "--scheme", "unlimited,cutset"], capsys)
    assert code == 0 and len(out.splitlines()) == 5


def test_parse_grid():
    assert cli.parse_grid("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert cli.parse_grid("3, 1.5") == (3.0, 1.5)
    with pytest.raises(ValidationError):
        cli.parse_grid("0:1:0")
    with pytest.raises(ValidationError):
        cli.parse_grid("a:b:c")


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, stdout, _ = _run(["rate", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert out.read_text().startswith("axis,scheme")


def test_lowsnr_command(capsys):
    code, out, _ = _run(["lowsnr", "--alpha", "0.2", "--c-bits", "2"], capsys)
    assert code == 0
    rows = {line.split(",")[0]: line.split(",") for line in out.splitlines()[1:]}
    assert set(rows) == {"unlimited", "oblivious", "local_decode", "local_decoding"}
    expected = asy.lowsnr_oblivious(asy.lowsnr_unlimited(SystemParams(alpha=0.2)), 2.0)
    assert float(rows["oblivious"][1]) == pytest.approx(expected.eb_n0_min_db, rel=1e-8)


def test_region_command(capsys):
    code, out, _ = _run(["region", "--cells", "8", "--alpha", "0.4"], capsys)
    assert code == 0
    n, r, value, inf_n, subset = out.splitlines()[1].split(",")
    assert n == "8"
    assert float(value) == pytest.approx(float(inf_n), abs=0.05)
    code, out, _ = _run(["region", "--cells", "6", "--alpha", "0", "--r", "0.5"], capsys)
    assert out.splitlines()[1].endswith(",none")


def test_figure_command(tmp_path, capsys):
    code, out, _ = _run(["figure", "8", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "fig08.csv").exists() and (tmp_path / "fig08_plot.py").exists()
    assert "csv:" in out


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# low interference\nalpha = 0.2\n--c-bits = 2\nmodel=sh\n")
    _, from_cfg, _ = _run(["lowsnr", "--config", str(cfg)], capsys)
    _, explicit, _ = _run(["lowsnr", "--alpha", "0.2", "--c-bits", "2", "--model", "sh"], capsys)
    assert from_cfg == explicit
    _, flag_wins, _ = _run(["lowsnr", "--config", str(cfg), "--alpha", "0.7"], capsys)
    _, explicit, _ = _run(["lowsnr", "--alpha", "0.7", "--c-bits", "2", "--model", "sh"], capsys)
    assert flag_wins == explicit


def test_config_errors(tmp_path, capsys):
    for text in ("alpha 0.2\n", "speed = 3\n", "alpha = fast\n"):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        code, _, err = _run(["rate", "--config", str(cfg)], capsys)
        assert code == 1 and "bad.cfg:1" in err


def test_k_users_inf(capsys):
    code, out, _ = _run(["rate", "--channel", "rayleigh", "--k-users", "inf", "--scheme", "oblivious"],
                        capsys)
    assert code == 0 and "ERR" not in out


@pytest.mark.parametrize("argv", [
    ["rate", "--alpha", "2"],
    ["rate", "--c-bits", "-1"],
    ["sweep", "--grid", "1:0:-1"],
    ["rate", "--scheme", "bogus"],
])
def test_invalid_input_exit_1(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 1 and err


@pytest.mark.parametrize("argv", [["rate", "--nope"], ["figure", "1"], []])
def test_parser_errors_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1


def test_numeric_failure_exit_2(monkeypatch, capsys):
    def boom(args, opts):
        raise NumericError("did not converge")

    monkeypatch.setitem(cli.COMMANDS, "rate", boom)
    code, _, err = _run(["rate"], capsys)
    assert code == 2 and "numeric failure" in err


def _console(*args):
    return subprocess.run([sys.executable, "-m", "backhaul_mcp.cli", *args],
                          capture_output=True, text=True)


def test_fresh_processes_give_identical_bytes():
    args = ("sweep", "--channel", "rayleigh", "--k-users", "2", "--axis", "alpha",
            "--grid", "0.3,0.8", "--cells", "12", "--trials", "30")
    first, second = _console(*args), _console(*args)
    assert first.returncode == 0
    assert first.stdout == second.stdout


def test_process_exit_codes():
    assert _console("rate", "--model", "hex").returncode == 1
    assert _console("rate", "--alpha", "1.5").returncode == 1
    assert _console("selftest", "--no-montecarlo", "--tol-scale", "0").returncode == 3
