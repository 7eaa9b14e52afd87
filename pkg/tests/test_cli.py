import os
import subprocess
import sys

import numpy as np
import pytest

from fdrelay import __version__
from fdrelay.channel import SystemConfig
from fdrelay.cli import (EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, RunSpec, build_parser, emit_csv,
                         format_number, parse_and_dispatch, read_config, read_csv, resolve)
from fdrelay.montecarlo import sweep_t

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def run(argv, capsys):
    code = parse_and_dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_help_lists_every_flag():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    assert set(sub) == {"hd", "fd-robust", "sweep", "threshold", "split-study", "oracle-check"}
    for name, p in sub.items():
        text = p.format_help()
        for action in p._actions:
            for flag in action.option_strings:
                assert flag in text
            if action.option_strings and action.dest != "help":
                assert action.help, f"{name} {action.option_strings} undocumented"


def test_help_exits_zero():
    out = subprocess.run([sys.executable, "-m", "fdrelay", "sweep", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "--seed" in out.stdout


def test_seed_is_required(capsys):
    code, _, err = run(["sweep", "--t-over-p", "0"], capsys)
    assert code == EXIT_USAGE
    assert "seed" in err and err.count("\n") == 1


@pytest.mark.parametrize("argv", [["sweep", "--bogus", "1", "--seed", "1"], ["nope"], [],
                                  ["sweep", "--seed", "x"], ["sweep", "--seed", "1", "--c", "0.5"],
                                  ["sweep", "--seed", "1", "--t-over-p", "a,b"]])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_USAGE
    assert err.startswith("fdrelay")


def test_config_grammar(tmp_path):
    path = write(tmp_path, "a.cfg", "# comment\nm_src = 3   # trailing\n\nt_over_p = 0, 0.5,1\n"
                                    "splits = 4x8, 6x6\nupper_bound = yes\nmaster_seed = 9\n")
    vals = read_config(path)
    assert vals == {"m_src": 3, "t_over_p": (0.0, 0.5, 1.0), "splits": ((4, 8), (6, 6)),
                    "upper_bound": True, "master_seed": 9}


@pytest.mark.parametrize("text", ["m_src 3\n", "colour = red\n", "m_src = three\n",
                                  "m_src = 1\nm_src = 2\n"])
def test_bad_config_is_usage_error(tmp_path, text, capsys):
    path = write(tmp_path, "bad.cfg", text)
    code, _, err = run(["sweep", "--config", path, "--seed", "1"], capsys)
    assert code == EXIT_USAGE
    assert err.count("\n") == 1


def test_missing_config_file(capsys):
    code, _, _ = run(["sweep", "--config", "/nonexistent/x.cfg", "--seed", "1"], capsys)
    assert code == EXIT_USAGE


def test_flags_override_config(tmp_path):
    path = write(tmp_path, "a.cfg", "m_src = 3\nmaster_seed = 5\nl_trials = 10\n")
    spec = resolve(["sweep", "--config", path, "--m-src", "4"])
    assert (spec.m_src, spec.master_seed, spec.l_trials) == (4, 5, 10)
    assert spec.shrink_c == RunSpec().shrink_c


def test_shipped_configs_parse():
    for name in ("fig2", "fig3a", "fig3a_34", "fig3b", "fig3b_1520", "fig3c"):
        vals = read_config(os.path.join(CONFIGS, f"{name}.cfg"))
        assert vals["master_seed"] == 42


def test_sweep_csv_contract(tmp_path, capsys):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--seed", "42", "--trials", "30", "--t-over-p", "0,0.04,1.24", "--out", str(out)]
    assert run(argv, capsys)[0] == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith(f"# fdrelay {__version__} ")
    assert "L=30" in lines[0] and "seed=42" in lines[0] and "m_src=2" in lines[0]
    assert lines[1] == "t_over_p,mean_hd,se_hd,mean_fd,se_fd"
    assert len(lines) == 5
    for cell in lines[3].split(","):
        assert "e" not in cell and "." in cell
        assert len(cell.replace(".", "").lstrip("0")) >= 10
    first = out.read_bytes()
    assert run(argv + ["--workers", "2"], capsys)[0] == EXIT_OK
    assert out.read_bytes() == first


def test_csv_round_trip(tmp_path):
    rep = sweep_t(SystemConfig(2, 2, 3, 3), [0.0, 0.04, 2.0], 40, 3, upper_bound=True)
    path = tmp_path / "r.csv"
    emit_csv(rep, str(path))
    header, cols = read_csv(str(path))
    assert header.startswith("# fdrelay")
    np.testing.assert_allclose(cols["mean_fd"], rep.mean_rates_fd, rtol=0, atol=1e-9)
    np.testing.assert_allclose(cols["se_ub"], rep.se_ub, rtol=0, atol=1e-9)
    np.testing.assert_allclose(cols["t_over_p"], rep.t_over_p_values, atol=1e-12)


def test_empty_sweep_is_header_only(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert run(["sweep", "--seed", "1", "--trials", "5", "--t-over-p", "", "--out", str(out)],
               capsys)[0] == EXIT_OK
    assert len(out.read_text().splitlines()) == 2


def test_unwritable_output(capsys):
    code, _, _ = run(["sweep", "--seed", "1", "--trials", "5", "--out", "/nonexistent/dir/x.csv"],
                     capsys)
    assert code == EXIT_USAGE


def test_format_number():
    assert float(format_number(0.04)) == 0.04
    assert "e" not in format_number(1e-7)
    assert abs(float(format_number(3.1415926535897)) - 3.1415926535897) < 1e-14


def test_single_design_commands(capsys):
    code, out, _ = run(["hd", "--seed", "3"], capsys)
    assert code == EXIT_OK and "r_end2end" in out
    hd = float(out.split("r_end2end = ")[1].split()[0])
    code, out, _ = run(["fd-robust", "--seed", "3", "--t-bound", "0"], capsys)
    fd = float(out.split("r_end2end = ")[1].split()[0])
    assert fd == 2 * hd


def test_threshold_command(capsys):
    code, out, _ = run(["threshold", "--seed", "42", "--trials", "100", "--tlo", "1", "--thi", "20"],
                       capsys)
    assert code == EXIT_OK
    assert 1.0 < float(out) < 20.0


def test_threshold_bracket_failure(capsys):
    code, _, err = run(["threshold", "--seed", "42", "--trials", "50", "--tlo", "20", "--thi", "30"],
                       capsys)
    assert code == EXIT_NUMERICAL
    assert "no FD/HD crossing" in err


def test_split_study_command(capsys):
    code, out, _ = run(["split-study", "--seed", "1", "--trials", "20", "--m-src", "2",
                        "--n-dst", "10", "--total", "12", "--splits", "4x8,8x4",
                        "--t-over-p", "0.04"], capsys)
    assert code == EXIT_OK
    rows = out.splitlines()
    assert rows[1] == "k_tx,k_rx,t_over_p,mean_hd,se_hd,mean_fd,se_fd"
    assert rows[2].startswith("4,8,") and rows[3].startswith("8,4,")
    code, _, _ = run(["split-study", "--seed", "1", "--total", "12", "--splits", "4x7",
                      "--t-over-p", "0.04"], capsys)
    assert code == EXIT_USAGE


def test_equal_antenna_sweep_with_bound(capsys):
    code, out, _ = run(["sweep", "--seed", "1", "--trials", "10", "--equal-antennas", "2,3",
                        "--t-over-p", "0.02,1", "--upper-bound"], capsys)
    assert code == EXIT_OK
    rows = out.splitlines()
    assert rows[1] == "antennas,t_over_p,mean_hd,se_hd,mean_fd,se_fd,mean_ub,se_ub"
    assert [r.split(",")[0] for r in rows[2:]] == ["2", "2", "3", "3"]


def test_oracle_check(capsys):
    code, out, err = run(["oracle-check", "--streams", "2", "--instances", "5", "--grid", "500",
                          "--seed", "1", "--gap-limit", "1.0"], capsys)
    assert code == EXIT_OK
    rows = out.splitlines()
    assert rows[1].startswith("instance,t_bound,algorithm_rate,oracle_rate,relative_gap")
    assert len(rows) == 7
    code, _, err = run(["oracle-check", "--streams", "2", "--instances", "5", "--grid", "500",
                        "--seed", "1", "--gap-limit", "0.0"], capsys)
    assert code == EXIT_NUMERICAL and "oracle gap" in err
    assert run(["oracle-check", "--streams", "4", "--seed", "1"], capsys)[0] == EXIT_USAGE
