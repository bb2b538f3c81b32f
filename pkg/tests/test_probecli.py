import csv
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gravprobe.errors import ConfigError, GridResolutionError
from gravprobe.probecli import commands, main as cli
from gravprobe.probecli.config import RunConfig, Sweep
from gravprobe.probecli.report import ValidationReport


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# gravprobe ")
    return list(csv.reader(lines[1:]))


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


# configuration ---------------------------------------------------------------


def test_config_round_trip_defaults():
    cfg = RunConfig()
    assert RunConfig.from_text(cfg.to_text()) == cfg


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-9, 1e-2), st.integers(2, 50),
       st.sampled_from(["csv", "json"]), st.booleans(), st.integers(0, 2 ** 32))
def test_config_round_trip_random(omega, gamma, nmax, fmt, validate, seed):
    cfg = RunConfig(omega=omega, gamma=gamma, ratio_nmax=nmax, format=fmt, validate=validate,
                    seed=seed, ho_t_sweep=Sweep(0.5, 2.0 + omega, 7, "log"))
    again = RunConfig.from_text(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


def test_config_comments_and_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nomega = 2.5  # trailing\nvalidate = off\nfsw_a_values = 1, 3\n")
    cfg = RunConfig.from_file(path)
    assert cfg.omega == 2.5 and cfg.validate is False and cfg.fsw_a_values == (1.0, 3.0)


@pytest.mark.parametrize("text", [
    "omega = -1", "unknown_key = 3", "ho_t_sweep = 1:0.5:10", "ho_t_sweep = 0:1:1",
    "format = xml", "validate = maybe", "ratio_nmax = 60", "just a line",
])
def test_config_rejects_bad_values(text):
    with pytest.raises(ConfigError):
        RunConfig.from_text(text)


def test_sweep_parse_and_values():
    sw = Sweep.parse("1:100:3:log")
    assert list(sw.values()) == pytest.approx([1, 10, 100])
    assert Sweep.parse(str(sw)) == sw


def test_precedence_flags_file_env(tmp_path):
    parser = cli.build_parser()
    cfg_file = tmp_path / "c.cfg"
    cfg_file.write_text("out = from_file\n")
    env = {"GRAVPROBE_OUT": "from_env"}
    assert cli.resolve_config(parser.parse_args(["table1"]), env).out == "from_env"
    assert cli.resolve_config(parser.parse_args(["table1", "--config", str(cfg_file)]), env).out == "from_file"
    args = parser.parse_args(["table1", "--config", str(cfg_file), "--out", "from_flag"])
    assert cli.resolve_config(args, env).out == "from_flag"
    assert cli.resolve_config(parser.parse_args(["table1"]), {}).out == "gravprobe-out"


# reports -------------------------------------------------------------------------


def test_report_pass_flag_matches_tolerance():
    rep = ValidationReport()
    rep.add("exact", 2.0, 2.0, 0.0)
    rep.add("close", 1.0, 1.0 + 1e-10, 1e-9)
    rep.add("far", 1.0, 1.1, 1e-3)
    assert [r.passed for r in rep.records] == [True, True, False]
    assert not rep.passed and [r.name for r in rep.failures] == ["far"]


# commands --------------------------------------------------------------------------


def test_table1_rows(tmp_path):
    assert run(tmp_path, "table1") == 0
    rows = read_csv(tmp_path / "table1.csv")
    header, body = rows[0], rows[1:]
    assert "qfi_units" in header and "method" in header
    col = {name: i for i, name in enumerate(header)}
    expected = [(Fraction(39, 8), Fraction(39, 8), 17, Fraction(68, 39)),
                (Fraction(39, 8), Fraction(315, 8), 75, Fraction(100, 59)),
                (Fraction(39, 8), Fraction(177, 8), 46, Fraction(46, 27))]
    for row, (a, b, q2, ratio) in zip(body, expected):
        assert float(row[col["qfi_1d_1"]]) == pytest.approx(float(a), rel=1e-9)
        assert float(row[col["qfi_1d_2"]]) == pytest.approx(float(b), rel=1e-9)
        assert float(row[col["qfi_2d"]]) == pytest.approx(q2, rel=1e-9)
        assert float(row[col["weighted_ratio"]]) == pytest.approx(float(ratio), rel=1e-9)


def test_csv_dialect(tmp_path):
    run(tmp_path, "table1")
    raw = (tmp_path / "table1.csv").read_bytes()
    assert b"\r\n" not in raw
    first = raw.decode("utf-8").splitlines()[0]
    assert "config_sha256=" in first and "command=table1" in first
    assert "e+00" in raw.decode()


def test_json_mirror(tmp_path):
    assert run(tmp_path, "table1", "--format", "json") == 0
    data = json.loads((tmp_path / "table1.json").read_text())
    assert "command=table1" in data["provenance"]
    row = dict(zip(data["columns"], data["rows"][0]))
    assert row["qfi_2d"] == pytest.approx(17.0)


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["ratio-surface", "--out", str(out), "--set", "ratio_nmax=12", "--workers", "1"]) == 0
        assert cli.main(["table1", "--out", str(out)]) == 0
    for name in ("ratio_surface.csv", "table1.csv", "validation_table1.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_ratio_surface(tmp_path):
    assert run(tmp_path, "ratio-surface", "--set", "ratio_nmax=10") == 0
    rows = read_csv(tmp_path / "ratio_surface.csv")[1:]
    values = {(int(r[0]), int(r[1])): float(r[2]) for r in rows}
    assert all(values[(n, n)] == 8.0 for n in range(2, 11))
    assert values[(4, 1)] < 8


def test_fsw_figure_small_sweep(tmp_path):
    code = run(tmp_path, "fsw-figure", "--set", "fsw_v0_sweep=0.1:20:60", "--set", "fsw_a_sweep=0.05:6:30")
    assert code == 0
    rows = read_csv(tmp_path / "fsw_qfi_vs_v0.csv")[1:]
    assert all(float(r[4]) == 0.0 for r in rows if int(r[2]) < 2)


def test_comparison_summary(tmp_path):
    assert run(tmp_path, "comparison") == 0
    summary = {r[0]: float(r[1]) for r in read_csv(tmp_path / "comparison_summary.csv")[1:]}
    assert summary["log10_ho_min_over_isw_max"] > 0
    assert summary["free_qfi_nondecreasing_in_sigma"] == 1.0


def test_exit_code_config_error(tmp_path, capsys):
    assert run(tmp_path, "table1", "--set", "omega=-2") == 2
    assert "configuration error" in capsys.readouterr().err


def test_exit_code_validation_failure(tmp_path):
    assert run(tmp_path, "table1", "--set", "validation_tolerance=1e-30") == 1
    assert (tmp_path / "validation_table1.csv").exists()


def test_exit_code_numerical(tmp_path, monkeypatch):
    def broken(config):
        raise GridResolutionError("did not converge")

    monkeypatch.setitem(commands.COMMANDS, "table1", broken)
    monkeypatch.setattr(cli, "COMMANDS", commands.COMMANDS)
    assert run(tmp_path, "table1") == 3


def test_exit_code_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["table1", "--out", str(blocker / "sub")]) == 2


def test_validate_off_is_empty(tmp_path):
    assert run(tmp_path, "validate", "--set", "validate=off") == 0
    assert read_csv(tmp_path / "validation_validate.csv")[1:] == []


def test_validate_default_passes(tmp_path):
    assert run(tmp_path, "validate") == 0
    rows = read_csv(tmp_path / "validation_validate.csv")
    assert len(rows) > 50
    assert all(r[-1] == "1" or r[-1].lower() == "true" for r in rows[1:])
