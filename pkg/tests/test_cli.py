"""Command-line front end tests: parsing, file outputs, determinism, reports."""

import csv
import json
import math
from pathlib import Path

import pytest
from pytest import approx, raises

from vaughanlab import bdh_variance, build_sieve, build_tables, mu2_over_phi_sum
from vaughanlab.cli import (
    CONSTANT_COLUMNS,
    RESULT_COLUMNS,
    ExperimentConfig,
    UsageError,
    _fmt,
    _resolve_q,
    _resolve_q_low,
    _resolve_r,
    _resolve_weight,
    config_from_text,
    config_to_text,
    main,
    report,
)


def read_csv(path: Path):
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_config_round_trip():
    cfg = ExperimentConfig(
        command="vaughan", x=10_000, q=500, r=10.0, q_low="auto", v_list=[1, 2, 6], threads=2
    )
    back = config_from_text(config_to_text(cfg))
    assert back == cfg


def test_config_parse_errors():
    with raises(UsageError):
        config_from_text("no_such_key = 1\n")
    with raises(UsageError):
        config_from_text("just a line\n")
    cfg = config_from_text("# comment\n\nx = 100\nv_list = 1,2,3\nr = 2.5\n")
    assert cfg.x == 100 and cfg.v_list == [1, 2, 3] and cfg.r == 2.5


def test_q_and_r_resolution():
    with raises(UsageError):
        _resolve_q(ExperimentConfig(command="vaughan", x=100))
    with raises(UsageError):
        _resolve_q(ExperimentConfig(command="vaughan", x=100, q=10, b_exp=1.0))
    assert _resolve_q(ExperimentConfig(command="vaughan", x=100, q=10)) == 10
    got = _resolve_q(ExperimentConfig(command="vaughan", x=10_000, b_exp=1.0))
    assert got == int(10_000 / math.log(10_000))
    with raises(UsageError):
        _resolve_r(ExperimentConfig(command="vaughan", x=100))
    assert _resolve_r(ExperimentConfig(command="vaughan", x=10_000, g_exp=2.0)) == approx(
        math.log(10_000) ** 2, rel=1e-15
    )
    cfg = ExperimentConfig(command="vaughan", x=10_000, q_low="auto")
    assert _resolve_q_low(cfg, 10_000, 50.0) == approx(200.0, rel=1e-15)
    with raises(UsageError):
        _resolve_q_low(ExperimentConfig(q_low="-3"), 100, 5.0)
    with raises(UsageError):
        _resolve_q_low(ExperimentConfig(q_low="soon"), 100, 5.0)
    with raises(UsageError):
        _resolve_weight(ExperimentConfig(weight="chi"))


def test_fmt_uses_12_significant_digits():
    assert _fmt(0.1) == "0.1"
    assert _fmt(1234567.8901234567) == "1234567.89012"
    assert _fmt(None) == "" and _fmt("") == ""
    assert _fmt(7) == "7"


def test_constants_command_writes_table(tmp_path, capsys):
    code, out, err = run_cli(
        capsys, "constants", "--cutoff", "100000", "--out", str(tmp_path)
    )
    assert code == 0 and err == ""
    header, rows = read_csv(tmp_path / "results.csv")
    assert header == CONSTANT_COLUMNS
    by_name = {r[0]: r for r in rows}
    # c0 = 1 + gamma + logp_sum at this cutoff
    assert float(by_name["c0"][1]) == approx(
        1.0 + 0.5772156649015332 + 0.7553566278090919, rel=1e-11
    )
    assert by_name["t(1)"][4] == "below 1"
    assert by_name["t(2)"][4] == ""
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["version"]
    assert "primes_sha256" in manifest["checksums"]
    assert (tmp_path / "results.json").exists()
    assert "c0" in out


def test_fr_table_command(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "fr-table", "--x", "50", "--R", "10", "--out", str(tmp_path)
    )
    assert code == 0, err
    header, rows = read_csv(tmp_path / "results.csv")
    assert header == ["n", "lambda", "fr", "delta"]
    assert len(rows) == 50
    tables = build_tables(build_sieve(50))
    first = rows[0]
    assert int(first[0]) == 1
    assert float(first[2]) == approx(mu2_over_phi_sum(10.0, tables), rel=1e-11)
    assert float(first[3]) == approx(-float(first[2]), rel=1e-11)


def test_theorem3_hypothesis_guard(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "theorem3", "--x", "1000", "--R", "11", "--out", str(tmp_path)
    )
    assert code == 2
    payload = json.loads(err)
    assert payload["error"] == "usage"
    assert "x^(1/3)" in payload["message"]


def test_theorem3_small_run(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        "theorem3", "--x", "10000", "--R", "10", "--v", "1,2,3", "--out", str(tmp_path),
    )
    assert code == 0, err
    header, rows = read_csv(tmp_path / "results.csv")
    assert header == RESULT_COLUMNS
    assert [r[header.index("v")] for r in rows] == ["1", "2", "3"]
    assert all(r[header.index("mode")] == "progression" for r in rows)


def test_variance_run_is_thread_invariant(tmp_path, capsys):
    outs = []
    for threads in ("1", "2"):
        out_dir = tmp_path / threads
        code, _, err = run_cli(
            capsys,
            "vaughan", "--x", "10000", "--Q", "500", "--R", "10",
            "--threads", threads, "--out", str(out_dir),
        )
        assert code == 0, err
        outs.append(read_csv(out_dir / "results.csv"))
    (h1, rows1), (h2, rows2) = outs
    assert h1 == h2 == RESULT_COLUMNS
    skip = {h1.index("wall_time_ms")}
    for r1, r2 in zip(rows1, rows2):
        for i, (a, b) in enumerate(zip(r1, r2)):
            if i not in skip:
                assert a == b


def test_bdh_command_matches_library(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "bdh", "--x", "1000", "--Q", "100", "--out", str(tmp_path)
    )
    assert code == 0, err
    header, rows = read_csv(tmp_path / "results.csv")
    want = bdh_variance(1000, 100, build_tables(build_sieve(1000))).empirical
    assert float(rows[0][header.index("empirical")]) == approx(want, rel=1e-11)
    assert rows[0][header.index("mode")] == "bdh"


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VAUGHANLAB_OUT", str(tmp_path / "envout"))
    code, _, err = run_cli(capsys, "constants", "--cutoff", "100000")
    assert code == 0, err
    assert (tmp_path / "envout" / "results.csv").exists()


def test_flags_override_config_file(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("x = 50\nr = 5\n")
    code, _, err = run_cli(
        capsys,
        "fr-table", "--config", str(cfg_file), "--R", "10", "--out", str(tmp_path),
    )
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["x"] == 50
    assert manifest["config"]["r"] == 10.0
    assert manifest["derived"]["R"] == 10.0


def test_missing_config_file_is_usage_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "fr-table", "--config", str(tmp_path / "nope.cfg"), "--R", "2", "--x", "10"
    )
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_report_requires_existing_manifest(tmp_path, capsys):
    code, _, err = run_cli(capsys, "report", str(tmp_path / "missing" / "manifest.json"))
    assert code == 1
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_report_merges_runs_and_contrasts_modes(tmp_path, capsys):
    for cmd, sub in (("vaughan", "a"), ("theorem5", "b")):
        code, _, err = run_cli(
            capsys,
            cmd, "--x", "10000", "--Q", "500", "--R", "10", "--out", str(tmp_path / sub),
        )
        assert code == 0, err
    text = report([str(tmp_path / "a" / "manifest.json"), str(tmp_path / "b" / "manifest.json")])
    assert "run comparison" in text
    assert "log R coefficient contrast" in text
    assert "-1.392073" in text
    assert "mode=coprime" in text


def test_suite_quick_end_to_end(tmp_path, capsys):
    code, out, err = run_cli(capsys, "suite", "--scale", "quick", "--out", str(tmp_path))
    assert code == 0, err
    assert (tmp_path / "report.txt").exists()
    text = (tmp_path / "report.txt").read_text()
    assert "run comparison" in text
    assert "below 1" in text  # t(1) flag survives into the merged report
    for sub in ("constants", "theorem3", "vaughan", "theorem5", "theorem4", "bdh"):
        assert (tmp_path / sub / "results.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["derived"]["runs"]) == 6


def test_missing_subcommand_is_usage_error(capsys):
    code, _, err = run_cli(capsys)
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_json_echo_format(tmp_path, capsys):
    code, out, err = run_cli(
        capsys,
        "fr-table", "--x", "10", "--R", "2", "--format", "json", "--out", str(tmp_path),
    )
    assert code == 0, err
    rows = json.loads(out)
    assert len(rows) == 10 and rows[0]["n"] == 1
