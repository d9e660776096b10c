import io
import json
import subprocess
import sys

import pytest

from qedstaff.cli import (
    EXIT_CONVERGENCE,
    EXIT_DOMAIN,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    TABLE_COLUMNS,
    Report,
    RunConfig,
    config_from_args,
    emit,
    main,
    parse_report,
    run,
)

HEADER = "epsilon,lambda_opt,lambda_star,lambda_bullet,r_bullet,constraint_at_star,constraint_at_bullet"
TOL = 2e-3


def invoke(argv):
    config = config_from_args(argv)
    out, err = io.StringIO(), io.StringIO()
    code = run(config, out, err)
    return code, out.getvalue(), err.getvalue()


def _check_against_reference(text, reference_rows, constraint=True):
    report = parse_report(text, "csv", "table")
    assert report.columns == TABLE_COLUMNS
    assert len(report.rows) == len(reference_rows) == 10
    cols = list(TABLE_COLUMNS[1:] if constraint else TABLE_COLUMNS[1:5])
    for row, ref in zip(report.rows, reference_rows):
        got = dict(zip(TABLE_COLUMNS, row))
        assert got["epsilon"] == pytest.approx(ref["epsilon"], abs=1e-12)
        for col in cols:
            assert got[col] == pytest.approx(ref[col], abs=TOL), (ref["epsilon"], col)


def _rows(tables, policy, retrials):
    return [r for r in tables if r["policy"] == policy and r["retrials"] == retrials]


def test_table_matches_reference_bernoulli_01(reference_tables):
    code, out, err = invoke(["table", "--servers", "100", "--policy", "bernoulli:0.1", "--variant", "dfr"])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 11
    _check_against_reference(out, _rows(reference_tables, "bernoulli:0.1", False))


def test_table_retrials_frozen(reference_tables):
    code, out, _ = invoke(["table", "--policy", "bernoulli:0.5", "--retrials", "--retrial-load", "frozen"])
    assert code == EXIT_OK
    _check_against_reference(out, _rows(reference_tables, "bernoulli:0.5", True))


def test_table_retrials_default_staffing_columns(reference_tables):
    code, out, _ = invoke(["table", "--policy", "bernoulli:0.5", "--retrials"])
    assert code == EXIT_OK
    _check_against_reference(out, _rows(reference_tables, "bernoulli:0.5", True), constraint=False)


def test_numbers_have_six_decimals():
    _, out, _ = invoke(["table", "--policy", "bernoulli:0.1", "--eps-list", "0.01,0.05"])
    for line in out.splitlines()[1:]:
        for cell in line.split(","):
            assert len(cell.split(".")[1]) == 6


def test_eps_list_override():
    _, out, _ = invoke(["table", "--policy", "bernoulli:0.1", "--eps-list", "0.01,0.05"])
    assert len(out.splitlines()) == 3


def test_deterministic_output():
    argv = ["table", "--policy", "bernoulli:0.3", "--eps-list", "0.02,0.07"]
    assert invoke(argv)[1] == invoke(argv)[1]


def test_measure_retrials_single_server():
    code, out, _ = invoke(["measure", "--servers", "1", "--lambda", "0.5", "--policy", "loss", "--retrials"])
    assert code == EXIT_OK
    report = parse_report(out, "csv", "measure")
    row = dict(zip(report.columns, report.rows[0]))
    assert row["omega"] == pytest.approx(0.5, abs=1e-6)
    assert row["d_f_r"] == pytest.approx(0.5, abs=1e-6)


def test_retrial_command():
    code, out, _ = invoke(["retrial", "--lambda", "80", "--policy", "bernoulli:0.1"])
    assert code == EXIT_OK
    report = parse_report(out, "csv", "retrial")
    row = dict(zip(report.columns, report.rows[0]))
    assert row["gamma"] == pytest.approx(2.0)
    assert row["omega"] > 0


def test_staff_json():
    code, out, _ = invoke(["staff", "--epsilon", "0.01", "--policy", "bernoulli:0.1", "--format", "json"])
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["columns"] == list(TABLE_COLUMNS)
    assert body["rows"][0]["lambda_opt"] == pytest.approx(75.324, abs=TOL)


def test_bistability_commands():
    code, out, err = invoke(["bistability", "--servers", "10", "--epsilon", "1.0",
                             "--policy", "bernoulli:0.3", "--variant", "df"])
    assert code == EXIT_OK
    assert len(out.splitlines()) == 3
    assert err.startswith("note:")
    code, out, _ = invoke(["bistability", "--servers", "100", "--epsilon", "60", "--problem", "4"])
    assert code == EXIT_OK
    assert len(out.splitlines()) == 3
    code, out, _ = invoke(["bistability", "--servers", "100", "--epsilon", "400", "--problem", "4"])
    assert code == EXIT_OK
    assert len(out.splitlines()) == 1


def test_figure2_single_and_grouped():
    code, out, _ = invoke(["figure2", "--servers", "10", "--grid-size", "32"])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 32
    assert all(len(line.split("\t")) == 2 for line in lines)
    code, out, _ = invoke(["figure2", "--servers", "1", "5", "--grid-size", "8"])
    lines = out.splitlines()
    assert lines[0] == "# s=1" and lines[9] == "# s=5"
    report = parse_report(out, "csv", "figure2")
    assert report.groups == (1,) * 8 + (5,) * 8


@pytest.mark.parametrize("argv", [
    ["table", "--policy", "bernoulli:0.2", "--eps-list", "0.01,0.04"],
    ["figure2", "--servers", "1", "10", "--grid-size", "16"],
    ["measure", "--lambda", "90", "--policy", "threshold:3"],
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_report_round_trip(argv, fmt):
    config = config_from_args(argv + ["--format", fmt])
    out = io.StringIO()
    assert run(config, out, io.StringIO()) == EXIT_OK
    text = out.getvalue()
    report = parse_report(text, fmt, config.command)
    assert emit(report, fmt) == text


def test_emit_json_round_trip_object():
    report = Report.build("table", TABLE_COLUMNS, [(0.01, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)])
    assert parse_report(emit(report, "json"), "json") == report


def test_config_round_trip():
    config = config_from_args(["table", "--policy", "bernoulli:0.5", "--retrials", "--eps-list", "0.01,0.02"])
    assert RunConfig.from_json(config.to_json()) == config
    config = config_from_args(["figure2", "--servers", "1", "5"])
    assert RunConfig.from_json(config.to_json()) == config


def test_config_defaults():
    config = RunConfig("table")
    assert (config.servers, config.variant, config.format, config.tol) == (100, "dfr", "csv", 1e-10)
    assert config.eps_list == tuple(round(0.01 * k, 2) for k in range(1, 11))


def test_domain_error_names_interval():
    code, out, err = invoke(["staff", "--epsilon", "6.0", "--policy", "bernoulli:0.5"])
    assert code == EXIT_DOMAIN
    assert out == ""
    assert "(0, 5)" in err


def test_unknown_policy_is_usage_error():
    code, _, err = invoke(["staff", "--epsilon", "0.1", "--policy", "fancy:3"])
    assert code == EXIT_USAGE
    assert "usage" in err


def test_missing_series_file_is_usage_error(tmp_path):
    code, _, _ = invoke(["staff", "--epsilon", "0.1", "--policy", f"series:{tmp_path / 'none.txt'}"])
    assert code == EXIT_USAGE


def test_series_file_policy(tmp_path):
    path = tmp_path / "policy.txt"
    path.write_text("P=0.3\n0.3\n0.09\n")
    code_file, out_file, _ = invoke(["staff", "--epsilon", "0.05", "--policy", f"series:{path}"])
    code_b, out_b, _ = invoke(["staff", "--epsilon", "0.05", "--policy", "bernoulli:0.3"])
    assert code_file == code_b == EXIT_OK
    assert out_file == out_b


def test_bad_flags_exit_usage():
    assert main(["table", "--servers", "0"]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["measure"]) == EXIT_USAGE


def test_unwritable_output(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = invoke(["staff", "--epsilon", "0.05", "--output", str(target)])
    assert code == EXIT_IO
    assert "i/o error" in err


def test_output_file(tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = invoke(["staff", "--epsilon", "0.05", "--output", str(target)])
    assert code == EXIT_OK and out == ""
    assert target.read_text().splitlines()[0] == HEADER


def test_failed_self_check_exit_code():
    # a negative tolerance makes the residual check fail on purpose
    config = RunConfig("retrial", servers=10, load=5.0, policy_spec="bernoulli:0.3", tol=-1.0)
    assert run(config, io.StringIO(), io.StringIO()) == EXIT_CONVERGENCE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qedstaff", "staff", "--epsilon", "0.01",
                           "--policy", "bernoulli:0.1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == HEADER
