"""Test the ctdiff command line."""

import json

import pytest

from ctdiff.__version__ import __version__
from ctdiff.cli import EXIT_FINDINGS, EXIT_OK, EXIT_USAGE, build_parser, main
from fixtures.suite import FIXTURE_DIR

ASM = FIXTURE_DIR / "asm"


@pytest.fixture(autouse=True)
def plain_logging(monkeypatch):
    monkeypatch.setenv("USE_RICH_LOGGER", "0")


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert f"ctdiff v{__version__}" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["run", "--window", "eight"],
        ["fixtures"],
        ["fixtures", "--list", "--run"],
        ["analyze"],
    ],
)
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE


def test_parser_defaults():
    args = build_parser().parse_args(["run", "--program", "x.s"])
    assert (args.window, args.horizon, args.producer, args.format) == (8, 4096, "minivm", "human")


def test_fixtures_list(capsys):
    assert main(["fixtures", "--list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "select_leaky" in out
    assert "split_cond_ct" in out


def test_fixtures_run(capsys):
    assert main(["fixtures", "--run", "--runs", "2", "-q"]) == EXIT_OK
    assert "14 passed, 0 failed" in capsys.readouterr().out


def _run(tmp_path, name, *extra):
    return main(
        ["run", "-q", "--program", str(ASM / f"{name}.s"), "--out", str(tmp_path / "out"), *extra]
    )


def test_run_structured(tmp_path, capsys):
    assert _run(tmp_path, "select_leaky", "--format", "structured") == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["classification"] == "cf_only"
    assert report["findings"][0]["function_name"] == "select_leaky"
    assert (tmp_path / "out" / report["experiment_id"] / "report.json").exists()


def test_run_human(tmp_path, capsys):
    assert _run(tmp_path, "cmovznz_addr_leaky") == EXIT_OK
    out = capsys.readouterr().out
    assert "classification: mem_only" in out
    assert "MEM cmovznz_addr_leaky" in out


def test_fail_on_findings(tmp_path):
    assert _run(tmp_path, "select_leaky", "--fail-on-findings") == EXIT_FINDINGS
    assert _run(tmp_path, "select_ct", "--fail-on-findings") == EXIT_OK


def test_filter_clears_exit_status(tmp_path):
    known = tmp_path / "known.txt"
    known.write_text("fn select_leaky\n")
    assert _run(tmp_path, "select_leaky", "--fail-on-findings", "--filter", str(known)) == EXIT_OK


def test_run_needs_program(tmp_path):
    assert main(["run", "-q", "--out", str(tmp_path)]) == EXIT_USAGE


def test_run_missing_program(tmp_path):
    assert main(["run", "-q", "--program", str(tmp_path / "nope.s"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_trace_then_analyze(tmp_path, capsys):
    traces = tmp_path / "traces"
    assert main(["trace", "-q", "--program", str(ASM / "ghash_carry_leaky.s"), "--out", str(traces)]) == EXIT_OK
    assert len(list(traces.glob("run-*.trace"))) == 8

    report_path = tmp_path / "report.json"
    code = main(["analyze", "-q", "--traces", str(traces), "--format", "structured", "--out", str(report_path)])
    assert code == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["classification"] == "cf_only"
    assert report["parameters"]["producer"] == "minivm"
    assert report["findings"][0]["function_name"] == "<unknown>"

    symbols = tmp_path / "prog.sym"
    symbols.write_text("0 100000 whole_program\n")
    capsys.readouterr()
    assert main(["analyze", "-q", "--traces", str(traces), "--symbols", str(symbols), "--format", "human"]) == EXIT_OK
    assert "CF  whole_program" in capsys.readouterr().out


def test_analyze_missing_directory(tmp_path):
    assert main(["analyze", "-q", "--traces", str(tmp_path / "absent")]) == EXIT_USAGE


def _matrix_config(tmp_path, *names):
    path = tmp_path / "matrix.json"
    path.write_text(
        json.dumps(
            {
                "targets": [str(ASM / f"{n}.s") for n in names],
                "dimensions": {"opt": ["O0", "O2"]},
                "output_dir": "out",
            }
        )
    )
    return path


def test_matrix(tmp_path, capsys):
    config = _matrix_config(tmp_path, "select_leaky", "select_ct")
    html_path = tmp_path / "summary.html"
    db = tmp_path / "ctdiff.db"
    code = main(["matrix", "-q", "--config", str(config), "--jobs", "2", "--html", str(html_path), "--save-db", str(db)])

    assert code == EXIT_OK
    assert "4 experiment(s): 4 succeeded, 0 failed" in capsys.readouterr().out
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["group_by"] == ["target", "opt"]
    assert summary["totals"]["cf_only"] == 2
    assert html_path.exists()
    assert db.exists()


def test_matrix_fail_on_findings(tmp_path):
    config = _matrix_config(tmp_path, "select_leaky")
    assert main(["matrix", "-q", "--config", str(config), "--fail-on-findings"]) == EXIT_FINDINGS


def test_matrix_bad_config(tmp_path):
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps({"targets": ["a.s"], "runs_per_experiment": 1}))
    assert main(["matrix", "-q", "--config", str(path)]) == EXIT_USAGE


def test_matrix_jobs_must_be_positive(tmp_path):
    config = _matrix_config(tmp_path, "select_ct")
    assert main(["matrix", "-q", "--config", str(config), "--jobs", "0"]) == EXIT_USAGE
