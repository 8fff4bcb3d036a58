import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv

from .__version__ import __version__
from core.classification import BUCKETS, get_classification_color, get_classification_emoji
from core.config import MatrixConfig, TargetConfig, load_config, merge_env_config
from core.errors import CtDiffError
from core.logging import setup_logging
from diffing.engine import DiffParams, analyze_trace_set
from orchestrator.matrix import ExperimentSpec, expand_matrix, experiment_id_for
from orchestrator.producers import init_default_producers
from orchestrator.runner import REPORT_NAME, analyze_collected, collect_trace_set, run_matrix
from reporting.aggregate import MatrixSummary
from reporting.findings import build_report
from reporting.render import ReportFormat, render_report
from reporting.symbols import load_known_issues, load_symbol_map
from tracing.store import read_trace_set, write_trace_set

# Load .env if present
load_dotenv()

logger = logging.getLogger("ctdiff")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2
EXIT_FINDINGS = 3


class CtDiffArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _console():
    try:
        from rich.console import Console

        return Console()
    except ImportError:
        return None


def _diff_params(args: argparse.Namespace) -> DiffParams:
    return DiffParams(window=args.window, horizon=args.horizon)


def _single_config(args: argparse.Namespace, output_dir: str) -> MatrixConfig:
    """One-target configuration for ``trace`` and ``run``."""
    if args.producer == "minivm" and not args.program:
        raise ValueError("--producer minivm needs --program")
    if args.producer == "external" and not args.command:
        raise ValueError("--producer external needs --command")
    if args.program or args.target:
        target = TargetConfig.from_value({"program": args.program, "command": args.target})
    else:
        target = TargetConfig(name="external")
    config = MatrixConfig(
        targets=[target],
        runs_per_experiment=args.runs,
        diff=_diff_params(args),
        producer=args.producer,
        external_cmd=args.command,
        symbol_map=getattr(args, "symbols", None),
        known_issues=getattr(args, "filter", None),
        output_dir=output_dir,
        secret_len=args.secret_len,
        timeout=args.timeout,
    )
    config.validate()
    return config


def _single_spec(config: MatrixConfig) -> ExperimentSpec:
    return expand_matrix(config)[0]


def _emit(data: bytes, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        logger.info(f"report written to {path}")
    else:
        sys.stdout.write(data.decode("utf-8"))


def _findings_exit(args: argparse.Namespace, unfiltered: int) -> int:
    if args.fail_on_findings and unfiltered:
        logger.warning(f"{unfiltered} unfiltered finding(s)")
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    config = _single_config(args, args.out)
    spec = _single_spec(config)
    with tempfile.TemporaryDirectory(prefix="ctdiff-trace-") as workdir:
        trace_set = collect_trace_set(spec, config, Path(workdir))
    out = write_trace_set(trace_set, args.out)
    print(f"{len(trace_set.traces)} traces of {trace_set.program_id} written to {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    params = _diff_params(args)
    trace_set = read_trace_set(args.traces)
    raw = analyze_trace_set(trace_set, params)
    symbols = load_symbol_map(args.symbols) if args.symbols else None
    known = load_known_issues(args.filter) if args.filter else None

    parameters: Dict[str, Any] = {
        **trace_set.producer_meta,
        "program": trace_set.program_id,
        "runs": len(trace_set.traces),
        "window": params.window,
        "horizon": params.horizon,
    }
    report = build_report(experiment_id_for(parameters), parameters, raw, trace_set, symbols, known)
    _emit(render_report(report, args.format), args.out)
    return _findings_exit(args, len(report.unfiltered))


def cmd_run(args: argparse.Namespace) -> int:
    config = _single_config(args, args.out)
    spec = _single_spec(config)
    exp_dir = config.output_path / spec.experiment_id
    exp_dir.mkdir(parents=True, exist_ok=True)

    trace_set = collect_trace_set(spec, config, exp_dir)
    report = analyze_collected(spec, config, trace_set)
    write_trace_set(trace_set, exp_dir)
    (exp_dir / REPORT_NAME).write_bytes(render_report(report))
    logger.info(f"traces and report written to {exp_dir}")

    _emit(render_report(report, args.format), None)
    return _findings_exit(args, len(report.unfiltered))


def _print_summary(summary: MatrixSummary) -> None:
    console = _console()
    header = [*BUCKETS, "failed"]
    for key in summary.group_by:
        groups = summary.tables.get(key, {})
        if console is not None:
            from rich.table import Table

            table = Table(title=f"Classification by {key}")
            table.add_column(key, style="bold")
            for bucket in header:
                table.add_column(
                    f"{get_classification_emoji(bucket)} {bucket}",
                    justify="right",
                    style=get_classification_color(bucket),
                )
            for group, counts in groups.items():
                table.add_row(group, *(str(v) for v in counts.as_row()))
            console.print(table)
        else:
            print(f"\n=== Classification by {key} ===")
            print("  " + ", ".join([key, *header]))
            for group, counts in groups.items():
                print("  " + ", ".join([group, *(str(v) for v in counts.as_row())]))

    totals = summary.totals
    print(
        f"\n{totals.get('experiments', 0)} experiment(s): "
        f"{totals.get('succeeded', 0)} succeeded, {totals.get('failed', 0)} failed"
    )
    for failure in summary.failures:
        print(f"  ⚫ {failure.experiment_id}: {failure.error}")


def cmd_matrix(args: argparse.Namespace) -> int:
    config = merge_env_config(load_config(args.config))
    if args.jobs < 1:
        raise ValueError(f"--jobs must be >= 1, got {args.jobs}")
    summary = run_matrix(config, parallelism=args.jobs, html_path=args.html, db_path=args.save_db)
    _print_summary(summary)
    logger.info(f"summary written to {config.output_path}")
    unfiltered = summary.totals.get("control_flow", 0) + summary.totals.get("memory_address", 0)
    return _findings_exit(args, unfiltered)


def _print_fixtures(entries) -> None:
    console = _console()
    if console is not None:
        from rich.table import Table

        table = Table(title="Fixture corpus")
        table.add_column("Fixture", style="cyan")
        table.add_column("Variant")
        table.add_column("Category")
        table.add_column("Expected")
        table.add_column("Min runs", justify="right")
        for e in entries:
            expected = e.expected.classification.value
            table.add_row(
                e.name, e.tag, e.category,
                f"{get_classification_emoji(expected)} {expected}", str(e.min_runs),
            )
        console.print(table)
    else:
        for e in entries:
            print(f"  {e.name:<22} {e.tag:<6} {e.category:<20} {e.expected.classification.value}")


def _print_suite(result) -> None:
    console = _console()
    marks = {"pass": "✅", "fail": "❌", "skipped": "⏭️", "error": "⚫"}
    if console is not None:
        from rich.table import Table

        table = Table(title=f"Fixture suite (runs={result.runs}, W={result.params.window})")
        table.add_column("", width=2)
        table.add_column("Fixture", style="cyan")
        table.add_column("Variant")
        table.add_column("Result")
        for o in result.outcomes:
            table.add_row(marks[o.status], o.entry.name, o.entry.tag, o.describe())
        console.print(table)
    else:
        for o in result.outcomes:
            print(f"  {marks[o.status]} {o.entry.name}: {o.describe()}")
    counts = result.counts()
    print(
        f"\n{counts['pass']} passed, {counts['fail']} failed, "
        f"{counts['error']} errored, {counts['skipped']} skipped"
    )


def cmd_fixtures(args: argparse.Namespace) -> int:
    from fixtures.suite import list_fixtures, run_fixture_suite

    if args.list:
        _print_fixtures(list_fixtures(args.manifest))
        return EXIT_OK
    result = run_fixture_suite(
        params=_diff_params(args),
        runs=args.runs,
        parallelism=args.jobs,
        manifest_path=args.manifest,
    )
    _print_suite(result)
    return EXIT_OK if result.passed else EXIT_INTERNAL


def _add_diff_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", "-w", type=int, default=8, help="Merge window W (default: 8)")
    p.add_argument("--horizon", type=int, default=4096, help="Merge search horizon H (default: 4096)")


def _add_producer_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--producer", choices=["minivm", "external"], default="minivm",
                   help="Trace producer (default: minivm)")
    p.add_argument("--program", help="MiniISA assembly source (minivm) or program passed as {target}")
    p.add_argument("--command", help="External command template with {target} {run} {secret_hex} {out}")
    p.add_argument("--target", help="Value for {target} in --command")
    p.add_argument("--runs", "-n", type=int, default=int(os.environ.get("CTDIFF_RUNS", "8")),
                   help="Traces to collect, one secret each (default: 8)")
    p.add_argument("--secret-len", type=int, default=32,
                   help="Secret bytes per run for the external producer (default: 32)")
    p.add_argument("--timeout", type=float, default=300.0,
                   help="External command timeout in seconds (default: 300)")


def build_parser() -> argparse.ArgumentParser:
    common = CtDiffArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Verbose logging")
    common.add_argument("--quiet", "-q", action="store_true", help="Only output warnings and errors")

    findings = CtDiffArgumentParser(add_help=False)
    findings.add_argument("--fail-on-findings", action="store_true",
                          help="Exit with status 3 when unfiltered findings remain")

    parser = CtDiffArgumentParser(
        prog="ctdiff",
        description="ctdiff - differential address-trace analysis for constant-time code",
        epilog="Examples:\n"
        "  ctdiff run --program src/fixtures/asm/select_leaky.s\n"
        "  ctdiff matrix --config ctdiff.example.yaml --jobs 4 --html summary.html\n"
        "  ctdiff fixtures --run --window 1",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    parser.add_argument("--version", "-V", action="version", version=f"ctdiff v{__version__}")
    sub = parser.add_subparsers(dest="command_name", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("trace", parents=[common], help="Collect a trace set")
    _add_producer_options(p)
    p.add_argument("--out", "-o", required=True, help="Directory for run-NN.trace files")
    p.set_defaults(func=cmd_trace, window=8, horizon=4096)

    p = sub.add_parser("analyze", parents=[common, findings], help="Analyze a trace set directory")
    p.add_argument("--traces", required=True, help="Trace-set directory")
    p.add_argument("--symbols", help="Symbol map file")
    p.add_argument("--filter", help="Known-issue list file")
    _add_diff_options(p)
    p.add_argument("--out", "-o", help="Write the report here (default: stdout)")
    p.add_argument("--format", "-f", choices=[f.value for f in ReportFormat], default="structured",
                   help="Report format (default: structured)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", parents=[common, findings], help="Collect and analyze one experiment")
    _add_producer_options(p)
    p.add_argument("--symbols", help="Symbol map file")
    p.add_argument("--filter", help="Known-issue list file")
    _add_diff_options(p)
    p.add_argument("--out", "-o", default=os.environ.get("CTDIFF_OUTPUT_DIR", "ctdiff-out"),
                   help="Output directory (default: ctdiff-out)")
    p.add_argument("--format", "-f", choices=[f.value for f in ReportFormat], default="human",
                   help="Report format printed to stdout (default: human)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("matrix", parents=[common, findings], help="Run an experiment matrix")
    p.add_argument("--config", "-c", required=True, help="Matrix configuration (JSON or YAML)")
    p.add_argument("--jobs", "-j", type=int, default=int(os.environ.get("CTDIFF_JOBS", "1")),
                   help="Experiments run concurrently (default: 1)")
    p.add_argument("--html", help="Also write an HTML summary page")
    p.add_argument("--save-db", default=os.environ.get("CTDIFF_DB_PATH"),
                   help="Index reports in this SQLite database")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("fixtures", parents=[common], help="List or run the built-in fixture suite")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--run", action="store_true", help="Run the suite against the manifest")
    mode.add_argument("--list", action="store_true", help="List the fixtures")
    p.add_argument("--manifest", help="Alternative fixture manifest")
    p.add_argument("--runs", "-n", type=int, default=8, help="Traces per fixture (default: 8)")
    _add_diff_options(p)
    p.add_argument("--jobs", "-j", type=int, default=int(os.environ.get("CTDIFF_JOBS", "1")),
                   help="Fixtures run concurrently (default: 1)")
    p.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    if args.quiet:
        level = logging.WARNING
    use_rich = os.environ.get("USE_RICH_LOGGER", "1") not in ("0", "false", "False")
    setup_logging(level=level, use_rich=use_rich)

    init_default_producers()
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except (ValueError, OSError) as e:
        # input problems: bad config, trace, assembly, symbol map or missing file
        print(f"ctdiff: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CtDiffError as e:
        print(f"ctdiff: error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
