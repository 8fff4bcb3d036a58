"""Per-experiment pipeline and the bounded worker pool that runs a matrix.

Each experiment owns ``output_dir/<experiment_id>/``: the directory is
cleared, then filled with one ``run-NN.trace`` per secret, ``traceset.json``
and either ``report.json`` or ``failure.json``. The matrix summary is written
once, after every cell has finished.
"""

import asyncio
import json
import logging
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Union

from core.config import MatrixConfig
from core.errors import DeterminismError, TraceSetError
from core.producer import get_registry
from core.storage import save_report
from ctdiff.__version__ import __version__
from diffing.engine import analyze_trace_set
from minivm.seeding import derive_secret
from orchestrator.matrix import ExperimentSpec, expand_matrix
from orchestrator.producers import init_default_producers
from reporting.aggregate import FailureRecord, MatrixSummary, aggregate_summaries, emit_tables
from reporting.findings import AnalysisReport, build_report
from reporting.render import render_report
from reporting.symbols import load_known_issues, load_symbol_map
from tracing.model import TraceSet, scope_filter, validate_trace
from tracing.store import write_trace_set

logger = logging.getLogger("ctdiff.runner")

ExperimentResult = Union[AnalysisReport, FailureRecord]

SUMMARY_NAME = "summary.json"
REPORT_NAME = "report.json"
FAILURE_NAME = "failure.json"


@contextmanager
def _workdir(spec: ExperimentSpec, config: MatrixConfig, persist: bool) -> Iterator[Path]:
    if not persist:
        with tempfile.TemporaryDirectory(prefix=f"ctdiff-{spec.experiment_id}-") as tmp:
            yield Path(tmp)
        return
    d = config.output_path / spec.experiment_id
    if d.exists():
        shutil.rmtree(d)
    d.mkdir(parents=True)
    yield d


def collect_trace_set(spec: ExperimentSpec, config: MatrixConfig, workdir: Path) -> TraceSet:
    """Produce, validate and scope-filter one trace per derived secret.

    Raises:
        ProducerError: the producer could not deliver a trace
        DeterminismError: run 0 traced twice gave different traces
        TraceSetError: a produced trace is malformed
    """
    producer = get_registry().get(config.producer)
    length = producer.secret_length(spec, config)
    secrets = [derive_secret(i, length) for i in range(config.runs_per_experiment)]

    if config.determinism_check and not producer.check_determinism(spec, config, secrets[0], workdir):
        raise DeterminismError(f"{spec.name}: run 0 produced different traces on repeat")

    traces = []
    for secret in secrets:
        trace = producer.produce(spec, config, secret, workdir)
        problems = validate_trace(trace)
        if problems:
            more = f" (+{len(problems) - 3} more)" if len(problems) > 3 else ""
            raise TraceSetError(f"run {secret.run_index}: " + "; ".join(problems[:3]) + more)
        if config.scope:
            trace = scope_filter(trace, config.scope)
        traces.append(trace)

    return TraceSet(
        program_id=spec.name,
        traces=tuple(traces),
        producer_meta={"producer": producer.name, **spec.parameters},
    )


def analyze_collected(spec: ExperimentSpec, config: MatrixConfig, trace_set: TraceSet) -> AnalysisReport:
    """Difference a collected trace set and build the experiment report."""
    producer = get_registry().get(config.producer)
    raw = analyze_trace_set(trace_set, config.diff)

    symbols = load_symbol_map(spec.symbol_map) if spec.symbol_map else producer.symbol_map(spec, config)
    known = load_known_issues(spec.known_issues) if spec.known_issues else None

    parameters = {
        **spec.parameters,
        "producer": producer.name,
        "program": spec.program.name if spec.program else spec.command,
        "runs": config.runs_per_experiment,
        "window": config.diff.window,
        "horizon": config.diff.horizon,
    }
    return build_report(spec.experiment_id, parameters, raw, trace_set, symbols, known)


def _write_failure(spec: ExperimentSpec, config: MatrixConfig, failure: FailureRecord) -> None:
    d = config.output_path / spec.experiment_id
    try:
        d.mkdir(parents=True, exist_ok=True)
        (d / FAILURE_NAME).write_text(json.dumps(failure.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        logger.warning(f"cannot write {FAILURE_NAME} for {spec.experiment_id}: {e}")


def run_experiment(
    spec: ExperimentSpec,
    config: MatrixConfig,
    persist: bool = True,
) -> ExperimentResult:
    """Collect traces for one cell, analyze them and return the report.

    Any exception, including one raised while preparing or writing the
    experiment directory, becomes a :class:`FailureRecord`; one broken cell
    never stops the matrix.
    """
    init_default_producers()
    try:
        with _workdir(spec, config, persist) as workdir:
            trace_set = collect_trace_set(spec, config, workdir)
            report = analyze_collected(spec, config, trace_set)
            if persist:
                write_trace_set(trace_set, workdir)
                (workdir / REPORT_NAME).write_bytes(render_report(report))
    except Exception as e:
        failure = FailureRecord(spec.experiment_id, f"{type(e).__name__}: {e}", dict(spec.parameters))
        logger.warning(f"experiment {spec.experiment_id} ({spec.name}) failed: {failure.error}")
        if persist:
            _write_failure(spec, config, failure)
        return failure

    logger.info(
        f"experiment {spec.experiment_id} ({spec.name}): {report.classification.value}, "
        f"{len(report.unfiltered)} unfiltered finding(s)"
    )
    return report


async def run_experiments_async(
    specs: Sequence[ExperimentSpec],
    config: MatrixConfig,
    parallelism: int = 1,
    persist: bool = True,
) -> List[ExperimentResult]:
    """Run experiments in worker threads, at most ``parallelism`` at a time.

    Results are returned in ``specs`` order regardless of completion order.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    semaphore = asyncio.Semaphore(parallelism)

    async def worker(spec: ExperimentSpec) -> ExperimentResult:
        async with semaphore:
            return await asyncio.to_thread(run_experiment, spec, config, persist)

    return list(await asyncio.gather(*(worker(s) for s in specs)))


def run_experiments(
    specs: Sequence[ExperimentSpec],
    config: MatrixConfig,
    parallelism: int = 1,
    persist: bool = True,
) -> List[ExperimentResult]:
    """Synchronous wrapper around :func:`run_experiments_async`."""
    return asyncio.run(run_experiments_async(specs, config, parallelism, persist))


def write_summary(summary: MatrixSummary, output_dir: Path) -> List[Path]:
    """Write ``summary.json`` plus ``summary-<key>.csv`` per group key."""
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / SUMMARY_NAME
    path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    written = [path]
    for key in summary.group_by:
        csv_path = output_dir / f"summary-{key}.csv"
        csv_path.write_bytes(emit_tables(summary, key))
        written.append(csv_path)
    return written


def run_matrix(
    config: MatrixConfig,
    parallelism: int = 1,
    html_path: Optional[str] = None,
    db_path: Optional[str] = None,
    persist: bool = True,
) -> MatrixSummary:
    """Expand, run and aggregate a whole matrix.

    Args:
        config: Validated matrix configuration
        parallelism: Maximum number of experiments in flight
        html_path: Also write an HTML summary page here
        db_path: Also index every report in this SQLite database
        persist: Write traces, reports and the summary under ``output_dir``

    Returns:
        MatrixSummary grouped by ``config.effective_group_by``
    """
    specs = expand_matrix(config)
    logger.info(f"running {len(specs)} experiment(s) with {parallelism} worker(s)")
    results = run_experiments(specs, config, parallelism, persist)

    reports = [r for r in results if isinstance(r, AnalysisReport)]
    summary = aggregate_summaries(results, config.effective_group_by)

    if persist:
        write_summary(summary, config.output_path)
    if db_path:
        for report in reports:
            save_report(db_path, report.to_dict())
    if html_path:
        from reporting.html_report import generate_html_report

        generate_html_report(summary, html_path, reports, version=__version__)
        logger.info(f"HTML summary saved to: {html_path}")

    logger.info(
        f"matrix done: {summary.totals.get('succeeded', 0)} succeeded, "
        f"{summary.totals.get('failed', 0)} failed"
    )
    return summary
