"""Built-in MiniISA corpus of constant-time and leaky variant pairs.

``manifest.json`` lists every fixture with the classification and the
(kind, function) findings it must produce. ``run_fixture_suite`` runs the
corpus through the regular experiment pipeline and compares.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Tuple, Union

from core.classification import Classification, LeakKind
from core.config import MatrixConfig, TargetConfig
from core.errors import ManifestError
from diffing.engine import DiffParams
from orchestrator.matrix import expand_matrix
from orchestrator.runner import run_experiments
from reporting.aggregate import FailureRecord, MatrixSummary, aggregate_summaries
from reporting.findings import AnalysisReport

logger = logging.getLogger("ctdiff.fixtures")

FIXTURE_DIR = Path(__file__).resolve().parent
MANIFEST_PATH = FIXTURE_DIR / "manifest.json"

TAGS = ("ct", "leaky")
SUITE_GROUP_BY = ["variant", "category"]

FindingSet = FrozenSet[Tuple[LeakKind, str]]


@dataclass(frozen=True)
class Expected:
    classification: Classification
    findings: FindingSet = frozenset()


@dataclass(frozen=True)
class FixtureEntry:
    name: str
    source: Path
    tag: str
    category: str
    expected: Expected
    origin: str
    min_runs: int = 2
    discriminating: str = ""

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Path) -> "FixtureEntry":
        try:
            expected = data["expected"]
            entry = cls(
                name=data["name"],
                source=(base_dir / data["source"]).resolve(),
                tag=data["tag"],
                category=data["category"],
                expected=Expected(
                    classification=Classification(expected["classification"]),
                    findings=frozenset(
                        (LeakKind(f["kind"]), f["function"]) for f in expected.get("findings", [])
                    ),
                ),
                origin=data.get("origin", ""),
                min_runs=int(data.get("min_runs", 2)),
                discriminating=data.get("discriminating", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"fixture {data.get('name', '?')!r}: bad entry ({e})") from e
        entry.validate()
        return entry

    def validate(self) -> None:
        if self.tag not in TAGS:
            raise ManifestError(f"fixture {self.name!r}: tag must be one of {', '.join(TAGS)}")
        if self.tag == "ct" and (
            self.expected.classification is not Classification.NONE or self.expected.findings
        ):
            raise ManifestError(f"fixture {self.name!r}: ct fixtures must expect no findings")
        if self.tag == "leaky" and not self.expected.findings:
            raise ManifestError(f"fixture {self.name!r}: leaky fixtures must expect findings")
        if not self.origin:
            raise ManifestError(f"fixture {self.name!r}: origin is empty")
        if self.min_runs < 2:
            raise ManifestError(f"fixture {self.name!r}: min_runs must be >= 2")

    @property
    def stem(self) -> str:
        """Name without its ``_ct`` / ``_leaky`` suffix."""
        suffix = f"_{self.tag}"
        return self.name[: -len(suffix)] if self.name.endswith(suffix) else self.name


def list_fixtures(manifest_path: Optional[Union[str, Path]] = None) -> List[FixtureEntry]:
    """Fixtures in manifest order.

    Args:
        manifest_path: Alternative manifest; sources resolve against its directory

    Raises:
        ManifestError: unreadable manifest or an entry that breaks its rules
    """
    path = Path(manifest_path) if manifest_path else MANIFEST_PATH
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(data, list):
        raise ManifestError(f"{path}: manifest must be a JSON list")

    entries = [FixtureEntry.from_dict(item, path.parent) for item in data]
    names = [e.name for e in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ManifestError(f"{path}: duplicate fixture name(s): {', '.join(dupes)}")
    return entries


@dataclass
class FixtureOutcome:
    entry: FixtureEntry
    status: str  # pass, fail, skipped or error
    report: Optional[AnalysisReport] = None
    error: Optional[str] = None

    @property
    def actual_findings(self) -> FindingSet:
        if self.report is None:
            return frozenset()
        return frozenset((f.kind, f.function_name) for f in self.report.unfiltered)

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "skipped")

    def describe(self) -> str:
        if self.status == "skipped":
            return f"needs at least {self.entry.min_runs} runs"
        if self.status == "error":
            return self.error or "failed"
        expected = self.entry.expected
        if self.status == "pass":
            return expected.classification.value
        return (
            f"expected {expected.classification.value} {_fmt(expected.findings)}, "
            f"got {self.report.classification.value} {_fmt(self.actual_findings)}"
        )


def _fmt(findings: FindingSet) -> str:
    return "{" + ", ".join(f"{k.value}:{fn}" for k, fn in sorted(findings, key=lambda t: (t[0].value, t[1]))) + "}"


@dataclass
class SuiteResult:
    outcomes: List[FixtureOutcome] = field(default_factory=list)
    summary: MatrixSummary = field(default_factory=MatrixSummary)
    runs: int = 8
    params: DiffParams = field(default_factory=DiffParams)

    @property
    def passed(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def counts(self) -> Dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0, "error": 0}
        for o in self.outcomes:
            out[o.status] += 1
        return out

    def outcome(self, name: str) -> FixtureOutcome:
        for o in self.outcomes:
            if o.entry.name == name:
                return o
        raise KeyError(name)


def suite_config(
    entries: List[FixtureEntry],
    params: DiffParams,
    runs: int,
    known_issues: Optional[Union[str, Path]] = None,
) -> MatrixConfig:
    """Matrix configuration with one target per fixture, labelled by variant and category."""
    config = MatrixConfig(
        targets=[
            TargetConfig(
                name=e.name,
                program=str(e.source),
                labels={"variant": e.tag, "category": e.category},
            )
            for e in entries
        ],
        runs_per_experiment=runs,
        diff=params,
        known_issues=str(known_issues) if known_issues else None,
        group_by=list(SUITE_GROUP_BY),
        base_dir=FIXTURE_DIR,
    )
    config.validate()
    return config


def _judge(entry: FixtureEntry, result: Union[AnalysisReport, FailureRecord]) -> FixtureOutcome:
    if isinstance(result, FailureRecord):
        return FixtureOutcome(entry, "error", error=result.error)
    outcome = FixtureOutcome(entry, "fail", report=result)
    if (
        result.classification is entry.expected.classification
        and outcome.actual_findings == entry.expected.findings
    ):
        outcome.status = "pass"
    return outcome


def run_fixture_suite(
    params: DiffParams = DiffParams(),
    runs: int = 8,
    parallelism: int = 1,
    manifest_path: Optional[Union[str, Path]] = None,
    known_issues: Optional[Union[str, Path]] = None,
) -> SuiteResult:
    """Run every fixture through the pipeline and compare with the manifest.

    Fixtures whose ``min_runs`` exceeds ``runs`` are reported as skipped.
    Nothing is written to disk.

    Args:
        params: Diff parameters for every fixture
        runs: Traces per fixture, at least 2
        parallelism: Worker count
        manifest_path: Alternative manifest
        known_issues: Known-issue list applied to every fixture

    Returns:
        SuiteResult with one outcome per manifest entry, in manifest order
    """
    if runs < 2:
        raise ValueError(f"runs must be >= 2, got {runs}")
    entries = list_fixtures(manifest_path)
    active = [e for e in entries if runs >= e.min_runs]

    results: Dict[str, Union[AnalysisReport, FailureRecord]] = {}
    if active:
        config = suite_config(active, params, runs, known_issues)
        specs = expand_matrix(config)
        for spec, result in zip(specs, run_experiments(specs, config, parallelism, persist=False)):
            results[spec.name] = result

    outcomes = []
    for entry in entries:
        if entry.name not in results:
            outcomes.append(FixtureOutcome(entry, "skipped"))
            continue
        outcome = _judge(entry, results[entry.name])
        if outcome.status != "pass":
            logger.warning(f"fixture {entry.name}: {outcome.describe()}")
        outcomes.append(outcome)

    summary = aggregate_summaries(list(results.values()), SUITE_GROUP_BY)
    return SuiteResult(outcomes=outcomes, summary=summary, runs=runs, params=params)
