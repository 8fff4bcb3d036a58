"""Leak-pattern fixture corpus and its end-to-end suite."""

from fixtures.suite import (
    MANIFEST_PATH,
    FixtureEntry,
    FixtureOutcome,
    SuiteResult,
    list_fixtures,
    run_fixture_suite,
)

__all__ = [
    "MANIFEST_PATH",
    "FixtureEntry",
    "FixtureOutcome",
    "SuiteResult",
    "list_fixtures",
    "run_fixture_suite",
]
