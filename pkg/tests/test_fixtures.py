"""End-to-end tests over the built-in fixture corpus."""

import json

import pytest

from core.classification import Classification, LeakKind
from core.errors import ManifestError
from diffing.engine import DiffParams
from fixtures import MANIFEST_PATH, list_fixtures, run_fixture_suite


@pytest.fixture(scope="module")
def default_suite():
    return run_fixture_suite()


class TestManifest:
    def test_corpus_size(self):
        assert len(list_fixtures()) >= 12

    def test_every_leaky_fixture_has_a_ct_sibling(self):
        entries = list_fixtures()
        cts = [e for e in entries if e.tag == "ct"]
        for leaky in (e for e in entries if e.tag == "leaky"):
            assert any(leaky.stem.startswith(ct.stem) and ct.category == leaky.category for ct in cts), leaky.name

    def test_entries_are_documented(self):
        for entry in list_fixtures():
            assert entry.origin
            assert entry.discriminating
            assert entry.source.exists()
            assert entry.min_runs >= 2

    def test_leaky_expectations_name_the_function(self):
        for entry in list_fixtures():
            if entry.tag == "leaky":
                assert {fn for _, fn in entry.expected.findings} == {entry.name}

    def _write(self, tmp_path, entries):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(entries))
        return path

    def _entry(self, **overrides):
        entry = {
            "name": "x_ct",
            "source": "x_ct.s",
            "tag": "ct",
            "category": "bitmask-to-branch",
            "expected": {"classification": "none", "findings": []},
            "origin": "test",
        }
        entry.update(overrides)
        return entry

    @pytest.mark.parametrize(
        "overrides,message",
        [
            ({"tag": "fast"}, "tag must be"),
            ({"expected": {"classification": "cf_only", "findings": []}}, "ct fixtures"),
            ({"tag": "leaky"}, "leaky fixtures"),
            ({"origin": ""}, "origin"),
            ({"min_runs": 1}, "min_runs"),
            ({"expected": {"classification": "sometimes"}}, "bad entry"),
        ],
    )
    def test_bad_entries(self, tmp_path, overrides, message):
        path = self._write(tmp_path, [self._entry(**overrides)])
        with pytest.raises(ManifestError, match=message):
            list_fixtures(path)

    def test_duplicates(self, tmp_path):
        path = self._write(tmp_path, [self._entry(), self._entry()])
        with pytest.raises(ManifestError, match="duplicate"):
            list_fixtures(path)

    def test_not_a_list(self, tmp_path):
        path = self._write(tmp_path, {"name": "x"})
        with pytest.raises(ManifestError, match="JSON list"):
            list_fixtures(path)

    def test_unreadable(self, tmp_path):
        with pytest.raises(ManifestError, match="cannot read"):
            list_fixtures(tmp_path / "absent.json")

    def test_sources_resolve_next_to_manifest(self):
        entry = list_fixtures(MANIFEST_PATH)[0]
        assert entry.source.parent == MANIFEST_PATH.parent / "asm"


class TestSuite:
    def test_default_suite_passes(self, default_suite):
        failing = [f"{o.entry.name}: {o.describe()}" for o in default_suite.outcomes if not o.ok]
        assert failing == []
        assert default_suite.counts()["pass"] == len(list_fixtures())

    def test_ct_fixtures_are_clean(self, default_suite):
        for outcome in default_suite.outcomes:
            if outcome.entry.tag == "ct":
                assert outcome.report.classification is Classification.NONE
                assert outcome.report.findings == ()

    def test_select_evidence(self, default_suite):
        report = default_suite.outcome("select_leaky").report
        (finding,) = report.findings
        assert finding.kind is LeakKind.CONTROL_FLOW
        # secret byte 0, bit 1 differs from run 0 in runs 1, 3 and 6
        assert finding.evidence_count == 3

    def test_address_leaks(self, default_suite):
        for name in ("cmovznz_addr_leaky", "modexp_sel_leaky"):
            assert default_suite.outcome(name).report.classification is Classification.MEMORY_ONLY

    def test_summary_partitions_by_variant_and_category(self, default_suite):
        summary = default_suite.summary
        n = len(default_suite.outcomes)
        for key in ("variant", "category"):
            assert sum(c.total for c in summary.tables[key].values()) == n
        ct = summary.tables["variant"]["ct"]
        assert ct.total == ct.none
        leaky = summary.tables["variant"]["leaky"]
        assert leaky.none == 0

    def test_window_of_one(self):
        result = run_fixture_suite(DiffParams(window=1, horizon=4096))
        assert result.passed, [o.describe() for o in result.outcomes if not o.ok]

    @pytest.mark.parametrize("runs", [2, 4])
    def test_few_runs(self, runs):
        result = run_fixture_suite(runs=runs)
        assert result.passed, [o.describe() for o in result.outcomes if not o.ok]
        assert result.counts()["skipped"] == 0

    def test_parallel_suite_matches(self, default_suite):
        parallel = run_fixture_suite(parallelism=4)
        assert parallel.summary.to_dict() == default_suite.summary.to_dict()

    def test_runs_below_two(self):
        with pytest.raises(ValueError):
            run_fixture_suite(runs=1)

    def test_known_issue_flips_classification(self, tmp_path):
        known = tmp_path / "known.txt"
        known.write_text("# accepted\nfn select_leaky\n")
        result = run_fixture_suite(known_issues=known)

        outcome = result.outcome("select_leaky")
        assert outcome.status == "fail"
        assert outcome.report.classification is Classification.NONE
        assert [f.filtered for f in outcome.report.findings] == [True]
        assert result.outcome("ghash_carry_leaky").status == "pass"

    def test_min_runs_skips(self, tmp_path):
        entries = json.loads(MANIFEST_PATH.read_text())[:2]
        for e in entries:
            e["source"] = str(MANIFEST_PATH.parent / e["source"])
        entries[1]["min_runs"] = 16
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(entries))

        result = run_fixture_suite(runs=8, manifest_path=path)
        assert [o.status for o in result.outcomes] == ["pass", "skipped"]
        assert result.passed
