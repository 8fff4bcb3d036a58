"""Tests for symbol maps and known-issue lists."""

import pytest

from core.errors import KnownIssueError, SymbolMapError
from reporting.symbols import (
    KnownIssueList,
    SymbolEntry,
    SymbolMap,
    load_known_issues,
    load_symbol_map,
    parse_known_issues,
    parse_symbol_map,
)

SYMBOLS = """\
# start length function [file]
1000 40 main harness.s
1040 80 ct_select select.c
10c0 20 helper
"""


class TestSymbolMap:
    def test_lookup_inside_and_at_bounds(self):
        symbols = parse_symbol_map(SYMBOLS)
        assert symbols.lookup(0x1000).function_name == "main"
        assert symbols.lookup(0x103F).function_name == "main"
        assert symbols.lookup(0x1040).function_name == "ct_select"
        assert symbols.lookup(0x1040).source_file == "select.c"
        assert symbols.lookup(0x10C0).source_file is None

    def test_lookup_misses(self):
        symbols = parse_symbol_map(SYMBOLS)
        assert symbols.lookup(0xFFF) is None
        assert symbols.lookup(0x10E0) is None

    def test_gap_between_entries(self):
        symbols = SymbolMap([SymbolEntry(0x0, 0x10, "a"), SymbolEntry(0x20, 0x10, "b")])
        assert symbols.lookup(0x18) is None
        assert symbols.lookup(0x20).function_name == "b"

    def test_overlap_rejected(self):
        with pytest.raises(SymbolMapError, match="overlaps"):
            SymbolMap([SymbolEntry(0x0, 0x20, "a"), SymbolEntry(0x10, 0x10, "b")])

    def test_empty_map_is_falsy(self):
        assert not SymbolMap()
        assert len(parse_symbol_map(SYMBOLS)) == 3


class TestParseSymbolMap:
    @pytest.mark.parametrize(
        "text,line",
        [
            ("1000 40\n", 1),
            ("1000 40 main\nzz 10 f\n", 2),
            ("# header\n\n1000 40 main a.c extra\n", 3),
        ],
    )
    def test_errors_carry_line(self, text, line):
        with pytest.raises(SymbolMapError) as exc:
            parse_symbol_map(text)
        assert exc.value.line == line

    def test_load_prefixes_path(self, tmp_path):
        path = tmp_path / "bad.sym"
        path.write_text("nothex 10 f\n")
        with pytest.raises(SymbolMapError, match="bad.sym") as exc:
            load_symbol_map(path)
        assert exc.value.line == 1

    def test_load(self, tmp_path):
        path = tmp_path / "prog.sym"
        path.write_text(SYMBOLS)
        assert [e.function_name for e in load_symbol_map(path).entries] == ["main", "ct_select", "helper"]


class TestKnownIssues:
    def test_parse(self):
        known = parse_known_issues("# accepted\nfn ct_select\nfile bn_exp.c  # ladder\n")
        assert known == KnownIssueList(frozenset({"ct_select"}), frozenset({"bn_exp.c"}))

    def test_matches_function_or_file(self):
        known = KnownIssueList(frozenset({"f"}), frozenset({"x.c"}))
        assert known.matches("f", None)
        assert known.matches("g", "x.c")
        assert not known.matches("g", "y.c")
        assert not known.matches("g", None)

    def test_with_functions(self):
        known = KnownIssueList().with_functions("a", "b")
        assert known.function_names == {"a", "b"}

    @pytest.mark.parametrize("text", ["fn\n", "symbol f\n", "fn a b\n"])
    def test_bad_lines(self, text):
        with pytest.raises(KnownIssueError) as exc:
            parse_known_issues(text)
        assert exc.value.line == 1

    def test_load(self, tmp_path):
        path = tmp_path / "known.txt"
        path.write_text("fn modexp\n")
        assert load_known_issues(path).function_names == {"modexp"}

    def test_load_error_names_file(self, tmp_path):
        path = tmp_path / "known.txt"
        path.write_text("fn ok\nbroken line here\n")
        with pytest.raises(KnownIssueError, match="known.txt") as exc:
            load_known_issues(path)
        assert exc.value.line == 2
