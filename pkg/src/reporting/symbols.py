"""Address-to-function mapping and the curated known-issue list."""

import bisect
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Union

from core.errors import KnownIssueError, SymbolMapError


@dataclass(frozen=True)
class SymbolEntry:
    start: int
    length: int
    function_name: str
    source_file: Optional[str] = None

    @property
    def end(self) -> int:
        return self.start + self.length


class SymbolMap:
    """Non-overlapping ``[start, start + length)`` ranges with bisect lookup."""

    def __init__(self, entries: Iterable[SymbolEntry] = ()):
        ordered = sorted(entries, key=lambda e: (e.start, e.length))
        for prev, cur in zip(ordered, ordered[1:]):
            if prev.end > cur.start:
                raise SymbolMapError(
                    f"{prev.function_name} [{prev.start:#x}, {prev.end:#x}) overlaps "
                    f"{cur.function_name} at {cur.start:#x}"
                )
        self._entries: List[SymbolEntry] = [e for e in ordered if e.length > 0]
        self._starts = [e.start for e in self._entries]

    @property
    def entries(self) -> List[SymbolEntry]:
        return list(self._entries)

    def lookup(self, pc: int) -> Optional[SymbolEntry]:
        idx = bisect.bisect_right(self._starts, pc) - 1
        if idx < 0:
            return None
        entry = self._entries[idx]
        return entry if pc < entry.end else None

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)


@dataclass(frozen=True)
class KnownIssueList:
    function_names: FrozenSet[str] = field(default_factory=frozenset)
    source_files: FrozenSet[str] = field(default_factory=frozenset)

    def matches(self, function_name: str, source_file: Optional[str]) -> bool:
        return function_name in self.function_names or (
            source_file is not None and source_file in self.source_files
        )

    def with_functions(self, *names: str) -> "KnownIssueList":
        return KnownIssueList(self.function_names | set(names), self.source_files)


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_symbol_map(text: str) -> SymbolMap:
    """Parse ``<start-hex> <length-hex> <function_name> [source_file]`` lines."""
    entries = []
    for lineno, line in _content_lines(text):
        parts = line.split()
        if not 3 <= len(parts) <= 4:
            raise SymbolMapError("expected '<start> <length> <function> [file]'", lineno)
        try:
            start, length = int(parts[0], 16), int(parts[1], 16)
        except ValueError:
            raise SymbolMapError(f"non-hex address in {line!r}", lineno) from None
        entries.append(SymbolEntry(start, length, parts[2], parts[3] if len(parts) == 4 else None))
    return SymbolMap(entries)


def load_symbol_map(path: Union[str, Path]) -> SymbolMap:
    p = Path(path)
    try:
        return parse_symbol_map(p.read_text(encoding="utf-8"))
    except SymbolMapError as e:
        raise SymbolMapError(f"{p}: {e.message}", e.line) from e


def parse_known_issues(text: str) -> KnownIssueList:
    """Parse ``fn <name>`` / ``file <name>`` lines; ``#`` starts a comment."""
    functions, files = set(), set()
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("fn", "file"):
            raise KnownIssueError(f"expected 'fn <name>' or 'file <name>', got {line!r}", lineno)
        (functions if parts[0] == "fn" else files).add(parts[1])
    return KnownIssueList(frozenset(functions), frozenset(files))


def load_known_issues(path: Union[str, Path]) -> KnownIssueList:
    p = Path(path)
    try:
        return parse_known_issues(p.read_text(encoding="utf-8"))
    except KnownIssueError as e:
        raise KnownIssueError(f"{p}: {e.message}", e.line) from e
