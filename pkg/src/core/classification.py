"""Leak kinds and experiment classification buckets.

Both enums carry the string values used in reports, CSV headers and the
result index, and expose display helpers for the CLI and HTML summary.
"""

from enum import Enum
from typing import Dict, Iterable


class LeakKind(str, Enum):
    """The two observed channels: control flow and data addresses."""

    CONTROL_FLOW = "control_flow"
    MEMORY_ADDRESS = "memory_address"


class Classification(str, Enum):
    NONE = "none"
    CONTROL_FLOW_ONLY = "cf_only"
    MEMORY_ONLY = "mem_only"
    BOTH = "both"

    @classmethod
    def from_kinds(cls, kinds: Iterable[LeakKind]) -> "Classification":
        present = set(kinds)
        if not present:
            return cls.NONE
        if present == {LeakKind.CONTROL_FLOW}:
            return cls.CONTROL_FLOW_ONLY
        if present == {LeakKind.MEMORY_ADDRESS}:
            return cls.MEMORY_ONLY
        return cls.BOTH


# Column order for summary tables
BUCKETS = [c.value for c in Classification]

_COLORS: Dict[str, str] = {
    Classification.NONE.value: "green",
    Classification.CONTROL_FLOW_ONLY.value: "yellow",
    Classification.MEMORY_ONLY.value: "magenta",
    Classification.BOTH.value: "red",
    "failed": "bright_black",
}

_EMOJI: Dict[str, str] = {
    Classification.NONE.value: "🟢",
    Classification.CONTROL_FLOW_ONLY.value: "🟡",
    Classification.MEMORY_ONLY.value: "🟣",
    Classification.BOTH.value: "🔴",
    "failed": "⚫",
}


def get_classification_color(value: str) -> str:
    """Get rich/HTML color name for a classification value.

    Args:
        value: Classification value or ``"failed"``

    Returns:
        Color name
    """
    return _COLORS.get(str(getattr(value, "value", value)), "white")


def get_classification_emoji(value: str) -> str:
    return _EMOJI.get(str(getattr(value, "value", value)), "⚪")


def short_kind(kind: LeakKind) -> str:
    """``CF`` or ``MEM``, as used in the human-readable report."""
    return "CF" if kind is LeakKind.CONTROL_FLOW else "MEM"
