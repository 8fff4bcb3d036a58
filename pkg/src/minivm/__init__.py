"""Deterministic MiniISA virtual machine used as the built-in trace producer."""

from minivm.assembler import Program, assemble, load_program, symbol_map_from_program
from minivm.machine import (
    PUBLIC_BASE,
    SECRET_BASE,
    ExecutionResult,
    ExitStatus,
    VmLimits,
    check_determinism,
    execute,
)
from minivm.seeding import SecretInput, derive_secret, splitmix64

__all__ = [
    "PUBLIC_BASE",
    "SECRET_BASE",
    "ExecutionResult",
    "ExitStatus",
    "Program",
    "SecretInput",
    "VmLimits",
    "assemble",
    "check_determinism",
    "derive_secret",
    "execute",
    "load_program",
    "splitmix64",
    "symbol_map_from_program",
]
