"""Two-pass assembler for MiniISA source.

Grammar, one statement per line::

    ; comment to end of line
    .entry main
    .secret 32
    .data 2000 ff 00 3a
    .func select select.c
    main:   call select
            halt
    loop:   bnez r1, loop

Labels may share a line with an instruction. Immediates are decimal or
``0x`` hex, optionally negative, and are stored modulo 2**64.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from core.errors import AssemblyError
from minivm.isa import NUM_REGISTERS, SHAPES, Instruction, Op
from reporting.symbols import SymbolEntry, SymbolMap

MASK64 = (1 << 64) - 1
IMM_MIN = -(1 << 63)
DEFAULT_SECRET_LEN = 8
DEFAULT_DATA_SIZE = 65536

_LABEL_RE = re.compile(r"^([A-Za-z_.$][A-Za-z0-9_.$]*)\s*:")
_NAME_RE = re.compile(r"^[A-Za-z_.$][A-Za-z0-9_.$]*$")
_REG_RE = re.compile(r"^r([0-9]+)$")
_MEM_RE = re.compile(r"^\[\s*(r[0-9]+)\s*(?:([+-])\s*([^\]\s]+)\s*)?\]$")


@dataclass(frozen=True)
class FunctionSpan:
    """Instructions ``[start, end)`` declared by a ``.func`` directive."""

    name: str
    start: int
    end: int
    source_file: Optional[str] = None


@dataclass(frozen=True)
class Program:
    instructions: Tuple[Instruction, ...]
    entry: int = 0
    data_init: Tuple[Tuple[int, bytes], ...] = ()
    secret_len: int = DEFAULT_SECRET_LEN
    labels: Dict[str, int] = field(default_factory=dict)
    name: str = "program"
    functions: Tuple[FunctionSpan, ...] = ()

    def __len__(self) -> int:
        return len(self.instructions)


def _parse_int(text: str, lineno: int) -> int:
    t = text.strip().lower()
    neg = t.startswith("-")
    body = t[1:] if neg else t
    try:
        if body.startswith("0x"):
            value = int(body[2:], 16)
        elif body.isdigit():
            value = int(body, 10)
        else:
            raise ValueError(body)
    except ValueError:
        raise AssemblyError(f"invalid immediate {text.strip()!r}", lineno) from None
    value = -value if neg else value
    if not IMM_MIN <= value <= MASK64:
        raise AssemblyError(f"immediate {text.strip()} out of 64-bit range", lineno)
    return value & MASK64


def _parse_reg(text: str, lineno: int) -> int:
    m = _REG_RE.match(text.strip().lower())
    if not m or int(m.group(1)) >= NUM_REGISTERS:
        raise AssemblyError(f"expected register r0-r{NUM_REGISTERS - 1}, got {text.strip()!r}", lineno)
    return int(m.group(1))


def _parse_mem(text: str, lineno: int) -> Tuple[int, int]:
    m = _MEM_RE.match(text.strip().lower())
    if not m:
        raise AssemblyError(f"expected memory operand [rN+imm], got {text.strip()!r}", lineno)
    base = _parse_reg(m.group(1), lineno)
    if m.group(2) is None:
        return base, 0
    offset = _parse_int(m.group(3), lineno)
    if m.group(2) == "-":
        offset = (-offset) & MASK64
    return base, offset


def _split_operands(rest: str) -> List[str]:
    rest = rest.strip()
    if not rest:
        return []
    return [part.strip() for part in rest.split(",")]


def assemble(text: str, name: str = "program", data_size: int = DEFAULT_DATA_SIZE) -> Program:
    """Assemble MiniISA source into a :class:`Program`.

    Args:
        text: Assembly source
        name: Program name, used for the trace image range
        data_size: Data-space size that ``.data`` directives must fit

    Returns:
        The assembled program

    Raises:
        AssemblyError: with the offending line number
    """
    labels: Dict[str, int] = {}
    pending: List[Tuple[Op, List[str], int]] = []
    data_init: List[Tuple[int, bytes]] = []
    secret_len = DEFAULT_SECRET_LEN
    entry_label: Optional[Tuple[str, int]] = None
    func_starts: List[Tuple[str, int, Optional[str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        while line:
            m = _LABEL_RE.match(line)
            if not m:
                break
            label = m.group(1)
            if label in labels:
                raise AssemblyError(f"duplicate label {label!r}", lineno)
            labels[label] = len(pending)
            line = line[m.end():].strip()
        if not line:
            continue

        parts = line.split(None, 1)
        mnemonic = parts[0].lower()
        rest = parts[1] if len(parts) > 1 else ""

        if mnemonic.startswith("."):
            words = rest.split()
            if mnemonic == ".entry":
                if len(words) != 1:
                    raise AssemblyError(".entry takes one label", lineno)
                entry_label = (words[0], lineno)
            elif mnemonic == ".secret":
                if len(words) != 1 or not words[0].isdigit():
                    raise AssemblyError(".secret takes a decimal length", lineno)
                secret_len = int(words[0])
                if secret_len < 1:
                    raise AssemblyError(".secret length must be >= 1", lineno)
            elif mnemonic == ".data":
                if len(words) < 2:
                    raise AssemblyError(".data takes an address and at least one byte", lineno)
                try:
                    addr = int(words[0], 16)
                    payload = bytes(int(w, 16) for w in words[1:])
                except ValueError:
                    raise AssemblyError(f"invalid .data operands {rest.strip()!r}", lineno) from None
                if addr < 0 or addr + len(payload) > data_size:
                    raise AssemblyError(
                        f".data at {addr:#x} lies outside the {data_size}-byte data space", lineno
                    )
                data_init.append((addr, payload))
            elif mnemonic == ".func":
                if not 1 <= len(words) <= 2 or not _NAME_RE.match(words[0]):
                    raise AssemblyError(".func takes a name and optional source file", lineno)
                func_starts.append((words[0], len(pending), words[1] if len(words) == 2 else None))
            else:
                raise AssemblyError(f"unknown directive {mnemonic}", lineno)
            continue

        try:
            op = Op(mnemonic)
        except ValueError:
            raise AssemblyError(f"unknown instruction {mnemonic!r}", lineno) from None
        pending.append((op, _split_operands(rest), lineno))

    instructions: List[Instruction] = []
    for op, operands, lineno in pending:
        shape = SHAPES[op]
        if len(operands) != len(shape):
            raise AssemblyError(
                f"{op.value} takes {len(shape)} operand(s), got {len(operands)}", lineno
            )
        args: List[int] = []
        for kind, operand in zip(shape, operands):
            if kind == "reg":
                args.append(_parse_reg(operand, lineno))
            elif kind == "imm":
                args.append(_parse_int(operand, lineno))
            elif kind == "mem":
                args.extend(_parse_mem(operand, lineno))
            else:
                if operand not in labels:
                    raise AssemblyError(f"undefined label {operand!r}", lineno)
                if labels[operand] >= len(pending):
                    raise AssemblyError(f"label {operand!r} does not precede an instruction", lineno)
                args.append(labels[operand])
        instructions.append(Instruction(op, tuple(args), lineno))

    if entry_label is not None:
        label, lineno = entry_label
        if label not in labels:
            raise AssemblyError(f"undefined label {label!r}", lineno)
        entry = labels[label]
    else:
        entry = labels.get("main", 0)
    if not instructions:
        raise AssemblyError("program has no instructions")
    if entry >= len(instructions):
        raise AssemblyError("entry point lies past the last instruction")

    functions = tuple(
        FunctionSpan(fname, start, func_starts[i + 1][1] if i + 1 < len(func_starts) else len(instructions), src)
        for i, (fname, start, src) in enumerate(func_starts)
    )

    return Program(
        instructions=tuple(instructions),
        entry=entry,
        data_init=tuple(data_init),
        secret_len=secret_len,
        labels=dict(labels),
        name=name,
        functions=tuple(f for f in functions if f.end > f.start),
    )


@lru_cache(maxsize=64)
def _load_cached(path: str, mtime_ns: int) -> Program:
    p = Path(path)
    return assemble(p.read_text(encoding="utf-8"), name=p.stem)


def load_program(path: Union[str, Path]) -> Program:
    """Assemble a source file, caching by path and modification time."""
    p = Path(path).resolve()
    return _load_cached(str(p), p.stat().st_mtime_ns)


def symbol_map_from_program(program: Program) -> SymbolMap:
    """Build a SymbolMap from the program's ``.func`` directives."""
    return SymbolMap(
        [SymbolEntry(f.start, f.end - f.start, f.name, f.source_file) for f in program.functions]
    )
