"""MiniISA interpreter.

Harvard layout: pc values are instruction indices and data lives in a flat
byte array. ``call``/``ret`` use a private return stack, so the only memory
records a program produces come from its own ``ld``/``st`` instructions.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, NamedTuple

from core.errors import MemoryFault, PcOutOfRange, ReturnStackUnderflow, StepLimitExceeded
from minivm.assembler import Program
from minivm.isa import ACCESS_SIZE, CONTROL_OPS, NUM_REGISTERS, Op
from minivm.seeding import SecretInput
from tracing.model import ImageRange, Trace, TraceRecord

logger = logging.getLogger("ctdiff.minivm")

MASK64 = (1 << 64) - 1
SECRET_BASE = 0x1000
PUBLIC_BASE = 0x2000


@dataclass(frozen=True)
class VmLimits:
    max_steps: int = 1_000_000
    data_size: int = 65536

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.data_size < 1:
            raise ValueError(f"data_size must be >= 1, got {self.data_size}")


class ExitStatus(str, Enum):
    HALTED = "halted"


class ExecutionResult(NamedTuple):
    trace: Trace
    status: ExitStatus


_ALU = {
    Op.ADD: lambda a, b: a + b,
    Op.SUB: lambda a, b: a - b,
    Op.MUL: lambda a, b: a * b,
    Op.AND: lambda a, b: a & b,
    Op.OR: lambda a, b: a | b,
    Op.XOR: lambda a, b: a ^ b,
    Op.SHL: lambda a, b: a << (b & 63),
    Op.SHR: lambda a, b: a >> (b & 63),
    Op.LTU: lambda a, b: int(a < b),
}

_ALU_IMM = {
    Op.ADDI: Op.ADD,
    Op.ANDI: Op.AND,
    Op.ORI: Op.OR,
    Op.XORI: Op.XOR,
    Op.SHLI: Op.SHL,
    Op.SHRI: Op.SHR,
}


def execute(
    program: Program,
    secret: SecretInput,
    limits: VmLimits = VmLimits(),
) -> ExecutionResult:
    """Run ``program`` with ``secret`` mapped at SECRET_BASE and record its trace.

    Every executed ``beqz``/``bnez``/``jmp``/``call``/``ret`` emits a control
    record carrying the resolved next pc, and every load or store emits a
    memory record with its effective address. ``halt`` counts as a step.

    Raises:
        ValueError: secret length does not match ``program.secret_len``
        StepLimitExceeded: more than ``limits.max_steps`` instructions
        MemoryFault: data access outside the data space
        ReturnStackUnderflow: ``ret`` with an empty return stack
        PcOutOfRange: execution ran off the end of the program
    """
    if len(secret.data) != program.secret_len:
        raise ValueError(
            f"{program.name} expects a {program.secret_len}-byte secret, got {len(secret.data)}"
        )

    mem = bytearray(limits.data_size)

    def check(addr: int, size: int, pc: int) -> None:
        if addr < 0 or addr + size > limits.data_size:
            raise MemoryFault(f"access of {size} byte(s) at {addr:#x} outside data space", pc)

    for addr, payload in program.data_init:
        check(addr, len(payload), program.entry)
        mem[addr : addr + len(payload)] = payload
    check(SECRET_BASE, len(secret.data), program.entry)
    mem[SECRET_BASE : SECRET_BASE + len(secret.data)] = secret.data

    regs = [0] * NUM_REGISTERS
    ret_stack: List[int] = []
    records: List[TraceRecord] = []
    code = program.instructions
    n = len(code)
    pc = program.entry
    steps = 0

    while True:
        if not 0 <= pc < n:
            raise PcOutOfRange(f"no instruction at index {pc} ({n} instructions)", pc)
        if steps >= limits.max_steps:
            raise StepLimitExceeded(f"step limit {limits.max_steps} reached", pc)
        steps += 1
        ins = code[pc]
        op, a = ins.op, ins.args
        nxt = pc + 1

        if op in _ALU:
            regs[a[0]] = _ALU[op](regs[a[1]], regs[a[2]]) & MASK64
        elif op in _ALU_IMM:
            regs[a[0]] = _ALU[_ALU_IMM[op]](regs[a[1]], a[2]) & MASK64
        elif op is Op.LI:
            regs[a[0]] = a[1]
        elif op is Op.MOV:
            regs[a[0]] = regs[a[1]]
        elif op is Op.EQZ:
            regs[a[0]] = int(regs[a[1]] == 0)
        elif op is Op.CSEL:
            regs[a[0]] = regs[a[2]] if regs[a[1]] != 0 else regs[a[3]]
        elif op in (Op.LD, Op.LDB):
            size = ACCESS_SIZE[op]
            addr = (regs[a[1]] + a[2]) & MASK64
            check(addr, size, pc)
            regs[a[0]] = int.from_bytes(mem[addr : addr + size], "little")
            records.append(TraceRecord.read(pc, addr, size))
        elif op in (Op.ST, Op.STB):
            size = ACCESS_SIZE[op]
            addr = (regs[a[0]] + a[1]) & MASK64
            check(addr, size, pc)
            mem[addr : addr + size] = (regs[a[2]] & ((1 << (8 * size)) - 1)).to_bytes(size, "little")
            records.append(TraceRecord.write(pc, addr, size))
        elif op is Op.BEQZ:
            nxt = a[1] if regs[a[0]] == 0 else pc + 1
        elif op is Op.BNEZ:
            nxt = a[1] if regs[a[0]] != 0 else pc + 1
        elif op is Op.JMP:
            nxt = a[0]
        elif op is Op.CALL:
            ret_stack.append(pc + 1)
            nxt = a[0]
        elif op is Op.RET:
            if not ret_stack:
                raise ReturnStackUnderflow("ret with empty return stack", pc)
            nxt = ret_stack.pop()
        elif op is Op.HALT:
            break
        if op in CONTROL_OPS:
            records.append(TraceRecord.control(pc, nxt))
        pc = nxt

    trace = Trace(
        run_index=secret.run_index,
        secret_id=secret.secret_id,
        records=tuple(records),
        image_ranges=(ImageRange(0, n, program.name),),
    )
    logger.debug(f"{program.name} run {secret.run_index}: {steps} steps, {len(records)} records")
    return ExecutionResult(trace, ExitStatus.HALTED)


Runner = Callable[[Program, SecretInput, VmLimits], ExecutionResult]


def check_determinism(
    program: Program,
    secret: SecretInput,
    limits: VmLimits = VmLimits(),
    runner: Runner = execute,
) -> bool:
    """Execute twice and report whether both traces are identical."""
    first = runner(program, secret, limits).trace
    second = runner(program, secret, limits).trace
    return first == second
