"""MiniISA opcodes and operand shapes."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

NUM_REGISTERS = 16


class Op(str, Enum):
    LI = "li"
    MOV = "mov"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    AND = "and"
    OR = "or"
    XOR = "xor"
    SHL = "shl"
    SHR = "shr"
    ADDI = "addi"
    ANDI = "andi"
    ORI = "ori"
    XORI = "xori"
    SHLI = "shli"
    SHRI = "shri"
    EQZ = "eqz"
    LTU = "ltu"
    CSEL = "csel"
    LD = "ld"
    LDB = "ldb"
    ST = "st"
    STB = "stb"
    BEQZ = "beqz"
    BNEZ = "bnez"
    JMP = "jmp"
    CALL = "call"
    RET = "ret"
    HALT = "halt"


# operand kinds: reg, imm, mem (base register + offset), label
SHAPES: Dict[Op, Tuple[str, ...]] = {
    Op.LI: ("reg", "imm"),
    Op.MOV: ("reg", "reg"),
    Op.EQZ: ("reg", "reg"),
    **{op: ("reg", "reg", "reg") for op in (
        Op.ADD, Op.SUB, Op.MUL, Op.AND, Op.OR, Op.XOR, Op.SHL, Op.SHR, Op.LTU,
    )},
    **{op: ("reg", "reg", "imm") for op in (
        Op.ADDI, Op.ANDI, Op.ORI, Op.XORI, Op.SHLI, Op.SHRI,
    )},
    Op.CSEL: ("reg", "reg", "reg", "reg"),
    Op.LD: ("reg", "mem"),
    Op.LDB: ("reg", "mem"),
    Op.ST: ("mem", "reg"),
    Op.STB: ("mem", "reg"),
    Op.BEQZ: ("reg", "label"),
    Op.BNEZ: ("reg", "label"),
    Op.JMP: ("label",),
    Op.CALL: ("label",),
    Op.RET: (),
    Op.HALT: (),
}

CONTROL_OPS = frozenset({Op.BEQZ, Op.BNEZ, Op.JMP, Op.CALL, Op.RET})
ACCESS_SIZE = {Op.LD: 8, Op.ST: 8, Op.LDB: 1, Op.STB: 1}


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction.

    ``args`` is flat: registers as indices, immediates reduced modulo 2**64,
    memory operands as ``(base_register, offset)`` pairs spliced in place and
    labels resolved to instruction indices.
    """

    op: Op
    args: Tuple[int, ...] = ()
    line: int = 0

    def __str__(self) -> str:
        return f"{self.op.value} {', '.join(str(a) for a in self.args)}".rstrip()
