"""Test the MiniISA assembler."""

import pytest

from core.errors import AssemblyError
from minivm.assembler import MASK64, assemble, load_program, symbol_map_from_program
from minivm.isa import Op


def test_minimal_program_defaults():
    program = assemble("halt\n")
    assert len(program) == 1
    assert program.entry == 0
    assert program.secret_len == 8
    assert program.functions == ()


def test_entry_defaults_to_main_label():
    program = assemble("helper: ret\nmain: halt\n")
    assert program.entry == 1


def test_entry_directive():
    program = assemble(".entry start\nnop_like: li r0, 1\nstart: halt\n")
    assert program.entry == 1


def test_labels_share_lines_and_resolve():
    program = assemble("a: b: jmp b\nhalt")
    assert program.labels == {"a": 0, "b": 0}
    assert program.instructions[0].args == (0,)


def test_operand_encoding():
    program = assemble(
        """
        li   r1, -1
        ld   r2, [r1+8]
        st   [r3-0x10], r4
        ldb  r5, [r6]
        csel r7, r8, r9, r10
        bnez r1, end
end:    halt
        """
    )
    li, ld, st, ldb, csel, bnez, _ = program.instructions
    assert li.op is Op.LI and li.args == (1, MASK64)
    assert ld.args == (2, 1, 8)
    assert st.args == (3, (-0x10) & MASK64, 4)
    assert ldb.args == (5, 6, 0)
    assert csel.args == (7, 8, 9, 10)
    assert bnez.args == (1, 6)


def test_comments_and_case():
    program = assemble("; header\nLI R1, 0X10 ; load\nHALT\n")
    assert program.instructions[0].args == (1, 0x10)


def test_data_and_secret_directives():
    program = assemble(".secret 32\n.data 2000 ff 01\nhalt\n")
    assert program.secret_len == 32
    assert program.data_init == ((0x2000, b"\xff\x01"),)


def test_func_directive_and_symbol_map():
    program = assemble(
        ".func main harness.s\nmain: call f\nhalt\n.func f f.c\nf: ret\n",
        name="demo",
    )
    assert [(f.name, f.start, f.end, f.source_file) for f in program.functions] == [
        ("main", 0, 2, "harness.s"),
        ("f", 2, 3, "f.c"),
    ]
    symbols = symbol_map_from_program(program)
    assert symbols.lookup(2).function_name == "f"
    assert symbols.lookup(1).source_file == "harness.s"
    assert symbols.lookup(3) is None


@pytest.mark.parametrize(
    "source, line, fragment",
    [
        ("jmp nowhere\n", 1, "undefined label 'nowhere'"),
        ("a: halt\na: halt\n", 2, "duplicate label"),
        ("halt\nfoo r1\n", 2, "unknown instruction"),
        ("li r1\n", 1, "takes 2 operand"),
        ("li r16, 1\n", 1, "expected register"),
        ("li r1, 0x10000000000000000\n", 1, "out of 64-bit range"),
        ("li r1, abc\n", 1, "invalid immediate"),
        ("ld r1, r2\n", 1, "memory operand"),
        ("halt\njmp end\nend:\n", 2, "does not precede an instruction"),
        (".secret 0\nhalt\n", 1, ">= 1"),
        (".data ffff 01 02\nhalt\n", 1, "data space"),
        ("halt\n.data -10 aa\n", 2, "outside the 65536-byte data space"),
        (".bogus\nhalt\n", 1, "unknown directive"),
    ],
)
def test_errors_carry_line_numbers(source, line, fragment):
    with pytest.raises(AssemblyError, match=fragment) as exc:
        assemble(source)
    assert exc.value.line == line


def test_empty_program():
    with pytest.raises(AssemblyError, match="no instructions"):
        assemble("; nothing\n")


def test_negative_immediate_bounds():
    assert assemble(f"li r0, {-(1 << 63)}\nhalt").instructions[0].args == (0, 1 << 63)
    with pytest.raises(AssemblyError):
        assemble(f"li r0, {-(1 << 63) - 1}\nhalt")


def test_load_program_names_after_file(tmp_path):
    path = tmp_path / "demo_prog.s"
    path.write_text("halt\n", encoding="utf-8")
    program = load_program(path)
    assert program.name == "demo_prog"
    assert load_program(path) is program


def test_every_fixture_assembles(fixture_asm_dir):
    for path in sorted(fixture_asm_dir.glob("*.s")):
        program = load_program(path)
        assert program.secret_len == 32
        assert program.instructions[program.entry].op is Op.CALL
        assert [f.name for f in program.functions] == ["main", path.stem]
