import random

import pytest

from imcrypto import isa
from imcrypto.errors import AsmSyntaxError, EncodeError, IllegalInstructionError
from imcrypto.isa import Instruction, assemble, decode, disassemble, encode


def test_eighteen_rows_with_distinct_encodings():
    rows = isa.all_mnemonics()
    assert len(rows) == 18
    words = set()
    for m, v in rows:
        w = encode(Instruction(m, v))
        words.add((w & 0x7F, (w >> 7) & 0x3FF))
    assert len(words) == 18


def test_table_codes():
    assert isa.OPCODE_I == 0b0000111 and isa.OPCODE_R == 0b1000111
    w = encode(Instruction("SUBMX", 1, rs1=4))
    assert w & 0x7F == 0b0000111
    assert (w >> 7) & 0x7F == 0b0001000
    assert (w >> 14) & 1 == 1
    w = encode(Instruction("IMXOR", rs1=1, rs2=2, rd=3))
    assert (w >> 7) & 0x7F == 0 and (w >> 14) & 0b111 == 0b100


def test_field_positions():
    w = encode(Instruction("TEXT", 0, rs1=5, imm=0x123))
    assert (w >> 15) & 0x1F == 5 and w >> 20 == 0x123
    w = encode(Instruction("IMADD", rs1=7, rs2=9, rd=11))
    assert ((w >> 17) & 0x1F, (w >> 22) & 0x1F, w >> 27) == (11, 7, 9)


def test_random_roundtrip():
    rng = random.Random(5)
    for m, v in isa.all_mnemonics():
        for _ in range(200):
            if m in isa.I_TYPE:
                ins = Instruction(m, v, rs1=rng.randint(0, 28), imm=rng.randrange(4096) if m == "TEXT" else 0)
            else:
                ins = Instruction(m, rd=rng.randrange(32), rs1=rng.randrange(32),
                                  rs2=0 if m in isa.R_UNARY else rng.randrange(32))
            assert decode(encode(ins)) == ins


def test_encode_rejects_bad_operands():
    with pytest.raises(EncodeError):
        encode(Instruction("SFTR", 0, rs1=29))
    with pytest.raises(EncodeError):
        encode(Instruction("TEXT", 0, imm=4096))
    with pytest.raises(EncodeError):
        encode(Instruction("IMNOT", rs1=1, rs2=2, rd=3))
    with pytest.raises(EncodeError):
        encode(Instruction("SBOX", 0, imm=1))


def test_decode_rejects_foreign_words():
    with pytest.raises(IllegalInstructionError):
        decode(0x00000013)  # RV32I addi
    with pytest.raises(IllegalInstructionError):
        decode(0b0000111 | (0b0000001 << 7))
    with pytest.raises(IllegalInstructionError):
        decode(encode(Instruction("SFTR", 0, rs1=1)) | (1 << 20))


SRC = """\
# one round of encryption on the group r28..r31
start:  TEXT.L @0x010, r28
        SFTR.E r28
        SUBMX.E r28
        TEXT.S r28, @0x010
        IMXOR r1, r5, r1
        IMNOT r2, r3
"""


def test_assemble_disassemble_roundtrip():
    words = assemble(SRC)
    assert len(words) == 6
    text = disassemble(words)
    assert text.splitlines()[0] == "TEXT.L @0x010, r28"
    assert assemble(text) == words


def test_labels_as_immediates():
    words = assemble("a: SFTR.E r0\nTEXT.L @b, r4\nb: SBOX.D r4\n")
    assert decode(words[1]).imm == 2


def test_syntax_errors_name_the_line():
    with pytest.raises(AsmSyntaxError, match="line 2"):
        assemble("SFTR.E r1\nFROB r1\n")
    with pytest.raises(AsmSyntaxError, match="line 1"):
        assemble("IMXOR r1, r2\n")
    with pytest.raises(AsmSyntaxError, match="line 1"):
        assemble("SFTR.Q r1\n")
    with pytest.raises(AsmSyntaxError, match="line 3"):
        assemble("\n\nTEXT.L r1, r2\n")


def test_binary_format():
    words = assemble(SRC)
    blob = isa.to_binary(words)
    assert blob[:5] == b"IMCP\x01"
    assert len(blob) == 5 + 4 * len(words)
    assert int.from_bytes(blob[5:9], "little") == words[0]
    assert isa.from_binary(blob) == words
    assert isa.from_binary(isa.to_binary([])) == []
    with pytest.raises(ValueError):
        isa.from_binary(b"IMCQ\x01")
    with pytest.raises(ValueError):
        isa.from_binary(b"IMCP\x02")
