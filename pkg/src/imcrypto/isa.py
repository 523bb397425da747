"""The 18 custom instructions: definitions, 32-bit encoding, assembler.

Bit layout (fields packed from bit 0 upward)::

    I-type  opcode[7]=0000111 | funct[8]  | rs1[5] | imm[12]
    R-type  opcode[7]=1000111 | funct[10] | rd[5]  | rs1[5] | rs2[5]

The low 7 funct bits carry the table's "bits 1-7" code, read as a binary
number written most-significant digit first. The I-type variant bit and the
R-type "bits 8-10" code occupy the funct bits above those.

Assembly grammar, one instruction per line::

    [label:] MNEMONIC[.V] operand, operand ...   # comment

Operands are registers ``r0``..``r31`` or immediates ``@0x1f0`` / ``@label``.
``TEXT.L`` takes an address and a register, ``TEXT.S`` a register and an
address (either order is accepted). Register-group instructions (TEXT, SFTR,
SUBMX, SBOX) name the first of four consecutive registers, so ``rs1 <= 28``.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass

from .errors import AsmSyntaxError, EncodeError, IllegalInstructionError

OPCODE_I = 0b0000111
OPCODE_R = 0b1000111

I_TYPE = {
    "TEXT": (0b0000000, ("L", "S")),
    "SFTR": (0b0000100, ("E", "D")),
    "SUBMX": (0b0001000, ("E", "D")),
    "SBOX": (0b0010000, ("E", "D")),
}

R_TYPE = {
    "IMMOVE": (0b0000000, 0b000),
    "IMADD": (0b0000000, 0b001),
    "IMAND": (0b0000000, 0b010),
    "IMOR": (0b0000000, 0b011),
    "IMXOR": (0b0000000, 0b100),
    "IMNOT": (0b0000000, 0b101),
    "IMCSR": (0b0000000, 0b110),
    "IMSR": (0b0000000, 0b111),
    "IMCSL": (0b1000000, 0b000),
    "IMSL": (0b1000000, 0b001),
}
R_UNARY = frozenset({"IMMOVE", "IMNOT"})

GROUP_MAX = 28
IMM_BITS = 12

_I_BY_FUNCT = {(code | (v << 7)): (name, v) for name, (code, _) in I_TYPE.items() for v in (0, 1)}
_R_BY_FUNCT = {(c7 | (c3 << 7)): name for name, (c7, c3) in R_TYPE.items()}


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    variant: int | None = None
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0

    @property
    def is_itype(self) -> bool:
        return self.mnemonic in I_TYPE

    @property
    def name(self) -> str:
        if self.is_itype:
            return f"{self.mnemonic}.{I_TYPE[self.mnemonic][1][self.variant]}"
        return self.mnemonic

    def __str__(self):
        return disassemble_one(self)


def all_mnemonics() -> list[tuple[str, int | None]]:
    """The 18 table rows as ``(mnemonic, variant)`` pairs."""
    rows = [(m, v) for m in I_TYPE for v in (0, 1)]
    return rows + [(m, None) for m in R_TYPE]


def parse_name(name: str) -> tuple[str, int | None]:
    """``"SFTR.D"`` -> ``("SFTR", 1)``; a bare I-type mnemonic means variant 0."""
    base, _, suffix = name.upper().partition(".")
    if base in I_TYPE:
        letters = I_TYPE[base][1]
        if not suffix:
            return base, 0
        if suffix not in letters:
            raise EncodeError(f"{base} takes suffix .{letters[0]} or .{letters[1]}, not .{suffix}")
        return base, letters.index(suffix)
    if base in R_TYPE and not suffix:
        return base, None
    raise EncodeError(f"unknown mnemonic {name!r}")


def _field(value, bits, what):
    if not isinstance(value, int) or not 0 <= value < (1 << bits):
        raise EncodeError(f"{what}={value!r} does not fit in {bits} bits")
    return value


def encode(instr: Instruction) -> int:
    m = instr.mnemonic
    if m in I_TYPE:
        if instr.variant not in (0, 1):
            raise EncodeError(f"{m} needs variant 0 or 1")
        if instr.rd or instr.rs2:
            raise EncodeError(f"{m} has no rd/rs2 operand")
        rs1 = _field(instr.rs1, 5, "rs1")
        if rs1 > GROUP_MAX:
            raise EncodeError(f"register group r{rs1}..r{rs1 + 3} runs past r31")
        imm = _field(instr.imm, IMM_BITS, "imm")
        if m != "TEXT" and imm:
            raise EncodeError(f"{m} takes no address operand")
        funct = I_TYPE[m][0] | (instr.variant << 7)
        return OPCODE_I | (funct << 7) | (rs1 << 15) | (imm << 20)
    if m in R_TYPE:
        if instr.variant is not None or instr.imm:
            raise EncodeError(f"{m} has no variant or immediate")
        rd = _field(instr.rd, 5, "rd")
        rs1 = _field(instr.rs1, 5, "rs1")
        rs2 = _field(instr.rs2, 5, "rs2")
        if m in R_UNARY and rs2:
            raise EncodeError(f"{m} takes no s2 operand")
        c7, c3 = R_TYPE[m]
        funct = c7 | (c3 << 7)
        return OPCODE_R | (funct << 7) | (rd << 17) | (rs1 << 22) | (rs2 << 27)
    raise EncodeError(f"unknown mnemonic {m!r}")


def decode(word: int) -> Instruction:
    if not 0 <= word <= 0xFFFFFFFF:
        raise IllegalInstructionError(f"not a 32-bit word: {word!r}")
    opcode = word & 0x7F
    if opcode == OPCODE_I:
        funct = (word >> 7) & 0xFF
        if funct not in _I_BY_FUNCT:
            raise IllegalInstructionError(f"unknown I-type funct {funct:08b} in 0x{word:08X}")
        m, v = _I_BY_FUNCT[funct]
        rs1 = (word >> 15) & 0x1F
        imm = word >> 20
        if rs1 > GROUP_MAX or (m != "TEXT" and imm):
            raise IllegalInstructionError(f"malformed {m} operands in 0x{word:08X}")
        return Instruction(m, v, rs1=rs1, imm=imm)
    if opcode == OPCODE_R:
        funct = (word >> 7) & 0x3FF
        if funct not in _R_BY_FUNCT:
            raise IllegalInstructionError(f"unknown R-type funct {funct:010b} in 0x{word:08X}")
        m = _R_BY_FUNCT[funct]
        rd, rs1, rs2 = (word >> 17) & 0x1F, (word >> 22) & 0x1F, word >> 27
        if m in R_UNARY and rs2:
            raise IllegalInstructionError(f"{m} with non-zero s2 field in 0x{word:08X}")
        return Instruction(m, rd=rd, rs1=rs1, rs2=rs2)
    raise IllegalInstructionError(f"opcode {opcode:07b} is not a custom opcode (0x{word:08X})")


# ---------------------------------------------------------------------------
# Text assembly

_LABEL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$")
_REG = re.compile(r"^[rR]([0-9]+)$")
_IMM = re.compile(r"^@(?:0[xX])?([0-9A-Fa-f]+)$")
_IMM_LABEL = re.compile(r"^@([A-Za-z_][A-Za-z0-9_]*)$")


def _strip(line):
    return line.split("#", 1)[0].strip()


def _parse_operand(tok, lineno, labels):
    m = _REG.match(tok)
    if m:
        n = int(m.group(1))
        if n > 31:
            raise AsmSyntaxError(lineno, f"no register {tok}")
        return ("reg", n)
    # "@0x.." is always hex; "@name" is a label if one is defined, else hex
    hexmatch = _IMM.match(tok)
    labelmatch = _IMM_LABEL.match(tok)
    if hexmatch and (tok[1:3].lower() == "0x" or not (labelmatch and labelmatch.group(1) in labels)):
        return ("imm", int(hexmatch.group(1), 16))
    if labelmatch:
        name = labelmatch.group(1)
        if name not in labels:
            raise AsmSyntaxError(lineno, f"undefined label {name!r}")
        return ("imm", labels[name])
    raise AsmSyntaxError(lineno, f"bad operand {tok!r}")


def _build(mnemonic, variant, ops, lineno):
    kinds = [k for k, _ in ops]
    regs = [v for k, v in ops if k == "reg"]
    imms = [v for k, v in ops if k == "imm"]
    if mnemonic == "TEXT":
        if sorted(kinds) != ["imm", "reg"]:
            raise AsmSyntaxError(lineno, "TEXT takes one register and one @address")
        return Instruction(mnemonic, variant, rs1=regs[0], imm=imms[0])
    if mnemonic in I_TYPE:
        if kinds != ["reg"]:
            raise AsmSyntaxError(lineno, f"{mnemonic} takes one register")
        return Instruction(mnemonic, variant, rs1=regs[0])
    want = 2 if mnemonic in R_UNARY else 3
    if kinds != ["reg"] * want:
        raise AsmSyntaxError(lineno, f"{mnemonic} takes {want} registers")
    if want == 2:
        return Instruction(mnemonic, rs1=regs[0], rd=regs[1])
    return Instruction(mnemonic, rs1=regs[0], rs2=regs[1], rd=regs[2])


def parse(source: str) -> list[Instruction]:
    """Parse assembly text into instructions (two passes for labels)."""
    raw = []
    labels = {}
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = _strip(line)
        while True:
            m = _LABEL.match(text)
            if not m:
                break
            name = m.group(1)
            if name in labels:
                raise AsmSyntaxError(lineno, f"duplicate label {name!r}")
            labels[name] = len(raw)
            text = m.group(2).strip()
        if text:
            raw.append((lineno, text))
    program = []
    for lineno, text in raw:
        head, _, rest = text.partition(" ")
        try:
            mnemonic, variant = parse_name(head)
        except EncodeError as exc:
            raise AsmSyntaxError(lineno, str(exc)) from None
        toks = [t.strip() for t in rest.split(",")] if rest.strip() else []
        if any(not t for t in toks):
            raise AsmSyntaxError(lineno, "empty operand")
        ops = [_parse_operand(t, lineno, labels) for t in toks]
        instr = _build(mnemonic, variant, ops, lineno)
        try:
            encode(instr)
        except EncodeError as exc:
            raise AsmSyntaxError(lineno, str(exc)) from None
        program.append(instr)
    return program


def assemble(source: str) -> list[int]:
    return [encode(i) for i in parse(source)]


def disassemble_one(instr: Instruction) -> str:
    m = instr.mnemonic
    if m == "TEXT":
        if instr.variant == 0:
            return f"TEXT.L @0x{instr.imm:03x}, r{instr.rs1}"
        return f"TEXT.S r{instr.rs1}, @0x{instr.imm:03x}"
    if m in I_TYPE:
        return f"{instr.name} r{instr.rs1}"
    if m in R_UNARY:
        return f"{m} r{instr.rs1}, r{instr.rd}"
    return f"{m} r{instr.rs1}, r{instr.rs2}, r{instr.rd}"


def disassemble(words) -> str:
    return "".join(disassemble_one(decode(w)) + "\n" for w in words)


# ---------------------------------------------------------------------------
# Binary program files

MAGIC = b"IMCP"
VERSION = 1


def to_binary(words) -> bytes:
    words = list(words)
    return MAGIC + bytes([VERSION]) + struct.pack(f"<{len(words)}I", *words)


def from_binary(blob: bytes) -> list[int]:
    if blob[:4] != MAGIC:
        raise ValueError("not an IMCP program (bad magic)")
    if len(blob) < 5 or blob[4] != VERSION:
        raise ValueError(f"unsupported IMCP version {blob[4] if len(blob) > 4 else None}")
    body = blob[5:]
    if len(body) % 4:
        raise ValueError("truncated IMCP program")
    return list(struct.unpack(f"<{len(body) // 4}I", body))
