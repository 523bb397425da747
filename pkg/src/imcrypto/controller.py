"""RISC-V based controller model.

The controller fetches custom instructions, decodes them and drives the
CEM, the shifter and the LUT fabric. The custom ISA has no branches, so
repetition lives in `Program` metadata as `Loop` segments: a loop reruns a
contiguous instruction range and, before each iteration, adds a fixed stride
to selected registers (restoring them when the loop exits).

Registers hold data for TEXT/SFTR/SUBMX/SBOX (a group of four registers is
one 128-bit state) and CEM word addresses for the IM* instructions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import isa
from .cem import DEFAULT_CAPACITY, MASK32, CemMemory, WordOp, _OPS
from .crypto_ref import Direction
from .errors import AddressError, ExecutionError, TableError
from .lut_fabric import LutFabric
from .perf import PerfReport
from .shifter import shift_words

N_REGS = 32

# Events produced by one execution of each instruction.
EVENT_BUNDLES = {
    "TEXT.L": {"cem_read_word": 4},
    "TEXT.S": {"cem_write_word": 4},
    "SFTR.E": {"shifter_pass": 1},
    "SFTR.D": {"shifter_pass": 1},
    "SUBMX.E": {"racam_read": 16, "ram_read": 32, "xor_tree_pass": 8},
    "SUBMX.D": {"cem_read_word": 4, "racam_search": 16, "encoder_pass": 16, "xor_tree_pass": 8},
    "SBOX.E": {"racam_read": 16},
    "SBOX.D": {"racam_search": 16, "encoder_pass": 16},
}
for _m in isa.R_TYPE:
    EVENT_BUNDLES[_m] = {"cem_word_op": 1}

_R_OP = {
    "IMMOVE": WordOp.MOVE, "IMADD": WordOp.ADD, "IMAND": WordOp.AND, "IMOR": WordOp.OR,
    "IMXOR": WordOp.XOR, "IMNOT": WordOp.NOT, "IMCSR": WordOp.CSR, "IMSR": WordOp.SR,
    "IMCSL": WordOp.CSL, "IMSL": WordOp.SL,
}


@dataclass(frozen=True)
class Loop:
    """Repeat instructions ``[start, end)`` ``count`` times.

    ``strides`` maps register -> delta added before every iteration; the
    registers get their entry values back after the last one. With ``trace``
    set, the state register group is recorded after every iteration.
    """

    start: int
    end: int
    count: int
    strides: dict = field(default_factory=dict)
    trace: bool = False


@dataclass
class Program:
    words: list
    loops: list = field(default_factory=list)
    preload: dict = field(default_factory=dict)
    bindings: dict = field(default_factory=dict)
    round_key_reg: int = 5
    state_reg: int = 28
    n_blocks: int = 1
    rounds_per_block: int = 0
    independent_blocks: bool = False

    def validate(self, capacity: int = DEFAULT_CAPACITY) -> None:
        for w in self.words:
            isa.decode(w)
        n = len(self.words)
        spans = sorted(self.loops, key=lambda lp: (lp.start, -lp.end))
        for lp in spans:
            if not 0 <= lp.start < lp.end <= n or lp.count < 0:
                raise ValueError(f"bad loop {lp}")
        for a in spans:
            for b in spans:
                if a is not b and a.start < b.start < a.end < b.end:
                    raise ValueError(f"loops {a} and {b} overlap without nesting")
        for addr, words in self.preload.items():
            if addr < 0 or addr + len(words) > capacity:
                raise AddressError(f"preload at 0x{addr:X} exceeds memory")
        for name, addr in self.bindings.items():
            if not 0 <= addr < capacity:
                raise AddressError(f"binding {name}=0x{addr:X} outside memory")

    def instructions(self) -> list:
        return [isa.decode(w) for w in self.words]

    def expanded_names(self) -> Counter:
        """How many times each instruction executes, loops unrolled."""
        counts = Counter()
        mult = [1] * len(self.words)
        for lp in self.loops:
            for pc in range(lp.start, lp.end):
                mult[pc] *= lp.count
        for w, m in zip(self.words, mult):
            counts[isa.decode(w).name] += m
        return counts


class Machine:
    def __init__(self, capacity: int = DEFAULT_CAPACITY, fabric: LutFabric | None = None,
                 load_tables: bool = True):
        self.regs = [0] * N_REGS
        self.cem = CemMemory(capacity)
        if fabric is None:
            fabric = LutFabric()
            if load_tables:
                fabric.load_tables()
        self.fabric = fabric
        self.executed = Counter()
        self.round_key_reg = 5
        self.state_reg = 28
        self.trace = []
        self.pc = 0

    # -- register helpers ---------------------------------------------------

    def group_bytes(self, s1: int) -> bytes:
        r = self.regs
        return ((r[s1] << 96) | (r[s1 + 1] << 64) | (r[s1 + 2] << 32) | r[s1 + 3]).to_bytes(16, "big")

    def set_group_bytes(self, s1: int, data: bytes) -> None:
        v = int.from_bytes(data, "big")
        for k in range(4):
            if s1 + k:
                self.regs[s1 + k] = (v >> (96 - 32 * k)) & MASK32

    # -- execution ----------------------------------------------------------

    def compile(self, instr: isa.Instruction):
        """Return a zero-argument callable executing ``instr`` on this machine.

        The callable does not update ``executed``; `step` and `run` account
        for executions (the ISA has no branches, so `run` counts statically).
        """
        regs, cem, name = self.regs, self.cem, instr.name
        words, cap = cem.words, cem.capacity
        s = instr.rs1

        if instr.mnemonic == "TEXT":
            imm = instr.imm
            if imm + 4 > cap:
                def run():
                    raise AddressError(f"word address 0x{imm:X} outside capacity 0x{cap:X}")
                return run
            if instr.variant == 0:
                lo = max(s, 1)

                def run():
                    regs[lo : s + 4] = words[imm + lo - s : imm + 4]
                return run

            def run():
                words[imm : imm + 4] = regs[s : s + 4]
            return run

        if instr.mnemonic == "SFTR":
            direction = Direction.DEC if instr.variant else Direction.ENC
            lo = max(s, 1)

            def run():
                regs[lo : s + 4] = shift_words(regs[s : s + 4], direction)[lo - s :]
            return run

        if instr.mnemonic in ("SUBMX", "SBOX"):
            fabric = self.fabric
            m0, m1, m2, m3 = fabric.modules
            decrypt = bool(instr.variant)
            lo = max(s, 1)

            def ready():
                if not (m0._ready and m1._ready and m2._ready and m3._ready):
                    raise TableError("LUT fabric tables are not loaded")

            if instr.mnemonic == "SBOX":
                def run():
                    ready()
                    out = [m0.sbox_word(regs[s], decrypt), m1.sbox_word(regs[s + 1], decrypt),
                           m2.sbox_word(regs[s + 2], decrypt), m3.sbox_word(regs[s + 3], decrypt)]
                    regs[lo : s + 4] = out[lo - s :]
                return run

            if decrypt:
                key_reg = self.round_key_reg

                def run():
                    ready()
                    base = regs[key_reg]
                    if base + 4 > cap:
                        raise AddressError(f"round key address 0x{base:X} outside capacity 0x{cap:X}")
                    k0, k1, k2, k3 = words[base : base + 4]
                    out = [m0.decrypt_word(regs[s], k0), m1.decrypt_word(regs[s + 1], k1),
                           m2.decrypt_word(regs[s + 2], k2), m3.decrypt_word(regs[s + 3], k3)]
                    regs[lo : s + 4] = out[lo - s :]
                return run

            def run():
                ready()
                out = [m0.encrypt_word(regs[s]), m1.encrypt_word(regs[s + 1]),
                       m2.encrypt_word(regs[s + 2]), m3.encrypt_word(regs[s + 3])]
                regs[lo : s + 4] = out[lo - s :]
            return run

        fn = _OPS[_R_OP[name]]
        r1, r2, rd = instr.rs1, instr.rs2, instr.rd

        def bad(a, b, d):
            return AddressError(f"word address outside capacity 0x{cap:X} (s1=0x{a:X} s2=0x{b:X} sd=0x{d:X})")

        if name in isa.R_UNARY:
            def run():
                a, d = regs[r1], regs[rd]
                if a >= cap or d >= cap:
                    raise bad(a, 0, d)
                words[d] = fn(words[a], 0)
            return run

        if name == "IMXOR":
            def run():
                a, b, d = regs[r1], regs[r2], regs[rd]
                if a >= cap or b >= cap or d >= cap:
                    raise bad(a, b, d)
                words[d] = words[a] ^ words[b]
            return run

        def run():
            a, b, d = regs[r1], regs[r2], regs[rd]
            if a >= cap or b >= cap or d >= cap:
                raise bad(a, b, d)
            words[d] = fn(words[a], words[b])
        return run

    def step(self, instr: isa.Instruction) -> None:
        self.compile(instr)()
        self.executed[instr.name] += 1
        if instr.mnemonic in _R_OP:
            self.cem.op_counters[_R_OP[instr.mnemonic].value] += 1

    def _build(self, program: Program):
        """Turn the flat program into a tree of (pc, fn) and loop nodes."""
        fns = [self.compile(i) for i in program.instructions()]
        loops = sorted(program.loops, key=lambda lp: (lp.start, -lp.end))

        def build(lo, hi, loops):
            nodes, pc, i = [], lo, 0
            while pc < hi:
                if i < len(loops) and loops[i].start == pc:
                    lp = loops[i]
                    inner = [x for x in loops[i + 1 :] if x.end <= lp.end and x.start >= lp.start]
                    nodes.append(("loop", lp, build(lp.start, lp.end, inner)))
                    i += 1 + len(inner)
                    pc = lp.end
                else:
                    if not nodes or nodes[-1][0] != "ops":
                        nodes.append(("ops", [], None))
                    nodes[-1][1].append((pc, fns[pc]))
                    pc += 1
            return nodes

        return build(0, len(fns), loops)

    def _exec(self, nodes):
        regs = self.regs
        for kind, a, b in nodes:
            if kind == "ops":
                pc = -1
                try:
                    for pc, fn in a:
                        fn()
                except Exception as exc:
                    self.pc = pc
                    raise ExecutionError(pc, exc) from exc
            else:
                lp = a
                saved = {r: regs[r] for r in lp.strides}
                strides = list(lp.strides.items())
                for _ in range(lp.count):
                    for r, delta in strides:
                        if r:
                            regs[r] = (regs[r] + delta) & MASK32
                    self._exec(b)
                    if lp.trace:
                        self.trace.append(self.group_bytes(self.state_reg))
                for r, v in saved.items():
                    regs[r] = v

    def run(self, program: Program) -> PerfReport:
        program.validate(self.cem.capacity)
        for addr, ws in program.preload.items():
            self.cem.words[addr : addr + len(ws)] = [w & MASK32 for w in ws]
        self.round_key_reg = program.round_key_reg
        self.state_reg = program.state_reg
        self._exec(self._build(program))
        self.regs[0] = 0
        delta = program.expanded_names()
        self.executed.update(delta)
        for name, n in delta.items():
            if name in _R_OP:
                self.cem.op_counters[_R_OP[name].value] += n
        report = PerfReport(
            n_blocks=program.n_blocks,
            rounds_per_block=program.rounds_per_block,
            independent_blocks=program.independent_blocks,
        )
        for name, n in delta.items():
            for event, k in EVENT_BUNDLES[name].items():
                report.record(event, k * n)
        return report


def step(machine: Machine, instr: isa.Instruction) -> None:
    machine.step(instr)


def run(machine: Machine, program: Program) -> PerfReport:
    return machine.run(program)
