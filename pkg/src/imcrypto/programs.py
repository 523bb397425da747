"""Program generators for AES (ECB/CBC/CTR, enc/dec) and SHA-256, plus the
host-side drivers that load a machine, run a program and read results back.

Programs are self-contained: registers start at zero and are set up with
``TEXT.L`` from register images that the program preloads into scratch
memory. Host data (round keys, IV/counter, payload, message) is stored in
the CEM before the run, as the RISC-V core would.

AES word map::

    0x0000  working state          0x0004  CTR counter block
    0x0100  round keys rk_0..rk_N  0x0400  scratch, constants, register images
    0x1000  IV slot, then the payload blocks (processed in place)
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import isa
from .cem import (
    DATA_BASE,
    DEFAULT_CAPACITY,
    ROUND_KEY_BASE,
    SCRATCH_BASE,
    SHA_HASH_BASE,
    SHA_K_BASE,
    SHA_W_BASE,
    STATE_BASE,
)
from .controller import Loop, Machine, Program
from .crypto_ref import (
    Direction,
    Mode,
    Variant,
    ctr_increment,
    key_expand,
    sha256_constants,
    sha256_pad,
)
from .errors import LengthError
from .perf import PerfReport

I = isa.Instruction

WORK = STATE_BASE
CTR_BLOCK = STATE_BASE + 4
AES_T, AES_U = SCRATCH_BASE, SCRATCH_BASE + 1
AES_ONE, AES_MINUS1, AES_31 = SCRATCH_BASE + 2, SCRATCH_BASE + 3, SCRATCH_BASE + 4
IMAGE_BASE = SCRATCH_BASE + 0x10
IV_SLOT = DATA_BASE
PAYLOAD = DATA_BASE + 4

# AES register roles (each *_REG is the first of four unless noted)
R_WORK, R_RK, R_DATA, R_FINAL, R_AUX = 1, 5, 9, 13, 17
R_ONE, R_MINUS1, R_31, R_T, R_U = 21, 22, 23, 26, 27
R_STATE = 28


class _Builder:
    def __init__(self):
        self.instrs = []
        self.loops = []
        self.preload = {}
        self._next_image = IMAGE_BASE

    @property
    def pc(self):
        return len(self.instrs)

    def emit(self, instr):
        self.instrs.append(instr)

    def xor(self, a, b, d):
        self.emit(I("IMXOR", rs1=a, rs2=b, rd=d))

    def xor4(self, a, b, d):
        for k in range(4):
            self.xor(a + k, b + k, d + k)

    def r(self, mnemonic, s1, s2, sd):
        self.emit(I(mnemonic, rs1=s1, rs2=s2, rd=sd))

    def move(self, s1, sd):
        self.emit(I("IMMOVE", rs1=s1, rd=sd))

    def image(self, values):
        """Preload a 4-word register image; returns its address."""
        addr = self._next_image
        self._next_image += 4
        vals = list(values) + [0] * (4 - len(values))
        self.preload[addr] = [v & 0xFFFFFFFF for v in vals]
        return addr

    def load_regs(self, s1, values):
        self.emit(I("TEXT", 0, rs1=s1, imm=self.image(values)))

    def loop(self, start, count, strides=None, trace=False):
        self.loops.append(Loop(start, self.pc, count, dict(strides or {}), trace))

    def program(self, **meta):
        return Program([isa.encode(i) for i in self.instrs], self.loops, self.preload, **meta)


def _quad(base):
    return [base + k for k in range(4)]


def _stride4(first, delta):
    return {first + k: delta for k in range(4)}


def _is_zero(b, src):
    """``T <- 1 if mem[src] == 0 else 0``; clobbers T and U.

    ``~x & (x - 1)`` has its top bit set exactly when x is zero.
    """
    b.emit(I("IMNOT", rs1=src, rd=R_T))
    b.r("IMADD", src, R_MINUS1, R_U)
    b.r("IMAND", R_T, R_U, R_T)
    b.r("IMSR", R_31, R_T, R_T)


def _ctr_increment(b):
    """128-bit big-endian ``counter += 1`` with a branch-free carry chain."""
    c = [R_AUX + k for k in range(4)]  # c[3] is the low word
    b.r("IMADD", c[3], R_ONE, c[3])
    _is_zero(b, c[3])
    for k in (2, 1, 0):
        b.r("IMADD", c[k], R_T, c[k])
        if k:
            # carry out iff carry in and the word wrapped to zero
            b.r("IMXOR", R_T, R_ONE, R_U)
            b.r("IMOR", c[k], R_U, R_U)
            _is_zero(b, R_U)


def aes_program(variant, mode, direction, n_blocks: int) -> Program:
    """Instruction program processing ``n_blocks`` payload blocks in place."""
    variant, mode, direction = Variant(variant), Mode(mode), Direction(direction)
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    n = variant.rounds
    rk = lambda r: ROUND_KEY_BASE + 4 * r
    if mode is Mode.CTR:
        direction = Direction.ENC  # keystream always uses the forward cipher
    descending = mode is Mode.CBC and direction is Direction.DEC

    b = _Builder()
    b.load_regs(R_WORK, _quad(WORK))
    enc = direction is Direction.ENC
    b.load_regs(R_RK, _quad(rk(0) if enc else rk(n)))
    b.load_regs(R_FINAL, _quad(rk(n) if enc else rk(0)))
    step = -4 if descending else 4
    # pre-increment loop registers start one block before their first use
    data_first = PAYLOAD + 4 * (n_blocks - 1) if descending else PAYLOAD
    b.load_regs(R_DATA, _quad(data_first - step))
    if mode is Mode.CBC:
        b.load_regs(R_AUX, _quad(data_first - 4 - step))
    if mode is Mode.CTR:
        b.load_regs(R_AUX, _quad(CTR_BLOCK))
        b.load_regs(R_ONE, [AES_ONE, AES_MINUS1, AES_31])
        b.load_regs(R_T - 2, [0, 0, AES_T, AES_U])
        b.preload[AES_ONE] = [1, 0xFFFFFFFF, 31]

    block_start = b.pc
    if enc:
        src = R_DATA
        if mode is Mode.CBC:
            b.xor4(R_DATA, R_AUX, R_WORK)
            src = R_WORK
        elif mode is Mode.CTR:
            src = R_AUX
        b.xor4(src, R_RK, R_WORK)
        b.emit(I("TEXT", 0, rs1=R_STATE, imm=WORK))
        start = b.pc
        b.emit(I("SFTR", 0, rs1=R_STATE))
        b.emit(I("SUBMX", 0, rs1=R_STATE))
        b.emit(I("TEXT", 1, rs1=R_STATE, imm=WORK))
        b.xor4(R_WORK, R_RK, R_WORK)
        b.emit(I("TEXT", 0, rs1=R_STATE, imm=WORK))
        b.loop(start, n - 1, _stride4(R_RK, 4), trace=True)
        b.emit(I("SFTR", 0, rs1=R_STATE))
        b.emit(I("SBOX", 0, rs1=R_STATE))
        b.emit(I("TEXT", 1, rs1=R_STATE, imm=WORK))
        if mode is Mode.CTR:
            b.xor4(R_WORK, R_FINAL, R_WORK)
            b.xor4(R_WORK, R_DATA, R_DATA)
            _ctr_increment(b)
        else:
            b.xor4(R_WORK, R_FINAL, R_DATA)
    else:
        b.xor4(R_DATA, R_RK, R_WORK)
        b.emit(I("TEXT", 0, rs1=R_STATE, imm=WORK))
        start = b.pc
        b.emit(I("SFTR", 1, rs1=R_STATE))
        b.emit(I("SUBMX", 1, rs1=R_STATE))
        b.loop(start, n - 1, _stride4(R_RK, -4), trace=True)
        b.emit(I("SFTR", 1, rs1=R_STATE))
        b.emit(I("SBOX", 1, rs1=R_STATE))
        b.emit(I("TEXT", 1, rs1=R_STATE, imm=WORK))
        if mode is Mode.CBC:
            b.xor4(R_WORK, R_FINAL, R_WORK)
            b.xor4(R_WORK, R_AUX, R_DATA)
        else:
            b.xor4(R_WORK, R_FINAL, R_DATA)
    strides = _stride4(R_DATA, step)
    if mode is Mode.CBC:
        strides.update(_stride4(R_AUX, step))
    b.loop(block_start, n_blocks, strides)

    return b.program(
        bindings={"state": WORK, "counter": CTR_BLOCK, "round_keys": ROUND_KEY_BASE,
                  "constants": SCRATCH_BASE, "iv": IV_SLOT, "data": PAYLOAD},
        round_key_reg=R_RK,
        state_reg=R_STATE,
        n_blocks=n_blocks,
        rounds_per_block=n,
        independent_blocks=not (mode is Mode.CBC and direction is Direction.ENC),
    )


# ---------------------------------------------------------------------------
# SHA-256

SHA_HS_BASE = SHA_HASH_BASE + 8  # chaining value H0..H7
SHA_TEMPS = SCRATCH_BASE
SHA_AMOUNTS = (7, 18, 3, 17, 19, 10, 2, 13, 22, 6, 11, 25)
SHA_AMOUNT_BASE = SCRATCH_BASE + 4
SHA_MSG = DATA_BASE

# registers: schedule pointers, temps, shift amounts, A..H, k and w pointers
R_W16, R_W15, R_W7, R_W2, R_WI = 1, 2, 3, 4, 5
R_T0, R_T1, R_T2 = 6, 7, 8
R_MSG = 9
R_AMT = {a: 10 + i for i, a in enumerate(SHA_AMOUNTS)}
R_A = 22  # A..H are r22..r29
R_K, R_WP = 30, 31


def _sha_schedule_body(b):
    a = R_AMT
    b.r("IMCSR", a[7], R_W15, R_T0)
    b.r("IMCSR", a[18], R_W15, R_T1)
    b.r("IMXOR", R_T0, R_T1, R_T0)
    b.r("IMSR", a[3], R_W15, R_T1)
    b.r("IMXOR", R_T0, R_T1, R_T0)
    b.r("IMCSR", a[17], R_W2, R_T1)
    b.r("IMCSR", a[19], R_W2, R_T2)
    b.r("IMXOR", R_T1, R_T2, R_T1)
    b.r("IMSR", a[10], R_W2, R_T2)
    b.r("IMXOR", R_T1, R_T2, R_T1)
    b.r("IMADD", R_W16, R_T0, R_T2)
    b.r("IMADD", R_T2, R_W7, R_T2)
    b.r("IMADD", R_T2, R_T1, R_WI)


def _sha_round_body(b):
    a = R_AMT
    A, B, C, D, E, F, G, H = range(R_A, R_A + 8)
    # t0 = Sigma1(E)
    b.r("IMCSR", a[6], E, R_T0)
    b.r("IMCSR", a[11], E, R_T1)
    b.r("IMXOR", R_T0, R_T1, R_T0)
    b.r("IMCSR", a[25], E, R_T1)
    b.r("IMXOR", R_T0, R_T1, R_T0)
    # t1 = choice(E, F, G)
    b.r("IMAND", E, F, R_T1)
    b.emit(I("IMNOT", rs1=E, rd=R_T2))
    b.r("IMAND", R_T2, G, R_T2)
    b.r("IMXOR", R_T1, R_T2, R_T1)
    # t0 = temp1
    b.r("IMADD", H, R_T0, R_T0)
    b.r("IMADD", R_T0, R_T1, R_T0)
    b.r("IMADD", R_T0, R_K, R_T0)
    b.r("IMADD", R_T0, R_WP, R_T0)
    # t1 = Sigma0(A)
    b.r("IMCSR", a[2], A, R_T1)
    b.r("IMCSR", a[13], A, R_T2)
    b.r("IMXOR", R_T1, R_T2, R_T1)
    b.r("IMCSR", a[22], A, R_T2)
    b.r("IMXOR", R_T1, R_T2, R_T1)
    # t2 = majority(A, B, C); H is dead after temp1 so it serves as scratch
    b.r("IMOR", B, C, R_T2)
    b.r("IMAND", A, R_T2, R_T2)
    b.r("IMAND", B, C, H)
    b.r("IMOR", R_T2, H, R_T2)
    # t1 = temp2
    b.r("IMADD", R_T1, R_T2, R_T1)
    b.move(G, H)
    b.move(F, G)
    b.move(E, F)
    b.r("IMADD", D, R_T0, E)
    b.move(C, D)
    b.move(B, C)
    b.move(A, B)
    b.r("IMADD", R_T0, R_T1, A)


def sha256_program(message_len_words: int) -> Program:
    """Hash a padded message of ``message_len_words`` words stored at 0x1000."""
    if message_len_words < 16 or message_len_words % 16:
        raise LengthError("padded message must be a positive multiple of 16 words")
    chunks = message_len_words // 16
    k, h0 = sha256_constants()
    b = _Builder()
    b.preload[SHA_K_BASE] = list(k)
    b.preload[SHA_HS_BASE] = list(h0)
    b.preload[SHA_AMOUNT_BASE] = list(SHA_AMOUNTS)
    amt = [SHA_AMOUNT_BASE + i for i in range(12)]
    hreg = [SHA_HASH_BASE + i for i in range(8)]
    hs = [SHA_HS_BASE + i for i in range(8)]
    temps = [SHA_TEMPS + i for i in range(3)]
    W = SHA_W_BASE

    b.load_regs(10, amt[0:4])
    b.load_regs(14, amt[4:8])
    b.load_regs(18, amt[8:12])
    b.load_regs(R_A, hreg[0:4])
    b.load_regs(28, [hreg[6], hreg[7], SHA_K_BASE - 1, W - 1])
    b.load_regs(26, hreg[4:8])
    # r6..r8 temps, r9 message pointer (pre-incremented by both loops)
    b.load_regs(R_T0, [temps[0], temps[1], temps[2], SHA_MSG - 17])
    img_copy = b.image([0, W - 1])
    hs_lo, hs_hi = b.image(hs[0:4]), b.image(hs[4:8])
    img_s0 = b.image([W - 1, W, W + 8, W + 13])
    img_s1 = b.image([W + 15, temps[0], temps[1], temps[2]])

    chunk = b.pc
    # copy the current chunk into w[0..15]
    b.emit(I("TEXT", 0, rs1=1, imm=img_copy))
    start = b.pc
    b.move(R_MSG, 2)
    b.loop(start, 16, {R_MSG: 1, 2: 1})
    # A..H <- chaining value
    b.emit(I("TEXT", 0, rs1=1, imm=hs_lo))
    b.emit(I("TEXT", 0, rs1=5, imm=hs_hi))
    for i in range(8):
        b.move(1 + i, R_A + i)
    b.emit(I("TEXT", 0, rs1=1, imm=img_s0))
    b.emit(I("TEXT", 0, rs1=5, imm=img_s1))
    start = b.pc
    _sha_schedule_body(b)
    b.loop(start, 48, {r: 1 for r in (R_W16, R_W15, R_W7, R_W2, R_WI)})
    start = b.pc
    _sha_round_body(b)
    b.loop(start, 64, {R_K: 1, R_WP: 1})
    # chaining value += A..H
    b.emit(I("TEXT", 0, rs1=1, imm=hs_lo))
    b.emit(I("TEXT", 0, rs1=5, imm=hs_hi))
    for i in range(8):
        b.r("IMADD", 1 + i, R_A + i, 1 + i)
    b.loop(chunk, chunks, {R_MSG: 16})

    return b.program(
        bindings={"k": SHA_K_BASE, "w": W, "hash_regs": SHA_HASH_BASE,
                  "digest": SHA_HS_BASE, "scratch": SCRATCH_BASE, "message": SHA_MSG},
        n_blocks=chunks,
        rounds_per_block=64,
        independent_blocks=False,
    )


# ---------------------------------------------------------------------------
# Host drivers


@dataclass
class FabricResult:
    output: bytes
    report: PerfReport
    trace: list


def _capacity_for(n_words_end):
    return max(DEFAULT_CAPACITY, n_words_end)


def run_aes(variant, mode, direction, key: bytes, iv, data: bytes, machine: Machine | None = None) -> FabricResult:
    """Run ``data`` through the fabric. CTR accepts any length; ECB/CBC need
    a multiple of 16 bytes."""
    variant, mode, direction = Variant(variant), Mode(mode), Direction(direction)
    data = bytes(data)
    if mode is not Mode.CTR and len(data) % 16:
        raise LengthError(f"{mode.value.upper()} needs a multiple of 16 bytes, got {len(data)}")
    if mode is not Mode.ECB and (iv is None or len(iv) != 16):
        raise LengthError("IV/counter must be 16 bytes")
    ks = key_expand(key, variant)
    n_blocks = -(-len(data) // 16)
    if n_blocks == 0:
        return FabricResult(b"", PerfReport(), [])
    padded = data + bytes(16 * n_blocks - len(data))
    if machine is None:
        machine = Machine(_capacity_for(PAYLOAD + 4 * n_blocks))
    mem = machine.cem
    for r, rk in enumerate(ks.round_keys):
        mem.store_block(ROUND_KEY_BASE + 4 * r, rk)
    if mode is Mode.CBC:
        mem.store_block(IV_SLOT, iv)
    elif mode is Mode.CTR:
        mem.store_block(CTR_BLOCK, iv)
    mem.store_bytes(PAYLOAD, padded)
    program = aes_program(variant, mode, direction, n_blocks)
    machine.trace = []
    report = machine.run(program)
    report.payload_bytes = len(data)
    out = mem.load_bytes(PAYLOAD, 4 * n_blocks)[: len(data)]
    return FabricResult(out, report, machine.trace)


def run_aes_sharded(variant, mode, direction, key, iv, data, jobs: int = 1) -> FabricResult:
    """Split ECB/CTR payloads across ``jobs`` independent machines.

    Shards run on a thread pool and are reassembled in order, so the output
    is bit-identical to a single run. CBC always runs as one stream.
    """
    mode = Mode(mode)
    data = bytes(data)
    n_blocks = -(-len(data) // 16)
    if jobs <= 1 or mode is Mode.CBC or n_blocks < 2:
        return run_aes(variant, mode, direction, key, iv, data)
    jobs = min(jobs, n_blocks)
    per = -(-n_blocks // jobs)
    shards = []
    for s in range(0, n_blocks, per):
        chunk = data[16 * s : 16 * (s + per)]
        shard_iv = ctr_increment(iv, s) if mode is Mode.CTR else iv
        shards.append((chunk, shard_iv))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lambda a: run_aes(variant, mode, direction, key, a[1], a[0]), shards))
    report = PerfReport()
    for r in results:
        report = report + r.report
    return FabricResult(b"".join(r.output for r in results), report,
                        [t for r in results for t in r.trace])


def run_sha256(message: bytes, machine: Machine | None = None) -> FabricResult:
    padded = sha256_pad(message)
    n_words = len(padded) // 4
    if machine is None:
        machine = Machine(_capacity_for(SHA_MSG + n_words))
    machine.cem.store_bytes(SHA_MSG, padded)
    report = machine.run(sha256_program(n_words))
    report.payload_bytes = len(message)
    digest = machine.cem.load_bytes(SHA_HS_BASE, 8)
    return FabricResult(digest, report, [])


def format_trace(trace) -> str:
    """Round trace as text: one 32-digit hex state per line."""
    return "".join(bytes(s).hex() + "\n" for s in trace)
