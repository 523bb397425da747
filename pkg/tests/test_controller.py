import os

import pytest

from imcrypto import crypto_ref as ref
from imcrypto.controller import Loop, Machine, Program, run, step
from imcrypto.errors import ExecutionError, TableError
from imcrypto.isa import Instruction as I
from imcrypto.isa import assemble, encode


def load_state(m, data, reg=28):
    m.cem.store_block(0x10, data)
    step(m, I("TEXT", 0, rs1=reg, imm=0x10))


def test_text_roundtrip(machine):
    data = os.urandom(16)
    load_state(machine, data)
    step(machine, I("TEXT", 1, rs1=28, imm=0x20))
    assert machine.cem.load_block(0x20) == data
    assert machine.group_bytes(28) == data


def test_r0_stays_zero(machine):
    machine.cem.store_block(0x10, b"\xff" * 16)
    step(machine, I("TEXT", 0, rs1=0, imm=0x10))
    assert machine.regs[0] == 0
    assert machine.regs[1] == 0xFFFFFFFF
    step(machine, I("SFTR", 0, rs1=0))
    assert machine.regs[0] == 0


def test_sftr_and_submx_match_reference(machine):
    fwd = ref.sbox_tables()[0]
    s = os.urandom(16)
    load_state(machine, s)
    step(machine, I("SFTR", 0, rs1=28))
    assert machine.group_bytes(28) == bytes(ref.shift_rows(s))
    step(machine, I("SUBMX", 0, rs1=28))
    assert machine.group_bytes(28) == bytes(ref.mix_columns(ref.sub_bytes(ref.shift_rows(s))))
    load_state(machine, s)
    step(machine, I("SBOX", 0, rs1=28))
    assert machine.group_bytes(28) == bytes(fwd[b] for b in s)


def test_submx_dec_uses_bound_round_key(machine):
    s, rk = os.urandom(16), os.urandom(16)
    machine.cem.store_block(0x40, rk)
    machine.regs[machine.round_key_reg] = 0x40
    load_state(machine, s)
    step(machine, I("SUBMX", 1, rs1=28))
    expected = ref.inv_mix_columns(ref.add_round_key(ref.inv_sub_bytes(s), rk))
    assert machine.group_bytes(28) == bytes(expected)


def test_im_ops_address_by_register(machine):
    machine.cem.write_word(0x50, 5)
    machine.cem.write_word(0x51, 7)
    machine.regs[1:4] = [0x50, 0x51, 0x52]
    step(machine, I("IMADD", rs1=1, rs2=2, rd=3))
    assert machine.cem.read_word(0x52) == 12


def test_empty_program_costs_nothing():
    m = Machine(load_tables=False)
    report = run(m, Program([]))
    assert sum(report.events.values()) == 0


def test_unloaded_tables_error():
    m = Machine(load_tables=False)
    with pytest.raises(ExecutionError) as info:
        m.run(Program([encode(I("SFTR", 0, rs1=4)), encode(I("SUBMX", 0, rs1=4))]))
    assert info.value.pc == 1
    assert isinstance(info.value.cause, TableError)


def test_address_error_reports_pc():
    m = Machine(capacity=64, load_tables=False)
    m.regs[1] = 1000
    with pytest.raises(ExecutionError) as info:
        m.run(Program(assemble("IMMOVE r2, r3\nIMMOVE r1, r2\n")))
    assert info.value.pc == 1


def test_loop_strides_and_restore():
    # copy 8 words 0x100.. -> 0x200.. one IMMOVE at a time
    m = Machine(capacity=1024, load_tables=False)
    for i in range(8):
        m.cem.write_word(0x100 + i, i + 1)
    m.regs[1], m.regs[2] = 0xFF, 0x1FF
    prog = Program(assemble("IMMOVE r1, r2\n"), loops=[Loop(0, 1, 8, {1: 1, 2: 1})])
    report = m.run(prog)
    assert m.cem.words[0x200:0x208] == list(range(1, 9))
    assert (m.regs[1], m.regs[2]) == (0xFF, 0x1FF)
    assert report.events["cem_word_op"] == 8


def test_nested_loops_and_expanded_counts():
    prog = Program(assemble("SFTR.E r4\nSFTR.D r4\nIMMOVE r0, r0\n"),
                   loops=[Loop(0, 3, 3), Loop(1, 2, 4)])
    counts = prog.expanded_names()
    assert counts == {"SFTR.E": 3, "SFTR.D": 12, "IMMOVE": 3}
    m = Machine(capacity=64, load_tables=False)
    m.run(prog)
    assert m.executed["SFTR.D"] == 12


def test_overlapping_loops_rejected():
    prog = Program(assemble("SFTR.E r4\nSFTR.E r4\nSFTR.E r4\n"), loops=[Loop(0, 2, 1), Loop(1, 3, 1)])
    with pytest.raises(ValueError):
        prog.validate()
