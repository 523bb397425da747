import random

import pytest

from imcrypto import crypto_ref as ref
from imcrypto.errors import NoMatchError, TableError
from imcrypto.lut_fabric import LutFabric, LutModule, decrypt_column, encrypt_column, sub_bytes_column


@pytest.fixture(scope="module")
def module():
    fabric = LutFabric()
    fabric.load_tables()
    return fabric.modules[0]


def test_unloaded_module_refuses():
    m = LutModule()
    with pytest.raises(TableError):
        m.encrypt_column([0, 0, 0, 0])
    with pytest.raises(TableError):
        m.decrypt_column([0, 0, 0, 0], [0, 0, 0, 0])
    assert not LutFabric().loaded


def test_load_rejects_non_bijective_sbox():
    with pytest.raises(TableError):
        LutFabric().load_tables([0] * 256)


def test_encrypt_column_fips_round1(module):
    # FIPS-197 appendix B, round 1: after ShiftRows column 0 holds bytes 19 f4 8d 08
    # of the round input; SubBytes gives d4 bf 5d 30 and MixColumns 04 66 81 e5
    assert encrypt_column(module, [0x19, 0xF4, 0x8D, 0x08]) == [0x04, 0x66, 0x81, 0xE5]


def test_combined_steps_match_separate_steps(module):
    rng = random.Random(3)
    fwd, inv = ref.sbox_tables()
    for _ in range(2000):
        col = [rng.randrange(256) for _ in range(4)]
        rk = [rng.randrange(256) for _ in range(4)]
        assert encrypt_column(module, col) == ref.mix_column([fwd[b] for b in col])
        expected = ref.inv_mix_column(ref.add_round_key([inv[b] for b in col], rk))
        assert decrypt_column(module, col, rk) == expected
        assert sub_bytes_column(module, col, "enc") == [fwd[b] for b in col]
        assert sub_bytes_column(module, col, "dec") == [inv[b] for b in col]


def test_counters_per_column(module):
    m = LutModule()
    m.load(ref.sbox_tables()[0])
    m.encrypt_column([1, 2, 3, 4])
    assert m.xor_tree_passes == 2
    reads = m.array_reads()
    assert reads["racam"] == [1, 1, 1, 1] and reads["ram2x"] == [1, 1, 1, 1]
    m.decrypt_column([1, 2, 3, 4], [0, 0, 0, 0])
    assert m.encoder_passes == 4
    assert [a.searches for a in m.racam] == [1, 1, 1, 1]


def test_corrupted_cam_row_surfaces(module):
    m = LutModule()
    m.load(ref.sbox_tables()[0])
    m.racam[2].write_row(0, 0x00)  # 0x63 is now missing from array 2
    with pytest.raises(NoMatchError):
        m.decrypt_column([0, 0, 0x63, 0], [0, 0, 0, 0])


def test_column_byte_range_checked(module):
    with pytest.raises(ValueError):
        module.encrypt_column([256, 0, 0, 0])
