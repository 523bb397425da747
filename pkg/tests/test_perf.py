import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imcrypto.errors import ConfigError
from imcrypto.perf import (
    EVENTS,
    FIXTURE_TRANSFER_ENERGY_PJ_PER_BYTE,
    FIXTURE_TRANSFER_LATENCY_NS_PER_BYTE,
    PerfParams,
    PerfReport,
    finalize,
    pipeline_schedule,
    record,
    transfer_overhead,
)
from imcrypto.programs import run_aes


def test_record():
    r = PerfReport()
    record(r, "shifter_pass")
    record(r, "shifter_pass")
    record(r, "ram_read", 0)
    assert r.events["shifter_pass"] == 2 and r.events["ram_read"] == 0
    with pytest.raises(ConfigError):
        record(r, "bogus")
    with pytest.raises(ConfigError):
        record(r, "ram_read", -1)


def test_params_validation(tmp_path):
    p = PerfParams.default()
    assert set(p.latency_ns) == set(EVENTS)
    bad = p.to_dict()
    bad["events"]["ram_read"]["latency_ns"] = -1
    with pytest.raises(ConfigError):
        PerfParams.from_dict(bad)
    bad = p.to_dict()
    del bad["events"]["ram_read"]
    with pytest.raises(ConfigError):
        PerfParams.from_dict(bad)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    assert PerfParams.from_json(path) == p
    with pytest.raises(ConfigError):
        PerfParams.from_json(tmp_path / "missing.json")


def test_zero_costs_give_zero():
    r = PerfReport(events={e: 5 for e in EVENTS}, n_blocks=4, rounds_per_block=10, independent_blocks=True)
    out = finalize(r, PerfParams.zero().with_pipeline(True), payload_bytes=64)
    assert out.latency_ns == 0 and out.energy_pj == 0 and out.throughput_Bps == 0


def test_serial_totals_and_throughput():
    p = PerfParams.default()
    r = PerfReport(events={e: i + 1 for i, e in enumerate(EVENTS)})
    out = finalize(r, p, payload_bytes=1000)
    assert out.latency_ns == math.fsum((i + 1) * p.latency_ns[e] for i, e in enumerate(EVENTS))
    assert out.energy_pj == math.fsum((i + 1) * p.energy_pj[e] for i, e in enumerate(EVENTS))
    assert out.throughput_Bps == 1000 / (out.latency_ns * 1e-9)


def brute_force_schedule(lat, n, rounds):
    """Greedy event simulation: issue (round, block) in round-robin order."""
    busy_until = [0.0, 0.0, 0.0]
    ready = [0.0] * n
    end = 0.0
    for k in range(rounds):
        for b in range(n):
            t = ready[b]
            for s in range(3):
                start = max(t, busy_until[s])
                t = start + lat[s]
                busy_until[s] = t
            ready[b] = t
            end = max(end, t)
    return end


@pytest.mark.parametrize("lat", [(1, 1, 1), (3, 1, 2), (0.5, 4, 0.25), (0, 2, 0)])
@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_pipeline_schedule_against_brute_force(lat, n):
    assert pipeline_schedule(lat, n, 10) == brute_force_schedule(lat, n, 10)


def test_pipeline_closed_forms():
    # one block cannot overlap with anything
    assert pipeline_schedule((1, 2, 3), 1, 4) == 4 * 6
    # balanced stages with at least three blocks in flight: fill + steady state
    assert pipeline_schedule((2, 2, 2), 5, 10) == (10 * 5 + 2) * 2


def _aes_report(n, bits=128, mode="ecb", direction="enc", seed=0):
    key = bytes((seed + i) & 0xFF for i in range(bits // 8))
    data = bytes((seed * 7 + i) & 0xFF for i in range(16 * n))
    return run_aes(bits, mode, direction, key, bytes(16), data).report


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17])
def test_pipelined_never_slower(n):
    p = PerfParams.default().with_pipeline(True)
    out = finalize(_aes_report(n), p)
    assert out.latency_pipelined_ns <= out.latency_unpipelined_ns
    if n == 1:
        assert out.latency_pipelined_ns == out.latency_unpipelined_ns
    else:
        assert out.latency_pipelined_ns < out.latency_unpipelined_ns


def test_cbc_encryption_never_pipelines():
    p = PerfParams.default().with_pipeline(True)
    out = finalize(_aes_report(6, mode="cbc"), p)
    assert out.latency_pipelined_ns == out.latency_unpipelined_ns


def test_events_input_independent_and_linear():
    a, b = _aes_report(5, seed=1), _aes_report(5, seed=99)
    assert a.event_vector() == b.event_vector()
    e1, e2, e9 = (_aes_report(n).events for n in (1, 2, 9))
    for ev in EVENTS:
        per_block = e2[ev] - e1[ev]
        assert e9[ev] == e1[ev] + 8 * per_block


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.sampled_from(EVENTS), st.integers(0, 10**6)), st.sampled_from([2.0, 4.0, 0.5]))
def test_linearity_under_cost_scaling(counts, factor):
    r = PerfReport(events={e: counts.get(e, 0) for e in EVENTS}, n_blocks=3,
                   rounds_per_block=10, independent_blocks=True)
    p = PerfParams.default().with_pipeline(True)
    a, b = finalize(r, p), finalize(r, p.scaled(factor))
    assert b.latency_unpipelined_ns == factor * a.latency_unpipelined_ns
    assert b.energy_pj == factor * a.energy_pj
    assert b.latency_pipelined_ns == factor * a.latency_pipelined_ns


def test_report_merge_is_commutative():
    a, b = _aes_report(2), _aes_report(3, seed=4)
    assert (a + b).events == (b + a).events
    assert (a + b).n_blocks == 5


def test_transfer_fixture_rates():
    mib2 = 2 * 1024 * 1024
    p = PerfParams.zero().with_transfer_fixture()
    lat, energy = transfer_overhead(p, mib2)
    assert lat == pytest.approx(744.49e3, rel=1e-12)
    assert energy == pytest.approx(30.39e6, rel=1e-12)
    assert FIXTURE_TRANSFER_LATENCY_NS_PER_BYTE == pytest.approx(0.35500, abs=5e-6)
    assert FIXTURE_TRANSFER_ENERGY_PJ_PER_BYTE == pytest.approx(14.491, abs=5e-4)
    assert transfer_overhead(p, 0) == (0, 0)
    assert transfer_overhead(p, 2000)[0] == 2 * transfer_overhead(p, 1000)[0]
    with pytest.raises(ConfigError):
        transfer_overhead(p, -1)


def test_adpp_and_json():
    out = finalize(_aes_report(2), PerfParams.default(), payload_bytes=32)
    assert out.adpp(2.0, 3.0) == 6.0 * out.latency_ns
    d = json.loads(out.to_json())
    assert {"events", "latency_ns", "energy_pj", "throughput_Bps", "payload_bytes"} <= set(d)
