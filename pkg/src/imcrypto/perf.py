"""Cycle/energy accounting for fabric runs.

Every primitive the hardware blocks perform is an *event* with a configurable
latency (ns) and energy (pJ). Unpipelined latency is the plain sum of
``count * unit`` over all events. With pipelining enabled, the per-round work
of independent blocks overlaps across three stages (CEM, shifter, LUT); the
schedule is computed exactly by a list-scheduling recurrence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError

EVENTS = (
    "cem_read_word",
    "cem_write_word",
    "cem_word_op",
    "racam_read",
    "racam_search",
    "ram_read",
    "xor_tree_pass",
    "shifter_pass",
    "encoder_pass",
)

STAGES = ("cem", "shifter", "lut")
STAGE_OF = {
    "cem_read_word": "cem",
    "cem_write_word": "cem",
    "cem_word_op": "cem",
    "shifter_pass": "shifter",
    "racam_read": "lut",
    "racam_search": "lut",
    "ram_read": "lut",
    "xor_tree_pass": "lut",
    "encoder_pass": "lut",
}

# 1 MiB read into an accelerator plus 1 MiB written back costs 744.49 us and
# 30.39 uJ; spread evenly over the 2 MiB moved.
FIXTURE_BYTES = 2 * 1024 * 1024
FIXTURE_LATENCY_NS = 744.49e3
FIXTURE_ENERGY_PJ = 30.39e6
FIXTURE_TRANSFER_LATENCY_NS_PER_BYTE = FIXTURE_LATENCY_NS / FIXTURE_BYTES
FIXTURE_TRANSFER_ENERGY_PJ_PER_BYTE = FIXTURE_ENERGY_PJ / FIXTURE_BYTES


@dataclass(frozen=True)
class PerfParams:
    latency_ns: dict
    energy_pj: dict
    transfer_per_byte_latency: float = 0.0
    transfer_per_byte_energy: float = 0.0
    pipeline_enabled: bool = False

    def __post_init__(self):
        for table in (self.latency_ns, self.energy_pj):
            unknown = set(table) - set(EVENTS)
            if unknown:
                raise ConfigError(f"unknown events in params: {sorted(unknown)}")
            missing = set(EVENTS) - set(table)
            if missing:
                raise ConfigError(f"params missing events: {sorted(missing)}")
        values = [*self.latency_ns.values(), *self.energy_pj.values(),
                  self.transfer_per_byte_latency, self.transfer_per_byte_energy]
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v < 0:
                raise ConfigError(f"cost parameters must be finite and >= 0, got {v!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "PerfParams":
        try:
            events = d["events"]
            return cls(
                latency_ns={k: v["latency_ns"] for k, v in events.items()},
                energy_pj={k: v["energy_pj"] for k, v in events.items()},
                transfer_per_byte_latency=d.get("transfer_per_byte_latency", 0.0),
                transfer_per_byte_energy=d.get("transfer_per_byte_energy", 0.0),
                pipeline_enabled=bool(d.get("pipeline_enabled", False)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"malformed perf params: {exc!r}") from None

    @classmethod
    def from_json(cls, path) -> "PerfParams":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read perf params {path}: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def default(cls) -> "PerfParams":
        text = resources.files("imcrypto").joinpath("data/default_perf.json").read_text()
        return cls.from_dict(json.loads(text))

    @classmethod
    def zero(cls) -> "PerfParams":
        return cls({e: 0.0 for e in EVENTS}, {e: 0.0 for e in EVENTS})

    def to_dict(self) -> dict:
        return {
            "events": {
                e: {"latency_ns": self.latency_ns[e], "energy_pj": self.energy_pj[e]}
                for e in EVENTS
            },
            "transfer_per_byte_latency": self.transfer_per_byte_latency,
            "transfer_per_byte_energy": self.transfer_per_byte_energy,
            "pipeline_enabled": self.pipeline_enabled,
        }

    def with_transfer_fixture(self) -> "PerfParams":
        return replace(
            self,
            transfer_per_byte_latency=FIXTURE_TRANSFER_LATENCY_NS_PER_BYTE,
            transfer_per_byte_energy=FIXTURE_TRANSFER_ENERGY_PJ_PER_BYTE,
        )

    def with_pipeline(self, enabled: bool) -> "PerfParams":
        return replace(self, pipeline_enabled=bool(enabled))

    def scaled(self, factor: float) -> "PerfParams":
        return replace(
            self,
            latency_ns={e: v * factor for e, v in self.latency_ns.items()},
            energy_pj={e: v * factor for e, v in self.energy_pj.items()},
            transfer_per_byte_latency=self.transfer_per_byte_latency * factor,
            transfer_per_byte_energy=self.transfer_per_byte_energy * factor,
        )

    @property
    def has_transfer(self) -> bool:
        return self.transfer_per_byte_latency > 0 or self.transfer_per_byte_energy > 0


def _zero_events():
    return dict.fromkeys(EVENTS, 0)


@dataclass
class PerfReport:
    events: dict = field(default_factory=_zero_events)
    n_blocks: int = 0
    rounds_per_block: int = 0
    independent_blocks: bool = False
    payload_bytes: int = 0
    latency_ns: float = 0.0
    latency_unpipelined_ns: float = 0.0
    latency_pipelined_ns: float = 0.0
    energy_pj: float = 0.0
    throughput_Bps: float = 0.0
    pipelined: bool = False

    def record(self, event: str, count: int = 1) -> None:
        if event not in self.events:
            raise ConfigError(f"unknown perf event {event!r}")
        if count < 0:
            raise ConfigError("event count must be >= 0")
        self.events[event] += count

    def __add__(self, other: "PerfReport") -> "PerfReport":
        if not isinstance(other, PerfReport):
            return NotImplemented
        if self.n_blocks and other.n_blocks and self.rounds_per_block != other.rounds_per_block:
            raise ConfigError("cannot merge reports with different round counts")
        return PerfReport(
            events={e: self.events[e] + other.events[e] for e in EVENTS},
            n_blocks=self.n_blocks + other.n_blocks,
            rounds_per_block=self.rounds_per_block or other.rounds_per_block,
            independent_blocks=(self.independent_blocks or not self.n_blocks)
            and (other.independent_blocks or not other.n_blocks),
            payload_bytes=self.payload_bytes + other.payload_bytes,
        )

    def event_vector(self) -> tuple:
        return tuple(self.events[e] for e in EVENTS)

    def adpp(self, area: float, power: float) -> float:
        """Area x delay x power with user-supplied area/power scalars."""
        return area * self.latency_ns * power

    def throughput_per_area(self, area: float) -> float:
        return self.throughput_Bps / area

    def to_dict(self) -> dict:
        return {
            "events": dict(self.events),
            "latency_ns": self.latency_ns,
            "latency_unpipelined_ns": self.latency_unpipelined_ns,
            "latency_pipelined_ns": self.latency_pipelined_ns,
            "energy_pj": self.energy_pj,
            "throughput_Bps": self.throughput_Bps,
            "payload_bytes": self.payload_bytes,
            "blocks": self.n_blocks,
            "pipelined": self.pipelined,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def record(report: PerfReport, event: str, count: int = 1) -> None:
    report.record(event, count)


def stage_totals(report: PerfReport, params: PerfParams) -> dict:
    totals = dict.fromkeys(STAGES, 0.0)
    for e in EVENTS:
        totals[STAGE_OF[e]] += report.events[e] * params.latency_ns[e]
    return totals


def pipeline_schedule(stage_latency, n_blocks: int, rounds: int) -> float:
    """Makespan of ``n_blocks`` independent blocks of ``rounds`` dependent rounds.

    Each round visits the stages in order; a stage serves one round at a time
    and rounds are issued round-robin across blocks. ``stage_latency`` holds
    the per-round time of each stage.
    """
    l0, l1, l2 = stage_latency
    f0 = f1 = f2 = 0.0
    done = [0.0] * n_blocks
    for _ in range(rounds):
        for b in range(n_blocks):
            f0 = (f0 if f0 > done[b] else done[b]) + l0
            f1 = (f1 if f1 > f0 else f0) + l1
            f2 = (f2 if f2 > f1 else f1) + l2
            done[b] = f2
    return f2


def finalize(report: PerfReport, params: PerfParams, payload_bytes: int | None = None) -> PerfReport:
    """Return a copy of ``report`` with latency, energy and throughput filled in."""
    if payload_bytes is None:
        payload_bytes = report.payload_bytes
    serial = math.fsum(report.events[e] * params.latency_ns[e] for e in EVENTS)
    energy = math.fsum(report.events[e] * params.energy_pj[e] for e in EVENTS)
    pipelined = serial
    n, r = report.n_blocks, report.rounds_per_block
    if report.independent_blocks and n > 1 and r > 0:
        totals = stage_totals(report, params)
        per_round = [totals[s] / (n * r) for s in STAGES]
        # the serial schedule is always available to the controller
        pipelined = min(serial, pipeline_schedule(per_round, n, r))
    latency = pipelined if params.pipeline_enabled else serial
    throughput = payload_bytes / (latency * 1e-9) if latency > 0 else 0.0
    return replace(
        report,
        events=dict(report.events),
        payload_bytes=payload_bytes,
        latency_ns=latency,
        latency_unpipelined_ns=serial,
        latency_pipelined_ns=pipelined,
        energy_pj=energy,
        throughput_Bps=throughput,
        pipelined=params.pipeline_enabled,
    )


def transfer_overhead(params: PerfParams, bytes_moved: int) -> tuple[float, float]:
    """``(latency_ns, energy_pj)`` for moving ``bytes_moved`` to/from memory."""
    if bytes_moved < 0:
        raise ConfigError("bytes_moved must be >= 0")
    return (bytes_moved * params.transfer_per_byte_latency,
            bytes_moved * params.transfer_per_byte_energy)
