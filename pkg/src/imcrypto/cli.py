"""Command-line front end.

    imcrypto asm --in prog.s --out prog.imcp
    imcrypto run --in prog.imcp [--cem image.hex] [--out image.hex]
    imcrypto encrypt --variant 128 --mode cbc --key HEX --iv HEX --in pt --out ct
    imcrypto decrypt ...
    imcrypto sha256 --in file
    imcrypto bench --blocks 65536 --transfer-fixture

Exit codes: 0 ok, 1 usage or I/O error, 2 fabric output disagrees with the
reference implementation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import isa
from .cem import DEFAULT_CAPACITY
from .controller import Machine, Program
from .crypto_ref import Direction, Mode, Variant, key_expand, mode_ref, sha256_ref
from .errors import ImcryptoError
from .perf import PerfParams, finalize, transfer_overhead
from .programs import format_trace, run_aes_sharded, run_sha256

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2
STATS_SCHEMA = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _hex(text: str, what: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise UsageError(f"{what} is not valid hex: {text!r}") from None


def _read(path) -> bytes:
    if path in (None, "-"):
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write(path, data: bytes) -> None:
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _params(args) -> PerfParams:
    params = PerfParams.from_json(args.perf) if args.perf else PerfParams.default()
    if getattr(args, "transfer_fixture", False):
        params = params.with_transfer_fixture()
    if args.pipeline is not None:
        params = params.with_pipeline(args.pipeline == "on")
    return params


def _write_stats(path, stats: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")


def _emit_trace(args, trace) -> None:
    if args.trace is None:
        return
    text = format_trace(trace)
    if args.trace == "-":
        sys.stderr.write(text)
    else:
        Path(args.trace).write_text(text)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_asm(args) -> int:
    if not args.input or not args.output:
        raise UsageError("asm needs --in and --out")
    source = Path(args.input).read_text()
    words = isa.assemble(source)
    _write(args.output, isa.to_binary(words))
    return EXIT_OK


def _load_program(path) -> list[int]:
    blob = _read(path)
    if blob[:4] == isa.MAGIC:
        return isa.from_binary(blob)
    return isa.assemble(blob.decode())


def cmd_run(args) -> int:
    if not args.input:
        raise UsageError("run needs --in PROGRAM")
    words = _load_program(args.input)
    machine = Machine(DEFAULT_CAPACITY)
    if args.cem:
        machine.cem.load_hex(Path(args.cem).read_text())
    report = machine.run(Program(words))
    report = finalize(report, _params(args), payload_bytes=0)
    if args.output:
        _write(args.output, machine.cem.dump_hex().encode())
    _write_stats(args.stats, {
        "schema": STATS_SCHEMA,
        "command": "run",
        "instructions": len(words),
        "registers": list(machine.regs),
        "perf": report.to_dict(),
    })
    if not args.output and not args.stats:
        print(report.to_json())
    return EXIT_OK


def _crypto_config(args, direction):
    if args.key is None:
        raise UsageError("--key is required")
    variant = Variant(args.variant)
    mode = Mode(args.mode)
    key = _hex(args.key, "--key")
    if len(key) != variant.key_bytes:
        raise UsageError(f"AES-{variant.value} needs a {variant.key_bytes}-byte key, got {len(key)}")
    iv = None
    if mode is not Mode.ECB:
        if args.iv is None:
            raise UsageError(f"--iv is required for {mode.value}")
        iv = _hex(args.iv, "--iv")
        if len(iv) != 16:
            raise UsageError(f"--iv must be 16 bytes, got {len(iv)}")
    return variant, mode, Direction(direction), key, iv


def _aes(args, variant, mode, direction, key, iv, data):
    result = run_aes_sharded(variant, mode, direction, key, iv, data, jobs=args.jobs)
    oracle = "skipped"
    if not args.no_verify:
        expected = mode_ref(mode, key_expand(key, variant), iv, data, direction)
        oracle = "match" if expected == result.output else "mismatch"
    return result, oracle


def _crypt(args, direction) -> int:
    variant, mode, direction, key, iv = _crypto_config(args, direction)
    data = _read(args.input)
    result, oracle = _aes(args, variant, mode, direction, key, iv, data)
    report = finalize(result.report, _params(args), payload_bytes=len(data))
    _emit_trace(args, result.trace)
    _write_stats(args.stats, {
        "schema": STATS_SCHEMA,
        "command": "encrypt" if direction is Direction.ENC else "decrypt",
        "variant": variant.value,
        "mode": mode.value,
        "payload_bytes": len(data),
        "output_sha256": hashlib.sha256(result.output).hexdigest(),
        "oracle": oracle,
        "perf": report.to_dict(),
    })
    if oracle == "mismatch":
        print("error: fabric output differs from the reference implementation", file=sys.stderr)
        return EXIT_MISMATCH
    _write(args.output, result.output)
    return EXIT_OK


def cmd_encrypt(args) -> int:
    return _crypt(args, Direction.ENC)


def cmd_decrypt(args) -> int:
    return _crypt(args, Direction.DEC)


def cmd_sha256(args) -> int:
    data = _read(args.input)
    result = run_sha256(data)
    oracle = "skipped"
    if not args.no_verify:
        oracle = "match" if sha256_ref(data) == result.output else "mismatch"
    report = finalize(result.report, _params(args), payload_bytes=len(data))
    _write_stats(args.stats, {
        "schema": STATS_SCHEMA,
        "command": "sha256",
        "payload_bytes": len(data),
        "digest": result.output.hex(),
        "oracle": oracle,
        "perf": report.to_dict(),
    })
    if oracle == "mismatch":
        print("error: fabric digest differs from the reference implementation", file=sys.stderr)
        return EXIT_MISMATCH
    print(result.output.hex())
    return EXIT_OK


def bench_payload(n_blocks: int) -> bytes:
    return bytes(i & 0xFF for i in range(16 * n_blocks))


def cmd_bench(args) -> int:
    if args.blocks < 1:
        raise UsageError("--blocks must be >= 1")
    variant, mode = Variant(args.variant), Mode(args.mode)
    key = _hex(args.key, "--key") if args.key else bytes(variant.key_bytes)
    iv = _hex(args.iv, "--iv") if args.iv else bytes(16)
    if len(key) != variant.key_bytes or len(iv) != 16:
        raise UsageError("bad --key/--iv length")
    direction = Direction(args.direction)
    data = bench_payload(args.blocks)
    result, oracle = _aes(args, variant, mode, direction, key, iv, data)
    params = _params(args)
    report = finalize(result.report, params, payload_bytes=len(data))
    out = {
        "schema": STATS_SCHEMA,
        "command": "bench",
        "variant": variant.value,
        "mode": mode.value,
        "direction": direction.value,
        "oracle": oracle,
        **report.to_dict(),
    }
    if params.has_transfer:
        moved = 2 * len(data)  # payload in, result out
        t_lat, t_energy = transfer_overhead(params, moved)
        out["transfer"] = {"bytes_moved": moved, "latency_ns": t_lat, "energy_pj": t_energy}
        out["with_transfer"] = {
            "latency_ns": report.latency_ns + t_lat,
            "energy_pj": report.energy_pj + t_energy,
        }
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    _write_stats(args.stats, out)
    return EXIT_MISMATCH if oracle == "mismatch" else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="imcrypto", description="In-memory AES/SHA-256 fabric simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, crypto=False):
        sp.add_argument("--in", dest="input", metavar="PATH")
        sp.add_argument("--out", dest="output", metavar="PATH")
        sp.add_argument("--perf", metavar="PATH.json", help="perf parameter file")
        sp.add_argument("--stats", metavar="PATH.json", help="write run statistics")
        sp.add_argument("--pipeline", choices=("on", "off"))
        if crypto:
            sp.add_argument("--variant", type=int, choices=(128, 192, 256), default=128)
            sp.add_argument("--mode", choices=("ecb", "cbc", "ctr"), default="ecb")
            sp.add_argument("--key", metavar="HEX")
            sp.add_argument("--iv", metavar="HEX")
            sp.add_argument("--no-verify", action="store_true", help="skip the reference check")
            sp.add_argument("--jobs", type=int, default=1, help="worker threads for ECB/CTR")
            sp.add_argument("--trace", nargs="?", const="-", metavar="PATH",
                            help="dump per-round states (stderr if no path)")

    common(sub.add_parser("asm", help="assemble to an IMCP binary"))
    sp = sub.add_parser("run", help="run a program on a fresh fabric")
    common(sp)
    sp.add_argument("--cem", metavar="PATH.hex", help="initial CEM image")
    common(sub.add_parser("encrypt", help="encrypt a file on the fabric"), crypto=True)
    common(sub.add_parser("decrypt", help="decrypt a file on the fabric"), crypto=True)
    sp = sub.add_parser("sha256", help="hash a file on the fabric")
    common(sp)
    sp.add_argument("--no-verify", action="store_true")
    sp = sub.add_parser("bench", help="time AES over N blocks")
    common(sp, crypto=True)
    sp.add_argument("--blocks", type=int, default=64)
    sp.add_argument("--direction", choices=("enc", "dec"), default="enc")
    sp.add_argument("--transfer-fixture", action="store_true",
                    help="use the 1 MiB in/out accelerator transfer costs")
    return p


COMMANDS = {
    "asm": cmd_asm,
    "run": cmd_run,
    "encrypt": cmd_encrypt,
    "decrypt": cmd_decrypt,
    "sha256": cmd_sha256,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except isa.AsmSyntaxError as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
    except (UsageError, ImcryptoError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
