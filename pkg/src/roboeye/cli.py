"""Command-line entry point: batch experiment runs, codec tooling, and the
live serve mode."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import protocol, sim
from .config import AppConfig, ConfigError, load_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_OUTPUT = 3

EXPERIMENTS = ("saccade", "pursuit", "vergence", "vor")


def build_scenario(experiment: str, app: AppConfig, seed: int,
                   vor_disabled: bool) -> sim.Scenario:
    params = dict(app.scenario_params.get(experiment, {}))
    noise = app.noise_px
    if experiment == "saccade":
        return sim.scenario_saccade(
            offset_frac=params["offset_frac"], range_m=params["range_m"],
            duration_s=params["duration_s"], noise_std_px=noise, seed=seed,
            cam=app.sim.camera)
    if experiment == "pursuit":
        return sim.scenario_pursuit(
            freq_hz=params["freq_hz"], amp_deg=params["amp_deg"],
            range_m=params["range_m"], duration_s=params["duration_s"],
            noise_std_px=noise, seed=seed, geom=app.sim.geometry)
    if experiment == "vergence":
        return sim.scenario_vergence(
            z_start_m=params["z_start_m"], z_end_m=params["z_end_m"],
            duration_s=params["duration_s"], noise_std_px=noise, seed=seed)
    if experiment == "vor":
        return sim.scenario_vor(
            freq_hz=params["freq_hz"], amp_deg=params["amp_deg"],
            range_m=params["range_m"], duration_s=params["duration_s"],
            noise_std_px=noise, seed=seed, vor_disabled=vor_disabled)
    raise ValueError(f"unknown experiment {experiment!r}")


def cmd_run(args: argparse.Namespace) -> int:
    if args.experiment not in EXPERIMENTS:
        print(f"error: unknown experiment {args.experiment!r}; "
              f"choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        app = load_config(args.config)
        scenario = build_scenario(args.experiment, app, args.seed,
                                  args.vor_disabled)
    except (ConfigError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    engine = sim.Engine(scenario, app.sim, servo_ids=app.servo_ids)
    trace = engine.run()
    m = sim.metrics(trace)

    stem = args.experiment + ("_novor" if args.vor_disabled else "")
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}_trace.csv"
        csv_path.write_text(trace.to_csv())
        metrics_path = out_dir / f"{stem}_metrics.json"
        payload = dataclasses.asdict(m)
        payload = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                   for k, v in payload.items()}
        metrics_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        if args.plot:
            from .plotting import plot_trace
            plot_trace(trace, f"{args.experiment} experiment",
                       out_dir / f"{stem}_plot.svg",
                       image_height_px=app.sim.camera.height_px)
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return EXIT_OUTPUT
    print(f"wrote {csv_path} and {metrics_path}")
    return EXIT_OK


def cmd_codec(args: argparse.Namespace) -> int:
    if args.codec_cmd == "encode":
        try:
            if args.instr == "ping":
                pkt = protocol.InstructionPacket(args.id, protocol.INSTR_PING)
            elif args.instr == "write":
                if args.addr is None or args.data is None:
                    raise ValueError("write requires --addr and --data")
                params = (args.addr.to_bytes(2, "little")
                          + bytes.fromhex(args.data))
                pkt = protocol.InstructionPacket(args.id, protocol.INSTR_WRITE,
                                                 params)
            else:  # read
                if args.addr is None:
                    raise ValueError("read requires --addr")
                params = (args.addr.to_bytes(2, "little")
                          + args.count.to_bytes(2, "little"))
                pkt = protocol.InstructionPacket(args.id, protocol.INSTR_READ,
                                                 params)
            print(protocol.encode_packet(pkt).hex())
            return EXIT_OK
        except (ValueError, protocol.ProtocolError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
    # decode
    try:
        data = bytes.fromhex("".join(args.hex.split()))
        pkt = protocol.decode_packet(data)
    except (ValueError, protocol.ProtocolError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(pkt, protocol.StatusPacket):
        print(f"status packet  id={pkt.id}  error=0x{pkt.error:02x}  "
              f"params={pkt.params.hex() or '(none)'}")
    else:
        names = {protocol.INSTR_PING: "ping", protocol.INSTR_READ: "read",
                 protocol.INSTR_WRITE: "write",
                 protocol.INSTR_SYNC_WRITE: "sync_write"}
        name = names.get(pkt.instruction, f"0x{pkt.instruction:02x}")
        print(f"instruction packet  id={pkt.id}  instr={name}  "
              f"params={pkt.params.hex() or '(none)'}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        app = load_config(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    from .server import serve
    serve(app, port=args.port if args.port is not None else app.serve_port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roboeye",
        description="Binocular robotic-eye simulator and servo protocol tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write outputs")
    p_run.add_argument("experiment", help="saccade | pursuit | vergence | vor")
    p_run.add_argument("--config", default=None, help="TOML config overriding defaults")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--vor-disabled", action="store_true",
                       help="baseline run without VOR feedforward")
    p_run.add_argument("--plot", action="store_true",
                       help="also write an SVG figure of u(t), v(t) per eye")
    p_run.set_defaults(func=cmd_run)

    p_codec = sub.add_parser("codec", help="protocol frame tools")
    codec_sub = p_codec.add_subparsers(dest="codec_cmd", required=True)
    p_enc = codec_sub.add_parser("encode")
    p_enc.add_argument("--id", type=int, required=True)
    p_enc.add_argument("--instr", choices=("ping", "write", "read"), required=True)
    p_enc.add_argument("--addr", type=int, default=None)
    p_enc.add_argument("--data", default=None, help="hex payload for write")
    p_enc.add_argument("--count", type=int, default=2, help="bytes to read")
    p_enc.set_defaults(func=cmd_codec)
    p_dec = codec_sub.add_parser("decode")
    p_dec.add_argument("hex", help="frame bytes as hex")
    p_dec.set_defaults(func=cmd_codec)

    p_serve = sub.add_parser("serve", help="live sim over WebSocket")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--config", default=None)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
