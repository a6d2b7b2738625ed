"""Command-line entry points: the gateway service and the calibration tool."""

from __future__ import annotations

import argparse
import sys

from .calibration import fit_linear, read_samples_csv, save_map, load_map
from .config import GatewayConfig, load_config
from .gateway import Gateway
from .link import UdpLink
from .safety import Mode
from .scenario import (Scenario, SimHarness, default_calibration,
                       parse_scenario, run_scenario)


def gateway_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gateway",
        description="Drive-by-wire gateway: teleop/autopilot control loop "
                    "against the simulated or real vehicle.")
    parser.add_argument("--mode", choices=("sim", "hardware"), default="sim")
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--scenario", help="scenario file (sim mode); runs "
                                           "headless to completion")
    parser.add_argument("--log", help="telemetry CSV output path")
    parser.add_argument("--ui-port", type=int, default=8080)
    parser.add_argument("--udp-cmd", type=int, default=None,
                        help="command port toward the board (hardware mode)")
    parser.add_argument("--udp-tel", type=int, default=None,
                        help="local telemetry port (hardware mode)")
    parser.add_argument("--board-host", default="127.0.0.1",
                        help="board address (hardware mode)")
    args = parser.parse_args(argv)

    cfg = load_config(args.config) if args.config else GatewayConfig()
    calib = load_map(cfg.calib_file) if cfg.calib_file \
        else default_calibration(cfg)

    if args.mode == "sim" and args.scenario:
        scenario = parse_scenario(args.scenario)
        result = run_scenario(scenario, cfg, log_path=args.log, calib=calib)
        print(result.summary())
        if args.log:
            print(f"telemetry log: {args.log}")
        return 0

    if args.mode == "sim":
        from .service import run_service
        harness = SimHarness(cfg, Scenario(name="interactive",
                                           duration_s=1e9), calib)
        print(f"simulated vehicle up; console on ws://127.0.0.1:{args.ui_port}")
        run_service(harness, args.ui_port)
        return 0

    # hardware: real UDP both ways; pose is unavailable without a localizer,
    # so only teleop (no goals) is offered
    link = UdpLink(local_port=args.udp_tel or cfg.udp_telemetry_port,
                   remote_host=args.board_host,
                   remote_port=args.udp_cmd or cfg.udp_cmd_port)
    gateway = Gateway(cfg, link, calib, mode=Mode.MANUAL)
    from .service import run_hardware_loop
    run_hardware_loop(gateway, cfg, args.ui_port, args.log)
    return 0


def calibrate_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="calibrate",
        description="Steering calibration utilities.")
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", help="least-squares fit of angle -> voltage")
    fit.add_argument("--in", dest="input", required=True,
                     help="CSV with columns delta_rad,voltage_v")
    fit.add_argument("--out", dest="output", required=True,
                     help="key=value output file")
    args = parser.parse_args(argv)

    if args.command == "fit":
        samples = read_samples_csv(args.input)
        cal = fit_linear(samples)
        save_map(cal, args.output)
        print(f"fit {len(samples)} samples: slope={cal.slope:.6g} V/rad, "
              f"intercept={cal.intercept:.6g} V, rms={cal.rms_residual:.6g} V, "
              f"stops [{cal.v_min:.6g}, {cal.v_max:.6g}] V")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(gateway_main())
