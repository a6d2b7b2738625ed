"""Websocket bridge between the control loop and the browser console.

The control loop runs in its own thread at the configured tick rate and
owns all vehicle state; the asyncio side only moves immutable JSON
snapshots out (10 Hz) and operator messages in, through thread-safe
queues. Inbound message schema (see docs/ui_protocol.md):

    {"type": "joy", "x": <steer -1..1>, "y": <speed -1..1>}
    {"type": "enable", "held": true|false}
    {"type": "estop"}
    {"type": "reset"}
    {"type": "goal", "x": <m>, "y": <m>, "heading": <rad, optional>}
    {"type": "mode", "mode": "MANUAL"|"AUTONOMOUS"}

Outbound, one frame per push:

    {"type": "status", "frame": {...}, "scan": {...}|null, "tracks": [...]}
"""

from __future__ import annotations

import asyncio
import json
import math
import queue
import threading
import time

from .gateway import JoyInput, TelemetryFrame
from .safety import Mode

UI_PUSH_HZ = 10.0


def status_json(frame: TelemetryFrame, scan, tracks, mode: Mode,
                connected: bool = True) -> str:
    """Serialize one UI push. Infinities are JSON-hostile, so no-return
    rays are sent as null and a missing nearest-track as null."""
    scan_obj = None
    if scan is not None:
        scan_obj = {
            "angle_min": scan.angle_min,
            "angle_increment": scan.angle_increment,
            "ranges": [None if math.isinf(r) else round(float(r), 3)
                       for r in scan.ranges],
        }
    track_objs = [{
        "id": int(t.track_id),
        "x": float(t.position[0]),
        "y": float(t.position[1]),
        "vx": float(t.velocity[0]),
        "vy": float(t.velocity[1]),
    } for t in tracks]
    frame_obj = {
        "t": frame.t, "x": frame.x, "y": frame.y, "theta": frame.theta,
        "v": frame.v, "delta": frame.delta,
        "safety_state": frame.safety_state,
        "safety_reason": frame.safety_reason,
        "motor_power": frame.motor_power,
        "brake_engaged": frame.brake_engaged,
        "steer_feedback_v": frame.steer_feedback_v,
        "motor_units": frame.motor_units,
        "battery_v": frame.battery_v,
        "mode": mode.value,
        "connected": connected,
    }
    return json.dumps({"type": "status", "frame": frame_obj,
                       "scan": scan_obj, "tracks": track_objs})


class UiState:
    """Operator input held between control ticks."""

    def __init__(self):
        self.enable = False
        self.joy_x = 0.0
        self.joy_y = 0.0


def apply_ui_message(harness, ui: UiState, msg: dict) -> None:
    """Apply one parsed UI message to the harness. Unknown types are
    ignored so console/gateway version skew cannot break driving."""
    kind = msg.get("type")
    if kind == "joy":
        ui.joy_x = float(msg.get("x", 0.0))
        ui.joy_y = float(msg.get("y", 0.0))
        harness.gateway.push_joy(JoyInput(axes=(ui.joy_x, ui.joy_y),
                                          buttons=(ui.enable,),
                                          t=harness.t))
    elif kind == "enable":
        ui.enable = bool(msg.get("held"))
        harness.gateway.push_joy(JoyInput(axes=(ui.joy_x, ui.joy_y),
                                          buttons=(ui.enable,),
                                          t=harness.t))
    elif kind == "estop":
        harness.gateway.trigger_estop()
    elif kind == "reset":
        harness.gateway.request_reset(harness.t)
    elif kind == "goal":
        harness.gateway.set_mode(Mode.AUTONOMOUS)
        harness.gateway.set_goal(float(msg["x"]), float(msg["y"]))
    elif kind == "mode":
        try:
            harness.gateway.set_mode(Mode(str(msg.get("mode")).upper()))
        except ValueError:
            pass


class HardwareSession:
    """Minimal harness twin for a real board: no plant, no perception.

    Pose stays at the origin (no localizer on this link), so the console
    shows lamps, speed, steering feedback and battery, but no map trail.
    """

    def __init__(self, gateway, cfg):
        self.gateway = gateway
        self.cfg = cfg
        self.dt = cfg.tick_dt
        self.t = time.monotonic()
        self.latest_scan = None
        self.latest_tracks = []

    def tick(self) -> TelemetryFrame:
        self.t = time.monotonic()
        result = self.gateway.control_tick(self.t)
        tel = self.gateway.last_telemetry
        return TelemetryFrame(
            t=self.t, x=0.0, y=0.0, theta=0.0,
            v=0.0, delta=0.0,
            safety_state=result.decision_state.value,
            safety_reason=result.decision_reason.value,
            motor_power=result.motor_power,
            brake_engaged=tel.brake_engaged if tel else True,
            steer_feedback_v=tel.steer_mv / 1000.0 if tel else 0.0,
            motor_units=result.drive_units,
            battery_v=tel.battery_cv / 100.0 if tel else 0.0)


def run_hardware_loop(gateway, cfg, ui_port: int,
                      log_path: str | None = None) -> None:
    session = HardwareSession(gateway, cfg)
    run_service(session, ui_port)


def run_service(harness, port: int, host: str = "127.0.0.1",
                stop_event: threading.Event | None = None) -> None:
    """Run the control loop (thread) and the websocket server (asyncio)
    until interrupted."""
    import websockets.asyncio.server as ws_server

    inbound: queue.Queue[dict] = queue.Queue()
    latest: dict[str, str] = {}
    stop_event = stop_event or threading.Event()
    ui = UiState()

    def control_loop():
        period = harness.dt
        next_tick = time.monotonic()
        while not stop_event.is_set():
            while True:
                try:
                    msg = inbound.get_nowait()
                except queue.Empty:
                    break
                try:
                    apply_ui_message(harness, ui, msg)
                except Exception:
                    pass  # malformed operator input must never kill the loop
            frame = harness.tick()
            latest["status"] = status_json(frame, harness.latest_scan,
                                           harness.latest_tracks,
                                           harness.gateway.mode)
            next_tick += period
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_tick = time.monotonic()

    async def handler(connection):
        async def push():
            while True:
                if "status" in latest:
                    await connection.send(latest["status"])
                await asyncio.sleep(1.0 / UI_PUSH_HZ)

        push_task = asyncio.create_task(push())
        try:
            async for raw in connection:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if isinstance(msg, dict):
                    inbound.put(msg)
        finally:
            push_task.cancel()

    async def main():
        thread = threading.Thread(target=control_loop, daemon=True)
        thread.start()
        async with ws_server.serve(handler, host, port):
            while not stop_event.is_set():
                await asyncio.sleep(0.2)

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    finally:
        stop_event.set()
