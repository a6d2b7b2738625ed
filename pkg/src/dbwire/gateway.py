"""The runnable control service.

Maps operator input (or the waypoint autopilot) to wire commands at the
control rate, gated tick-by-tick by the safety supervisor:

    twist -> Ackermann -> min-radius clamp -> SteerCmd target voltage
                                           -> DriveCmd units (0 unless the
                                              supervisor grants motor power)

A heartbeat rides on every tick; telemetry from the board feeds the
supervisor's inputs (DMH state, battery, fault latch) and its absence
beyond the timeout counts as link loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from . import wire
from .calibration import CalibrationMap
from .config import GatewayConfig
from .kinematics import (AckermannCommand, VelocityCommand, enforce_min_radius,
                         twist_to_ackermann)
from .safety import Mode, Reason, SafetyInputs, SafetyState, SafetySupervisor, UnsafeReset
from .steering import steer_command_to_target


class BadAxisIndex(IndexError):
    pass


@dataclass(frozen=True, slots=True)
class TeleopConfig:
    enable_button: int = 0
    speed_axis: int = 1
    steer_axis: int = 0
    scale_x: float = 0.2  # m/s at full deflection; 400 driver units
    scale_z: float = 1.0  # rad/s at full deflection


@dataclass(frozen=True, slots=True)
class JoyInput:
    axes: tuple[float, ...]
    buttons: tuple[bool, ...]
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "axes",
                           tuple(max(-1.0, min(1.0, a)) for a in self.axes))


SUPPRESSED = None  # joy_to_twist result while the enable button is up


def joy_to_twist(joy: JoyInput, cfg: TeleopConfig) -> VelocityCommand | None:
    """Stick to twist; None while the enable button is not held."""
    for idx in (cfg.speed_axis, cfg.steer_axis):
        if idx >= len(joy.axes):
            raise BadAxisIndex(f"axis {idx} out of range ({len(joy.axes)} axes)")
    if cfg.enable_button >= len(joy.buttons) or not joy.buttons[cfg.enable_button]:
        return SUPPRESSED
    return VelocityCommand(vx=joy.axes[cfg.speed_axis] * cfg.scale_x,
                           wz=joy.axes[cfg.steer_axis] * cfg.scale_z)


def speed_to_units(v: float, units_to_mps: float = 0.0005,
                   max_units: int = wire.MAX_DRIVE_UNITS) -> int:
    """Speed to signed driver units, hard-clamped at the damage limit."""
    units = int(round(v / units_to_mps))
    return max(-max_units, min(max_units, units))


class TeleopSource:
    """Holds the latest gamepad state and implements release semantics:
    one explicit zero command on enable release, so the board is never
    left holding a stale setpoint."""

    def __init__(self, cfg: TeleopConfig):
        self.cfg = cfg
        self._latest: JoyInput | None = None
        self._was_enabled = False

    def push(self, joy: JoyInput) -> None:
        self._latest = joy

    @property
    def enable_held(self) -> bool:
        joy = self._latest
        return bool(joy and self.cfg.enable_button < len(joy.buttons)
                    and joy.buttons[self.cfg.enable_button])

    def poll(self) -> tuple[VelocityCommand | None, bool]:
        """(twist or None-if-suppressed, released-this-poll)."""
        if self._latest is None:
            return SUPPRESSED, False
        twist = joy_to_twist(self._latest, self.cfg)
        released = self._was_enabled and twist is SUPPRESSED
        self._was_enabled = twist is not SUPPRESSED
        return twist, released


@dataclass(frozen=True, slots=True)
class AutopilotParams:
    lookahead_m: float = 1.5
    cruise_mps: float = 0.15
    goal_tol_m: float = 0.35


def autopilot_tick(pose: tuple[float, float, float],
                   goal: tuple[float, float],
                   params: AutopilotParams,
                   path_start: tuple[float, float] | None = None
                   ) -> tuple[VelocityCommand, bool]:
    """Pure pursuit along the straight path to the goal.

    Chases a point `lookahead` ahead of the vehicle's projection onto the
    path (capped at the goal) with curvature 2*sin(alpha)/lookahead.
    Returns (command, done); done once inside the goal tolerance.
    """
    x, y, theta = pose
    gx, gy = goal
    dist = math.hypot(gx - x, gy - y)
    if dist <= params.goal_tol_m:
        return VelocityCommand(0.0, 0.0), True
    sx, sy = path_start if path_start is not None else (x, y)
    seg_len = math.hypot(gx - sx, gy - sy)
    if seg_len < 1e-9:
        tx, ty = gx, gy
    else:
        ux, uy = (gx - sx) / seg_len, (gy - sy) / seg_len
        along = (x - sx) * ux + (y - sy) * uy
        chase = min(max(along, 0.0) + params.lookahead_m, seg_len)
        tx, ty = sx + ux * chase, sy + uy * chase
    alpha = _wrap_angle(math.atan2(ty - y, tx - x) - theta)
    curvature = 2.0 * math.sin(alpha) / params.lookahead_m
    return VelocityCommand(params.cruise_mps,
                           params.cruise_mps * curvature), False


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


class Autopilot:
    def __init__(self, params: AutopilotParams):
        self.params = params
        self.goal: tuple[float, float] | None = None
        self.path_start: tuple[float, float] | None = None
        self.done = False

    def set_goal(self, pose, goal_xy) -> None:
        self.goal = (float(goal_xy[0]), float(goal_xy[1]))
        self.path_start = (pose[0], pose[1])
        self.done = False

    def clear(self) -> None:
        self.goal = None
        self.done = False

    def tick(self, pose) -> VelocityCommand:
        if self.goal is None or self.done:
            return VelocityCommand(0.0, 0.0)
        cmd, done = autopilot_tick(pose, self.goal, self.params, self.path_start)
        if done:
            self.done = True
        return cmd


# -- telemetry log -------------------------------------------------------------

TELEMETRY_COLUMNS = (
    "t", "x", "y", "theta", "v", "delta", "safety_state", "safety_reason",
    "motor_power", "brake_engaged", "steer_feedback_v", "motor_units",
    "battery_v", "n_tracks", "nearest_track_m")


@dataclass(frozen=True, slots=True)
class TelemetryFrame:
    t: float
    x: float
    y: float
    theta: float
    v: float
    delta: float
    safety_state: str
    safety_reason: str
    motor_power: bool
    brake_engaged: bool
    steer_feedback_v: float
    motor_units: int
    battery_v: float
    n_tracks: int = 0
    nearest_track_m: float = math.inf

    def csv_row(self) -> str:
        vals = [repr(float(getattr(self, c))) if isinstance(getattr(self, c), float)
                else str(getattr(self, c)) for c in TELEMETRY_COLUMNS]
        return ",".join(vals)


def write_telemetry_csv(path: str | Path, frames) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(TELEMETRY_COLUMNS) + "\n")
        for frame in frames:
            fh.write(frame.csv_row() + "\n")


def read_telemetry_csv(path: str | Path) -> list[TelemetryFrame]:
    frames = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TELEMETRY_COLUMNS:
            raise ValueError(f"unexpected telemetry header {header}")
        for line in fh:
            parts = line.strip().split(",")
            row = dict(zip(TELEMETRY_COLUMNS, parts))
            frames.append(TelemetryFrame(
                t=float(row["t"]), x=float(row["x"]), y=float(row["y"]),
                theta=float(row["theta"]), v=float(row["v"]),
                delta=float(row["delta"]), safety_state=row["safety_state"],
                safety_reason=row["safety_reason"],
                motor_power=row["motor_power"] == "True",
                brake_engaged=row["brake_engaged"] == "True",
                steer_feedback_v=float(row["steer_feedback_v"]),
                motor_units=int(row["motor_units"]),
                battery_v=float(row["battery_v"]),
                n_tracks=int(row["n_tracks"]),
                nearest_track_m=float(row["nearest_track_m"])))
    return frames


# -- the gateway ---------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TickResult:
    twist: VelocityCommand
    suppressed: bool
    ackermann: AckermannCommand
    steer_target_v: float
    drive_units: int
    decision_state: SafetyState
    decision_reason: Reason
    motor_power: bool
    brake_released: bool
    messages: tuple[wire.WireMessage, ...]


class Gateway:
    """Owns the periodic control tick. Single-threaded by design: feed it
    events (joy, estop, goal) between ticks, from queues if concurrent."""

    def __init__(self, cfg: GatewayConfig, link, calib: CalibrationMap,
                 mode: Mode = Mode.MANUAL, pose_provider=None):
        self.cfg = cfg
        self.link = link
        self.calib = calib
        self.mode = mode
        self.pose_provider = pose_provider
        self.geom = cfg.geometry()
        self.supervisor = SafetySupervisor(cfg.low_battery_v)
        self.liveness = wire.LivenessTracker(timeout=cfg.heartbeat_timeout_s)
        self.teleop = TeleopSource(TeleopConfig(
            cfg.enable_button, cfg.speed_axis, cfg.steer_axis,
            cfg.scale_x, cfg.scale_z))
        self.autopilot = Autopilot(AutopilotParams(
            cfg.lookahead_m, cfg.cruise_mps, cfg.goal_tol_m))
        self.seq = 0
        self.last_telemetry: wire.Telemetry | None = None
        self.estop_input = False
        self._estop_to_send = False
        self.stop_override = False  # pedestrian rule, set by the perception side

    # -- operator events --------------------------------------------------

    def push_joy(self, joy: JoyInput) -> None:
        self.teleop.push(joy)

    def trigger_estop(self) -> None:
        self.estop_input = True
        self._estop_to_send = True

    def request_reset(self, now: float) -> bool:
        """Operator fault reset; clears the e-stop and re-arms if safe."""
        self.estop_input = False
        try:
            self.supervisor.reset(self._safety_inputs(now))
        except UnsafeReset:
            return False
        return self.supervisor.state is not SafetyState.FAULT_LATCHED

    def set_goal(self, x: float, y: float) -> None:
        pose = self.pose_provider() if self.pose_provider else None
        if pose is None:
            raise ValueError("no pose available; cannot accept a goal")
        self.autopilot.set_goal(pose, (x, y))

    def set_mode(self, mode: Mode) -> None:
        self.mode = mode

    # -- tick -------------------------------------------------------------

    def _safety_inputs(self, now: float) -> SafetyInputs:
        tel = self.last_telemetry
        return SafetyInputs(
            dmh_held=tel.dmh_closed if tel else False,
            enable_held=self.teleop.enable_held,
            estop_rx=self.estop_input,
            heartbeat_stale=self.liveness.stale(now),
            battery_v=tel.battery_cv / 100.0 if tel else 0.0,
            overcurrent_trip=tel.fault_latched if tel else False,
            mode=self.mode)

    def _drain_rx(self, now: float) -> None:
        got = False
        for data in self.link.recv_all():
            try:
                msg, _ = wire.decode_packet(data, self.cfg.max_drive_units)
            except wire.DecodeError:
                continue
            if isinstance(msg, wire.Telemetry):
                self.last_telemetry = msg
                got = True
        self.liveness = wire.liveness_update(self.liveness, now, got)

    def _select_twist(self) -> tuple[VelocityCommand, bool]:
        manual, released = self.teleop.poll()
        if self.mode is Mode.MANUAL:
            if manual is not None:
                return manual, False
            # Suppressed: hold zero; `released` already forced one explicit
            # zero through this same path.
            return VelocityCommand(0.0, 0.0), not released
        # autonomous: manual input preempts while actively held
        if manual is not None:
            return manual, False
        pose = self.pose_provider() if self.pose_provider else None
        if pose is not None and self.autopilot.goal is not None:
            return self.autopilot.tick(pose), False
        return VelocityCommand(0.0, 0.0), False

    def control_tick(self, now: float) -> TickResult:
        self._drain_rx(now)
        decision = self.supervisor.tick(self._safety_inputs(now))

        twist, suppressed = self._select_twist()
        if self.stop_override:
            twist = VelocityCommand(0.0, 0.0)
        ack = enforce_min_radius(
            twist_to_ackermann(twist, self.geom, wz_full=self.cfg.scale_z),
            self.geom)
        target_v = steer_command_to_target(ack.delta, self.calib)
        units = speed_to_units(ack.speed, self.cfg.units_to_mps,
                               self.cfg.max_drive_units) \
            if decision.motor_power else 0

        messages: list[wire.WireMessage] = [wire.Heartbeat()]
        if self._estop_to_send:
            messages.append(wire.EStop())
            self._estop_to_send = False
        messages.append(wire.RelayCmd(0, decision.motor_power))
        messages.append(wire.SteerCmd(int(round(target_v * 1000.0))))
        messages.append(wire.DriveCmd(units))
        for msg in messages:
            self.link.send(wire.encode_packet(msg, self.seq,
                                              self.cfg.max_drive_units))
            self.seq = (self.seq + 1) & 0xFFFF
        self.liveness = wire.mark_tx(self.liveness, now)

        return TickResult(
            twist=twist, suppressed=suppressed, ackermann=ack,
            steer_target_v=target_v, drive_units=units,
            decision_state=decision.state, decision_reason=decision.reason,
            motor_power=decision.motor_power,
            brake_released=decision.brake_released,
            messages=tuple(messages))
