"""Simulated control board: the link-facing twin of the real hardware.

Consumes command packets, runs the low-level steering servo against the
plant's potentiometer feedback, enforces the firmware-level cutoffs
(hardware DMH and heartbeat staleness open the traction relay regardless
of what was last commanded), steps the plant, and publishes telemetry.
"""

from __future__ import annotations

from . import wire
from .plant import PlantConfig, PlantInputs, PlantState, initial_state, step, read_telemetry
from .steering import SteerLoopConfig, servo_update


class SimBoard:
    def __init__(self, cfg: PlantConfig, link,
                 steer_cfg: SteerLoopConfig | None = None,
                 heartbeat_timeout: float = 0.5,
                 dmh_held: bool = True,
                 max_drive_units: int = wire.MAX_DRIVE_UNITS):
        self.cfg = cfg
        self.link = link
        self.steer_cfg = steer_cfg or SteerLoopConfig()
        self.max_drive_units = max_drive_units
        self.state: PlantState = initial_state(cfg)
        self.liveness = wire.LivenessTracker(timeout=heartbeat_timeout)
        self.dmh_held = dmh_held
        self.motor_units = 0
        self.steer_target_v = cfg.linkage.center_v
        self.relay_cmd_closed = False
        self.relay_channels = [False] * wire.NUM_RELAY_CHANNELS
        self.seq = 0
        self.decode_errors = 0

    def _dispatch(self, msg: wire.WireMessage) -> bool:
        """Apply one command; returns True if it was a heartbeat."""
        if isinstance(msg, wire.Heartbeat):
            return True
        if isinstance(msg, wire.DriveCmd):
            self.motor_units = msg.units
        elif isinstance(msg, wire.SteerCmd):
            self.steer_target_v = msg.target_mv / 1000.0
        elif isinstance(msg, wire.RelayCmd):
            if msg.channel == 0:
                self.relay_cmd_closed = msg.closed
            else:
                self.relay_channels[msg.channel] = msg.closed
        elif isinstance(msg, wire.EStop):
            # graceful stop: drop the setpoint and the relay authorization
            self.motor_units = 0
            self.relay_cmd_closed = False
        return False

    def tick(self, now: float, dt: float) -> PlantState:
        heartbeat = False
        for data in self.link.recv_all():
            try:
                msg, _ = wire.decode_packet(data, self.max_drive_units)
            except wire.DecodeError:
                self.decode_errors += 1
                continue
            heartbeat = self._dispatch(msg) or heartbeat
        self.liveness = wire.liveness_update(self.liveness, now, heartbeat)
        stale = self.liveness.stale(now)

        link_ok = self.dmh_held and not stale
        units = self.motor_units if link_ok else 0
        duty = servo_update(self.steer_target_v, self.state.feedback_v,
                            self.steer_cfg).duty
        inputs = PlantInputs(
            motor_units=units,
            actuator_duty=duty,
            relay_coil_energized=self.relay_cmd_closed and link_ok,
            relay_channels=tuple(self.relay_channels))
        self.state = step(self.state, inputs, self.cfg, dt)

        telemetry = read_telemetry(self.state, motor_units_echo=units,
                                   dmh_closed=self.dmh_held)
        self.link.send(wire.encode_packet(telemetry, self.seq,
                                          self.max_drive_units))
        self.seq = (self.seq + 1) & 0xFFFF
        return self.state
