"""Discrete-time simulation of the vehicle and its power chain.

Models, deliberately minimal but faithful to the real behavior:

  * traction motor — first-order speed lag toward the commanded setpoint,
    hard-capped at the 15 km/h limit; no torque/mass model;
  * electromagnetic brake — spring-applied whenever the traction power
    path is open; decelerates the vehicle at a constant rate;
  * power path — relay coil, circuit breaker and main fuse in series;
    breaker/fuse trips latch until explicitly reset;
  * steering — linear actuator with a potentiometer spanning 0..5 V over
    the stroke; the true linkage (voltage -> wheel angle) is configured
    separately from any fitted calibration so calibration error is
    testable;
  * pose — bicycle model, explicit Euler (keep dt <= 10 ms for tight-arc
    accuracy);
  * battery — linear open-circuit voltage over charge with an internal
    resistance drop.

Everything is deterministic given (initial state, inputs, dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import wire
from .kinematics import VehicleGeometry


class InvalidDt(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class LinkageMap:
    """The plant's true actuator-voltage to wheel-angle relation."""

    slope_v_per_rad: float = 25.0 / 6.0   # 0..5 V over ±0.6 rad
    center_v: float = 2.5

    def angle(self, voltage: float) -> float:
        return (voltage - self.center_v) / self.slope_v_per_rad

    def voltage(self, angle: float) -> float:
        return self.center_v + self.slope_v_per_rad * angle


@dataclass(frozen=True)
class PlantConfig:
    geometry: VehicleGeometry = field(default_factory=VehicleGeometry)
    units_to_mps: float = 0.0005        # 400 driver units == 0.2 m/s
    max_speed_mps: float = 4.17         # 15 km/h hard cap
    motor_tau_s: float = 0.5
    actuator_rate_mps: float = 0.035    # stroke speed at full duty
    stroke_m: float = 0.10
    pot_span_v: float = 5.0
    brake_decel: float = 3.0
    breaker_trip_a: float = 63.0
    fuse_trip_a: float = 100.0
    battery_capacity_ah: float = 36.0
    battery_full_v: float = 25.4        # open-circuit, full charge
    battery_empty_v: float = 23.0       # open-circuit, empty
    battery_r_int: float = 0.05
    idle_current_a: float = 1.0
    motor_current_per_unit: float = 0.05
    actuator_current_a: float = 2.0
    linkage: LinkageMap = field(default_factory=LinkageMap)

    def __post_init__(self):
        for name in ("units_to_mps", "max_speed_mps", "motor_tau_s",
                     "actuator_rate_mps", "stroke_m", "pot_span_v",
                     "brake_decel", "breaker_trip_a", "fuse_trip_a",
                     "battery_capacity_ah"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, slots=True)
class PlantInputs:
    motor_units: int = 0
    actuator_duty: float = 0.0
    relay_coil_energized: bool = False
    relay_channels: tuple[bool, ...] = (False,) * 8


@dataclass(frozen=True, slots=True)
class PlantState:
    x: float
    y: float
    theta: float
    v: float
    delta: float
    extension: float
    feedback_v: float
    power_relay_closed: bool
    brake_engaged: bool
    breaker_tripped: bool
    fuse_blown: bool
    battery_v: float
    charge_ah: float
    t: float
    relay_channels: tuple[bool, ...] = (False,) * 8


def initial_state(cfg: PlantConfig) -> PlantState:
    extension = cfg.stroke_m / 2  # wheels centered
    feedback_v = cfg.pot_span_v * extension / cfg.stroke_m
    return PlantState(
        x=0.0, y=0.0, theta=0.0, v=0.0,
        delta=cfg.linkage.angle(feedback_v),
        extension=extension, feedback_v=feedback_v,
        power_relay_closed=False, brake_engaged=True,
        breaker_tripped=False, fuse_blown=False,
        battery_v=cfg.battery_full_v, charge_ah=cfg.battery_capacity_ah,
        t=0.0)


def step(state: PlantState, inputs: PlantInputs, cfg: PlantConfig,
         dt: float) -> PlantState:
    """Advance the plant by dt seconds."""
    if not 0.0 < dt <= 0.1:
        raise InvalidDt(f"dt={dt}, need 0 < dt <= 0.1")

    path_closed = (inputs.relay_coil_energized
                   and not state.breaker_tripped and not state.fuse_blown)
    brake_engaged = not path_closed

    v = state.v
    if brake_engaged:
        drop = cfg.brake_decel * dt
        v = math.copysign(max(abs(v) - drop, 0.0), v)
        motor_current = 0.0
    else:
        target = inputs.motor_units * cfg.units_to_mps
        target = max(-cfg.max_speed_mps, min(cfg.max_speed_mps, target))
        v += (target - v) * (1.0 - math.exp(-dt / cfg.motor_tau_s))
        motor_current = abs(inputs.motor_units) * cfg.motor_current_per_unit
    v = max(-cfg.max_speed_mps, min(cfg.max_speed_mps, v))

    duty = max(-1.0, min(1.0, inputs.actuator_duty))
    extension = state.extension + duty * cfg.actuator_rate_mps * dt
    extension = max(0.0, min(cfg.stroke_m, extension))
    feedback_v = cfg.pot_span_v * extension / cfg.stroke_m
    delta = cfg.linkage.angle(feedback_v)

    theta = state.theta + v * math.tan(delta) / cfg.geometry.wheelbase_l * dt
    x = state.x + v * math.cos(state.theta) * dt
    y = state.y + v * math.sin(state.theta) * dt

    current = cfg.idle_current_a + motor_current \
        + abs(duty) * cfg.actuator_current_a
    charge = max(0.0, state.charge_ah - current * dt / 3600.0)
    soc = charge / cfg.battery_capacity_ah
    ocv = cfg.battery_empty_v + (cfg.battery_full_v - cfg.battery_empty_v) * soc
    battery_v = max(0.0, ocv - current * cfg.battery_r_int)

    fuse_blown = state.fuse_blown or current > cfg.fuse_trip_a
    breaker_tripped = state.breaker_tripped or \
        (not fuse_blown and current > cfg.breaker_trip_a)

    return PlantState(
        x=x, y=y, theta=theta, v=v, delta=delta,
        extension=extension, feedback_v=feedback_v,
        power_relay_closed=path_closed, brake_engaged=brake_engaged,
        breaker_tripped=breaker_tripped, fuse_blown=fuse_blown,
        battery_v=battery_v, charge_ah=charge, t=state.t + dt,
        relay_channels=inputs.relay_channels)


def reset_breaker(state: PlantState) -> PlantState:
    """Manually reset the tripped breaker (the fuse stays blown)."""
    return replace(state, breaker_tripped=False)


def read_telemetry(state: PlantState, motor_units_echo: int = 0,
                   dmh_closed: bool = False) -> wire.Telemetry:
    """Snapshot the plant into a telemetry wire message."""
    flags = 0
    if dmh_closed:
        flags |= wire.FLAG_DMH_CLOSED
    if state.brake_engaged:
        flags |= wire.FLAG_BRAKE_ENGAGED
    if state.power_relay_closed:
        flags |= wire.FLAG_POWER_RELAY_CLOSED
    if state.breaker_tripped or state.fuse_blown:
        flags |= wire.FLAG_FAULT_LATCHED
    return wire.Telemetry(
        steer_mv=int(round(state.feedback_v * 1000.0)),
        motor_units_echo=motor_units_echo,
        flags=flags,
        battery_cv=int(round(state.battery_v * 100.0)))
