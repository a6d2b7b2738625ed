"""Plant: power-chain semantics, speed anchors, circle geometry against the
exact parametrization, caps and trips under fuzz."""

import dataclasses
import math

import pytest

from dbwire import wire
from dbwire.plant import (InvalidDt, PlantConfig, PlantInputs,
                          initial_state, read_telemetry, reset_breaker, step)

CFG = PlantConfig()
COAST = PlantInputs()


def drive(units: int, relay: bool = True, duty: float = 0.0) -> PlantInputs:
    return PlantInputs(motor_units=units, actuator_duty=duty,
                       relay_coil_energized=relay)


class TestBasics:
    def test_parked_is_inert(self):
        state = initial_state(CFG)
        later = step(state, COAST, CFG, 0.02)
        assert later.t == pytest.approx(0.02)
        assert (later.x, later.y, later.v) == (state.x, state.y, 0.0)
        assert later.brake_engaged
        assert not later.power_relay_closed

    def test_invalid_dt(self):
        state = initial_state(CFG)
        for dt in (0.0, -0.1, 0.2):
            with pytest.raises(InvalidDt):
                step(state, COAST, CFG, dt)

    def test_400_units_settles_at_cap_speed(self):
        # 400 units * 0.0005 (m/s)/unit = 0.2 m/s; after >= 5 tau the lag
        # has settled within 1%
        state = initial_state(CFG)
        for _ in range(int(5 * CFG.motor_tau_s / 0.02) + 1):
            state = step(state, drive(400), CFG, 0.02)
        assert abs(state.v - 0.2) <= 0.002

    def test_brake_on_relay_open_decelerates(self):
        state = initial_state(CFG)
        for _ in range(300):
            state = step(state, drive(400), CFG, 0.02)
        moving = state.v
        assert moving > 0.19
        state = step(state, drive(400, relay=False), CFG, 0.02)
        assert state.brake_engaged
        assert state.v < moving
        for _ in range(10):
            state = step(state, drive(400, relay=False), CFG, 0.02)
        assert state.v == 0.0

    def test_feedback_extension_bijection(self, rng):
        state = initial_state(CFG)
        for _ in range(500):
            inp = PlantInputs(actuator_duty=float(rng.uniform(-1, 1)))
            state = step(state, inp, CFG, 0.02)
            assert state.feedback_v == pytest.approx(
                CFG.pot_span_v * state.extension / CFG.stroke_m, abs=1e-12)


class TestCircle:
    # 1 m/s needs 2000 units; keep the current model below the breaker
    # threshold for these runs (a cruise, not an overload)
    CRUISE_CFG = dataclasses.replace(CFG, motor_current_per_unit=0.01)

    def test_full_lock_traces_min_radius_circle(self):
        """Hold 1 m/s with the wheel at the radius-2.05 angle: after one
        full circumference the pose returns to start (exact circle oracle)."""
        cfg = self.CRUISE_CFG
        radius = cfg.geometry.min_turning_radius
        delta = math.atan(cfg.geometry.wheelbase_l / radius)
        extension = cfg.stroke_m * cfg.linkage.voltage(delta) / cfg.pot_span_v
        state = dataclasses.replace(initial_state(cfg), extension=extension,
                                    v=1.0)
        dt = 0.001
        steps = int(round(2 * math.pi * radius / 1.0 / dt))
        inputs = drive(2000)  # setpoint 1.0 m/s: holds v steady
        for _ in range(steps):
            state = step(state, inputs, cfg, dt)
        assert math.hypot(state.x, state.y) <= 1e-2
        assert state.v == pytest.approx(1.0, abs=1e-9)
        # mid-trajectory sanity: the turn rate matched v/R
        assert state.theta == pytest.approx(2 * math.pi, rel=1e-3)

    def test_straight_line_stays_on_axis(self):
        cfg = self.CRUISE_CFG
        state = dataclasses.replace(initial_state(cfg), v=1.0)
        for _ in range(2000):
            state = step(state, drive(2000), cfg, 0.005)
        assert abs(state.y) <= 1e-9
        assert abs(state.theta) <= 1e-9
        assert state.x == pytest.approx(10.0, rel=1e-6)


class TestCapsAndTrips:
    def test_speed_never_exceeds_cap_fuzz(self, rng):
        state = initial_state(CFG)
        for _ in range(5000):
            inp = PlantInputs(
                motor_units=int(rng.integers(-30000, 30000)),
                actuator_duty=float(rng.uniform(-2, 2)),
                relay_coil_energized=bool(rng.random() < 0.9))
            state = step(state, inp, CFG, 0.02)
            assert abs(state.v) <= CFG.max_speed_mps + 1e-12

    def test_brake_never_speeds_up(self, rng):
        state = dataclasses.replace(initial_state(CFG), v=2.0)
        previous = state.v
        for _ in range(200):
            state = step(state, drive(4000, relay=False), CFG, 0.02)
            assert state.brake_engaged
            assert abs(state.v) <= abs(previous)
            previous = state.v

    def test_breaker_trips_and_latches(self):
        cfg = dataclasses.replace(CFG, breaker_trip_a=15.0)
        state = initial_state(cfg)
        state = step(state, drive(400), cfg, 0.02)  # 1 + 20 A > 15 A
        assert state.breaker_tripped
        # power path open next step regardless of the relay command
        state = step(state, drive(400), cfg, 0.02)
        assert not state.power_relay_closed
        assert state.brake_engaged
        for _ in range(50):
            state = step(state, drive(0), cfg, 0.02)
            assert state.breaker_tripped
        state = reset_breaker(state)
        state = step(state, drive(0), cfg, 0.02)
        assert state.power_relay_closed

    def test_fuse_blows_on_extreme_current(self):
        cfg = dataclasses.replace(CFG, motor_current_per_unit=0.3)
        state = initial_state(cfg)
        state = step(state, drive(400), cfg, 0.02)  # 121 A > 100 A fuse
        assert state.fuse_blown
        # reset_breaker must not clear the fuse
        assert reset_breaker(state).fuse_blown

    def test_battery_droops_under_load_and_recovers_ocv(self):
        state = initial_state(CFG)
        idle_v = step(state, COAST, CFG, 0.02).battery_v
        loaded_v = step(state, drive(400), CFG, 0.02).battery_v
        assert loaded_v < idle_v
        # drained battery reads lower open-circuit voltage
        drained = dataclasses.replace(state, charge_ah=1.0)
        assert step(drained, COAST, CFG, 0.02).battery_v < idle_v


class TestTelemetry:
    def test_unit_conversions(self):
        state = dataclasses.replace(initial_state(CFG), feedback_v=2.5,
                                    battery_v=24.8)
        tel = read_telemetry(state)
        assert tel.steer_mv == 2500
        assert tel.battery_cv == 2480

    def test_flags(self):
        state = initial_state(CFG)  # parked: brake engaged, relay open
        tel = read_telemetry(state, dmh_closed=True)
        assert tel.dmh_closed and tel.brake_engaged
        assert not tel.power_relay_closed and not tel.fault_latched
        tripped = dataclasses.replace(state, breaker_tripped=True)
        assert read_telemetry(tripped).fault_latched

    def test_round_trip_through_wire(self, rng):
        state = initial_state(CFG)
        for _ in range(200):
            inp = PlantInputs(
                motor_units=int(rng.integers(-400, 401)),
                actuator_duty=float(rng.uniform(-1, 1)),
                relay_coil_energized=bool(rng.random() < 0.7))
            state = step(state, inp, CFG, 0.02)
            tel = read_telemetry(state, motor_units_echo=inp.motor_units,
                                 dmh_closed=True)
            decoded, seq = wire.decode_packet(wire.encode_packet(tel, 77))
            assert decoded == tel and seq == 77
