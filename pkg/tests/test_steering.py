"""Steering servo: update-law examples and closed-loop convergence against
the simulated actuator."""

import dataclasses
import math

import pytest

from dbwire.calibration import CalibSample, NoCalibration, fit_linear
from dbwire.plant import PlantConfig, PlantInputs, initial_state, step
from dbwire.steering import (ActuatorDrive, SteerLoopConfig,
                             servo_update, steer_command_to_target)

CFG = SteerLoopConfig()


class TestServoUpdate:
    def test_on_target_zero_duty(self):
        assert servo_update(2.5, 2.5, CFG).duty == 0.0

    def test_large_error_saturates(self):
        # e = 0.5 V, kp = 4 -> clamp(2.0, 0.15, 1.0) = 1.0
        assert servo_update(3.0, 2.5, CFG).duty == pytest.approx(1.0)

    def test_small_error_breakaway(self):
        # e = -0.06 V -> -clamp(0.24, 0.15, 1.0) = -0.24
        assert servo_update(2.44, 2.5, CFG).duty == pytest.approx(-0.24)

    def test_inside_deadband_zero(self):
        assert servo_update(2.54, 2.5, CFG).duty == 0.0

    def test_sign_matches_error(self, rng):
        for _ in range(500):
            target = rng.uniform(0, 5)
            measured = rng.uniform(0, 5)
            duty = servo_update(target, measured, CFG).duty
            error = target - measured
            if abs(error) <= CFG.deadband_v:
                assert duty == 0.0
            else:
                assert math.copysign(1, duty) == math.copysign(1, error)

    def test_no_chatter_at_rest(self):
        for _ in range(100):
            assert servo_update(3.1, 3.1, CFG).duty == 0.0

    def test_duty_bounds(self):
        with pytest.raises(ValueError):
            ActuatorDrive(1.2)


class TestTarget:
    def test_requires_calibration(self):
        with pytest.raises(NoCalibration):
            steer_command_to_target(0.1, None)

    def test_composes_with_map(self):
        cal = fit_linear([CalibSample(0.0, 2.5), CalibSample(0.5, 3.5)])
        assert steer_command_to_target(0.0, cal) == pytest.approx(2.5)
        assert steer_command_to_target(0.25, cal) == pytest.approx(3.0)
        assert steer_command_to_target(9.0, cal) == cal.v_max


class TestClosedLoop:
    def test_converges_and_holds_50_random_targets(self, rng):
        """From any initial extension, a reachable target settles inside the
        deadband within 3 s of simulated time and stays there."""
        plant_cfg = PlantConfig()
        dt = 0.02
        span = plant_cfg.geometry.max_steer_delta
        for _ in range(50):
            state = dataclasses.replace(
                initial_state(plant_cfg),
                extension=float(rng.uniform(0, plant_cfg.stroke_m)))
            delta = float(rng.uniform(-span, span))
            target_v = plant_cfg.linkage.voltage(delta)
            settled_at = None
            for k in range(int(6.0 / dt)):
                duty = servo_update(target_v, state.feedback_v, CFG).duty
                state = step(state, PlantInputs(actuator_duty=duty),
                             plant_cfg, dt)
                inside = abs(state.feedback_v - target_v) <= CFG.deadband_v
                if inside and settled_at is None:
                    settled_at = (k + 1) * dt
                if settled_at is not None:
                    # no limit cycling back out of the deadband
                    assert inside, f"left deadband at t={(k + 1) * dt:.2f}"
            assert settled_at is not None and settled_at <= 3.0
