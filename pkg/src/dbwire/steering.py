"""Closed-loop steering servo: drive the linear actuator until the feedback
voltage matches the calibrated target for the requested wheel angle.

Proportional control with a deadband, plus a minimum breakaway duty so
stiction cannot park the shaft short of small corrections. The update is a
pure function; the caller ticks it at the control rate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import CalibrationMap, NoCalibration, angle_to_voltage


@dataclass(frozen=True, slots=True)
class SteerLoopConfig:
    deadband_v: float = 0.05
    kp: float = 4.0           # duty per volt of error
    max_duty: float = 1.0
    min_duty: float = 0.15    # breakaway against actuator stiction

    def __post_init__(self):
        if self.deadband_v <= 0:
            raise ValueError("deadband must be positive")
        if not 0 < self.min_duty <= self.max_duty <= 1.0:
            raise ValueError("need 0 < min_duty <= max_duty <= 1")


@dataclass(frozen=True, slots=True)
class ActuatorDrive:
    duty: float  # signed; sign selects extend/retract

    def __post_init__(self):
        if abs(self.duty) > 1.0:
            raise ValueError(f"duty {self.duty} outside [-1, 1]")


def servo_update(target_v: float, measured_v: float,
                 cfg: SteerLoopConfig) -> ActuatorDrive:
    """One proportional step toward the target feedback voltage."""
    error = target_v - measured_v
    if abs(error) <= cfg.deadband_v:
        return ActuatorDrive(0.0)
    magnitude = min(cfg.max_duty, max(cfg.min_duty, cfg.kp * abs(error)))
    return ActuatorDrive(magnitude if error > 0 else -magnitude)


def steer_command_to_target(delta: float, calib: CalibrationMap | None) -> float:
    """Feedback-voltage target for a wheel angle, via the fitted map."""
    if calib is None:
        raise NoCalibration("no steering calibration loaded")
    return angle_to_voltage(calib, delta)
