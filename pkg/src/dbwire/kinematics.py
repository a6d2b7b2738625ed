"""Twist-to-Ackermann conversion and steered-wheel geometry.

Commands arrive as (vx, wz) velocity pairs. A car-like vehicle cannot turn
on the spot, so a zero-speed twist with nonzero yaw rate is reinterpreted
as dry steering: the front wheels turn while the vehicle stays put.

Sign convention: x forward, y left, counter-clockwise positive. A left
turn has a positive turning radius, a right turn a negative one; driving
straight puts the instantaneous center of curvature at ±infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Below this forward speed a twist counts as a turn-on-spot request.
V_EPS = 0.01
# Yaw rate that maps to full steering lock when dry steering.
WZ_FULL_SCALE = 1.0


class DegenerateGeometry(ValueError):
    """The turning center would fall inside the axle track."""


@dataclass(frozen=True, slots=True)
class VehicleGeometry:
    """Wheelbase/track are build measurements; defaults must be calibrated."""

    wheelbase_l: float = 1.3
    track_w: float = 0.64
    min_turning_radius: float = 2.05

    def __post_init__(self):
        if self.wheelbase_l <= 0 or self.track_w <= 0:
            raise ValueError("wheelbase and track must be positive")
        if self.min_turning_radius <= self.track_w / 2:
            raise ValueError("min turning radius must exceed half the track")

    @property
    def max_steer_delta(self) -> float:
        return math.atan(self.wheelbase_l / self.min_turning_radius)


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    vx: float = 0.0
    wz: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.wz)):
            raise ValueError(f"non-finite velocity command ({self.vx}, {self.wz})")


@dataclass(frozen=True, slots=True)
class AckermannCommand:
    speed: float
    delta: float


def turning_radius(vx: float, wz: float) -> float:
    """Signed radius of the commanded arc; ±inf when driving straight."""
    if wz == 0.0:
        return math.inf if vx >= 0 else -math.inf
    return vx / wz


def twist_to_ackermann(cmd: VelocityCommand, geom: VehicleGeometry,
                       v_eps: float = V_EPS,
                       wz_full: float = WZ_FULL_SCALE) -> AckermannCommand:
    """Map (vx, wz) to (speed, virtual front-wheel angle).

    Moving: delta = atan(L * wz / vx), clamped to the steering lock.
    Turn-on-spot: dry steer, proportional to wz with full lock at wz_full.
    """
    max_delta = geom.max_steer_delta
    if abs(cmd.vx) >= v_eps:
        delta = math.atan(geom.wheelbase_l * cmd.wz / cmd.vx)
        return AckermannCommand(cmd.vx, _clamp(delta, max_delta))
    if abs(cmd.wz) > 1e-12:
        frac = max(-1.0, min(1.0, cmd.wz / wz_full))
        return AckermannCommand(0.0, frac * max_delta)
    return AckermannCommand(0.0, 0.0)


def wheel_angles(delta: float, geom: VehicleGeometry) -> tuple[float, float]:
    """(inner, outer) wheel angles for a virtual front-wheel angle.

    Inner means nearer the turning center. Both wheel normals intersect at
    the same center: tan(inner) = L/(R - W/2), tan(outer) = L/(R + W/2),
    with R = L/tan|delta|.
    """
    if delta == 0.0:
        return 0.0, 0.0
    radius = geom.wheelbase_l / math.tan(abs(delta))
    half_track = geom.track_w / 2
    if radius <= half_track:
        raise DegenerateGeometry(
            f"turning radius {radius:.3f} m inside half-track {half_track:.3f} m")
    sign = 1.0 if delta > 0 else -1.0
    inner = math.atan(geom.wheelbase_l / (radius - half_track))
    outer = math.atan(geom.wheelbase_l / (radius + half_track))
    return sign * inner, sign * outer


def enforce_min_radius(cmd: AckermannCommand,
                       geom: VehicleGeometry) -> AckermannCommand:
    """Clamp the wheel angle so the implied arc never undercuts the vehicle's
    minimum turning radius. Speed passes through unchanged."""
    limit = geom.max_steer_delta
    if abs(cmd.delta) <= limit:
        return cmd
    return AckermannCommand(cmd.speed, _clamp(cmd.delta, limit))


def _clamp(value: float, bound: float) -> float:
    return max(-bound, min(bound, value))
