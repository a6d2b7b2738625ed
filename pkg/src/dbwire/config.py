"""Central configuration: one flat key=value file, SI units throughout.

Every default below is overridable from the file; unknown keys are
rejected with the offending line so typos cannot silently no-op. Values
parse by the type of the corresponding field (bool accepts true/false,
1/0, yes/no).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .kinematics import VehicleGeometry
from .perception import CameraIntrinsics, CameraMount, ScanSpec
from .plant import LinkageMap, PlantConfig
from .steering import SteerLoopConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GatewayConfig:
    # vehicle geometry
    wheelbase_l: float = 1.3
    track_w: float = 0.64
    min_turning_radius: float = 2.05
    # link
    heartbeat_timeout_s: float = 0.5
    udp_cmd_port: int = 40004
    udp_telemetry_port: int = 40005
    max_drive_units: int = 400
    # control loop
    tick_hz: float = 50.0
    perception_hz: float = 10.0
    # teleop
    enable_button: int = 0
    speed_axis: int = 1
    steer_axis: int = 0
    scale_x: float = 0.2    # m/s at full stick
    scale_z: float = 1.0    # rad/s at full stick; also dry-steer full scale
    # autopilot
    lookahead_m: float = 1.5
    cruise_mps: float = 0.15
    goal_tol_m: float = 0.35
    # pedestrian stop rule
    stop_radius_m: float = 1.5
    stop_horizon_s: float = 3.0
    # safety
    low_battery_v: float = 22.0
    # steering servo
    steer_deadband_v: float = 0.05
    steer_kp: float = 4.0
    steer_max_duty: float = 1.0
    steer_min_duty: float = 0.15
    # plant
    units_to_mps: float = 0.0005
    max_speed_mps: float = 4.17
    motor_tau_s: float = 0.5
    actuator_rate_mps: float = 0.035
    stroke_m: float = 0.10
    pot_span_v: float = 5.0
    brake_decel: float = 3.0
    breaker_trip_a: float = 63.0
    fuse_trip_a: float = 100.0
    battery_capacity_ah: float = 36.0
    battery_full_v: float = 25.4
    battery_empty_v: float = 23.0
    battery_r_int: float = 0.05
    idle_current_a: float = 1.0
    motor_current_per_unit: float = 0.05
    actuator_current_a: float = 2.0
    linkage_slope_v_per_rad: float = 25.0 / 6.0
    linkage_center_v: float = 2.5
    # camera + scan
    cam_fx: float = 212.0
    cam_fy: float = 212.0
    cam_cx: float = 212.0
    cam_cy: float = 120.0
    cam_width: int = 424
    cam_height: int = 240
    cam_range_min: float = 0.3
    cam_range_max: float = 5.0
    cam_pitch_offset: float = 0.0
    cam_forward_m: float = 0.4
    cam_lateral_m: float = 0.0
    cam_height_m: float = 0.6
    scan_angle_min: float = -0.45
    scan_angle_max: float = 0.45
    scan_angle_increment: float = 0.005
    floor_z_max: float = 0.05
    # perception
    ped_body_length_m: float = 0.4
    depth_noise_sigma: float = 0.005
    # steering calibration file; empty string = derive from the plant linkage
    calib_file: str = ""

    def __post_init__(self):
        # full stick must never exceed the driver-unit cap
        if self.scale_x / self.units_to_mps > self.max_drive_units + 1e-9:
            raise ConfigError(
                f"scale_x {self.scale_x} maps above ±{self.max_drive_units} "
                "driver units")

    # -- sub-config builders ---------------------------------------------

    def geometry(self) -> VehicleGeometry:
        return VehicleGeometry(self.wheelbase_l, self.track_w,
                               self.min_turning_radius)

    def plant_config(self) -> PlantConfig:
        return PlantConfig(
            geometry=self.geometry(),
            units_to_mps=self.units_to_mps,
            max_speed_mps=self.max_speed_mps,
            motor_tau_s=self.motor_tau_s,
            actuator_rate_mps=self.actuator_rate_mps,
            stroke_m=self.stroke_m,
            pot_span_v=self.pot_span_v,
            brake_decel=self.brake_decel,
            breaker_trip_a=self.breaker_trip_a,
            fuse_trip_a=self.fuse_trip_a,
            battery_capacity_ah=self.battery_capacity_ah,
            battery_full_v=self.battery_full_v,
            battery_empty_v=self.battery_empty_v,
            battery_r_int=self.battery_r_int,
            idle_current_a=self.idle_current_a,
            motor_current_per_unit=self.motor_current_per_unit,
            actuator_current_a=self.actuator_current_a,
            linkage=LinkageMap(self.linkage_slope_v_per_rad,
                               self.linkage_center_v))

    def steer_config(self) -> SteerLoopConfig:
        return SteerLoopConfig(self.steer_deadband_v, self.steer_kp,
                               self.steer_max_duty, self.steer_min_duty)

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(
            fx=self.cam_fx, fy=self.cam_fy, cx=self.cam_cx, cy=self.cam_cy,
            width=self.cam_width, height=self.cam_height,
            range_min=self.cam_range_min, range_max=self.cam_range_max,
            pitch_offset=self.cam_pitch_offset)

    def mount(self) -> CameraMount:
        return CameraMount(self.cam_forward_m, self.cam_lateral_m,
                           self.cam_height_m)

    def scan_spec(self) -> ScanSpec:
        return ScanSpec(self.scan_angle_min, self.scan_angle_max,
                        self.scan_angle_increment, self.cam_range_min,
                        self.cam_range_max, self.floor_z_max)

    @property
    def tick_dt(self) -> float:
        return 1.0 / self.tick_hz


_FIELDS = {f.name: f for f in dataclasses.fields(GatewayConfig)}


def _parse_value(name: str, text: str):
    kind = _FIELDS[name].type
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def load_config(path: str | Path,
                overrides: dict | None = None) -> GatewayConfig:
    """Read a flat key=value file on top of the built-in defaults."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, "
                              f"got {raw!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, text.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    if overrides:
        values.update(overrides)
    return GatewayConfig(**values)


def write_default_config(path: str | Path) -> None:
    """Write every key at its default, as a starting point for edits."""
    cfg = GatewayConfig()
    lines = [f"{f.name} = {getattr(cfg, f.name)}"
             for f in dataclasses.fields(GatewayConfig)]
    Path(path).write_text("\n".join(lines) + "\n")
