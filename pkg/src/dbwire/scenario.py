"""Scenario files and the deterministic simulation harness.

A scenario is a flat text file (key = value, repeatable keys for lists):

    name = crossing
    duration_s = 40
    seed = 7
    mode = autonomous              # or manual
    goal = 12 0 0                  # x y heading
    obstacle = 4 -2 0.5 1 1 1      # x y z sx sy sz (center + sizes)
    pedestrian = 8 -4 0 0.8 5      # start_x start_y vel_x vel_y t_start
    joy = 1 0                      # scripted stick (speed, steer), manual
    dmh = true                     # hardware handle held

Runs are bit-deterministic for a given (scenario, seed): the only random
draw is the seeded depth noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .board import SimBoard
from .calibration import CalibrationMap
from .config import GatewayConfig
from .gateway import Gateway, JoyInput, TelemetryFrame, write_telemetry_csv
from .link import loopback_pair
from .perception import (PedestrianTracker, TrackState, cam_points_to_base,
                         cloud_to_scan, depth_to_points, mask_depth,
                         project_to_3d, NoValidDepth)
from .safety import Mode
from .scene import ObstacleBox, PedestrianTruth, synth_scene


class BadScenarioFile(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PedestrianPath:
    start: tuple[float, float]
    velocity: tuple[float, float]
    t_start: float = 0.0

    def at(self, t: float) -> tuple[float, float] | None:
        if t < self.t_start:
            return None
        dt = t - self.t_start
        return (self.start[0] + self.velocity[0] * dt,
                self.start[1] + self.velocity[1] * dt)


@dataclass(frozen=True)
class Scenario:
    name: str = "unnamed"
    duration_s: float = 10.0
    seed: int = 0
    mode: Mode = Mode.MANUAL
    goal: tuple[float, float, float] | None = None
    obstacles: tuple[ObstacleBox, ...] = ()
    pedestrians: tuple[PedestrianPath, ...] = ()
    joy: tuple[float, float] | None = None  # scripted (speed, steer) stick
    dmh: bool = True

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")


def _floats(text: str, n: int, what: str, where: str) -> list[float]:
    parts = text.split()
    if len(parts) != n:
        raise BadScenarioFile(f"{where}: {what} needs {n} numbers, "
                              f"got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise BadScenarioFile(f"{where}: {what}: {exc}")


def parse_scenario(path: str | Path) -> Scenario:
    values: dict = {"obstacles": [], "pedestrians": []}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise BadScenarioFile(f"{where}: expected key = value")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key == "name":
            values["name"] = text
        elif key == "duration_s":
            values["duration_s"] = _floats(text, 1, key, where)[0]
        elif key == "seed":
            values["seed"] = int(_floats(text, 1, key, where)[0])
        elif key == "mode":
            try:
                values["mode"] = Mode(text.upper())
            except ValueError:
                raise BadScenarioFile(f"{where}: mode must be manual or "
                                      f"autonomous, got {text!r}")
        elif key == "goal":
            values["goal"] = tuple(_floats(text, 3, key, where))
        elif key == "obstacle":
            values["obstacles"].append(ObstacleBox(*_floats(text, 6, key, where)))
        elif key == "pedestrian":
            x, y, vx, vy, t0 = _floats(text, 5, key, where)
            values["pedestrians"].append(PedestrianPath((x, y), (vx, vy), t0))
        elif key == "joy":
            values["joy"] = tuple(_floats(text, 2, key, where))
        elif key == "dmh":
            values["dmh"] = text.lower() in ("true", "yes", "1")
        else:
            raise BadScenarioFile(f"{where}: unknown key {key!r}")
    values["obstacles"] = tuple(values["obstacles"])
    values["pedestrians"] = tuple(values["pedestrians"])
    return Scenario(**values)


def default_calibration(cfg: GatewayConfig) -> CalibrationMap:
    """Perfectly calibrated map derived from the plant's true linkage;
    stand-in until a fitted file is supplied."""
    return CalibrationMap(slope=cfg.linkage_slope_v_per_rad,
                          intercept=cfg.linkage_center_v,
                          rms_residual=0.0, v_min=0.0, v_max=cfg.pot_span_v)


def predicted_conflict(tracks: list[TrackState], vehicle_xy, vehicle_vel_xy,
                       stop_radius: float, horizon: float) -> bool:
    """True when any smoothed track is inside the stop radius now, or its
    relative motion brings it inside within the horizon."""
    px, py = vehicle_xy
    vvx, vvy = vehicle_vel_xy
    for track in tracks:
        rx = track.position[0] - px
        ry = track.position[1] - py
        if math.hypot(rx, ry) < stop_radius:
            return True
        rvx = track.velocity[0] - vvx
        rvy = track.velocity[1] - vvy
        speed2 = rvx * rvx + rvy * rvy
        if speed2 < 1e-12:
            continue
        t_close = -(rx * rvx + ry * rvy) / speed2
        if not 0.0 <= t_close <= horizon:
            continue
        cx = rx + rvx * t_close
        cy = ry + rvy * t_close
        if math.hypot(cx, cy) < stop_radius:
            return True
    return False


class SimHarness:
    """Gateway + simulated board + perception, ticked on a shared sim clock."""

    def __init__(self, cfg: GatewayConfig | None = None,
                 scenario: Scenario | None = None,
                 calib: CalibrationMap | None = None):
        self.cfg = cfg or GatewayConfig()
        self.scenario = scenario or Scenario()
        self.calib = calib or default_calibration(self.cfg)
        gw_link, board_link = loopback_pair()
        self.board = SimBoard(self.cfg.plant_config(), board_link,
                              self.cfg.steer_config(),
                              heartbeat_timeout=self.cfg.heartbeat_timeout_s,
                              dmh_held=self.scenario.dmh,
                              max_drive_units=self.cfg.max_drive_units)
        self.gateway = Gateway(self.cfg, gw_link, self.calib,
                               mode=self.scenario.mode,
                               pose_provider=self._pose)
        self.links = (gw_link, board_link)
        self.tracker = PedestrianTracker()
        self.rng = np.random.default_rng(self.scenario.seed)
        self.t = 0.0
        self.dt = self.cfg.tick_dt
        self._perception_every = max(
            1, int(round(self.cfg.tick_hz / self.cfg.perception_hz)))
        self._tick_count = 0
        self.latest_scan = None
        self.latest_tracks: list[TrackState] = []
        self.last_result = None  # TickResult of the most recent control tick
        self.frames: list[TelemetryFrame] = []
        self.safety_events: list[tuple[float, str, str]] = []
        self.min_pedestrian_distance = math.inf
        self._goal_sent = False
        if self.scenario.joy is not None:
            self.set_stick(self.scenario.joy[0], self.scenario.joy[1],
                           enable=True)

    # -- operator-style controls -----------------------------------------

    def set_stick(self, speed: float, steer: float, enable: bool = True) -> None:
        self.gateway.push_joy(JoyInput(axes=(steer, speed),
                                       buttons=(enable,), t=self.t))

    def sever_link(self) -> None:
        self.links[0].sever()

    def restore_link(self) -> None:
        self.links[0].restore()

    # -- internals ---------------------------------------------------------

    def _pose(self):
        st = self.board.state
        return (st.x, st.y, st.theta)

    def _active_pedestrians(self) -> list[PedestrianTruth]:
        out = []
        for i, path in enumerate(self.scenario.pedestrians):
            pos = path.at(self.t)
            if pos is not None:
                out.append(PedestrianTruth(i, pos[0], pos[1],
                                           path.velocity[0], path.velocity[1]))
        return out

    def _perceive(self, peds: list[PedestrianTruth]) -> None:
        intr = self.cfg.intrinsics()
        mount = self.cfg.mount()
        render = synth_scene(self.board.state, list(self.scenario.obstacles),
                             peds, intr, mount,
                             depth_noise_sigma=self.cfg.depth_noise_sigma,
                             rng=self.rng)
        masked = mask_depth(render.depth, render.detections)
        pts = cam_points_to_base(depth_to_points(masked, intr).reshape(-1, 3),
                                 intr, mount)
        self.latest_scan = cloud_to_scan(pts, self.cfg.scan_spec())

        st = self.board.state
        cos_t, sin_t = math.cos(st.theta), math.sin(st.theta)
        observations = []
        for det, pid in zip(render.detections, render.ped_ids):
            try:
                box3 = project_to_3d(det, render.depth, intr,
                                     self.cfg.ped_body_length_m)
            except NoValidDepth:
                continue
            base = cam_points_to_base(
                np.array([box3.x, box3.y, box3.z]), intr, mount)
            world = np.array([
                st.x + cos_t * base[0] - sin_t * base[1],
                st.y + sin_t * base[0] + cos_t * base[1],
                base[2]])
            observations.append((pid, world))
        self.latest_tracks = self.tracker.update(self.t, observations)

        vel = (st.v * cos_t, st.v * sin_t)
        self.gateway.stop_override = predicted_conflict(
            self.latest_tracks, (st.x, st.y), vel,
            self.cfg.stop_radius_m, self.cfg.stop_horizon_s)

    def tick(self) -> TelemetryFrame:
        now = self.t
        if self.scenario.goal is not None and not self._goal_sent:
            self.gateway.set_goal(self.scenario.goal[0], self.scenario.goal[1])
            self._goal_sent = True

        peds = self._active_pedestrians()
        if peds or self.scenario.obstacles:
            if self._tick_count % self._perception_every == 0:
                self._perceive(peds)
        result = self.gateway.control_tick(now)
        self.last_result = result
        self.board.tick(now, self.dt)

        st = self.board.state
        for ped in peds:
            dist = math.hypot(ped.x - st.x, ped.y - st.y)
            self.min_pedestrian_distance = min(self.min_pedestrian_distance, dist)

        nearest = math.inf
        for track in self.latest_tracks:
            nearest = min(nearest, math.hypot(track.position[0] - st.x,
                                              track.position[1] - st.y))
        frame = TelemetryFrame(
            t=now, x=st.x, y=st.y, theta=st.theta, v=st.v, delta=st.delta,
            safety_state=result.decision_state.value,
            safety_reason=result.decision_reason.value,
            motor_power=result.motor_power,
            brake_engaged=st.brake_engaged,
            steer_feedback_v=st.feedback_v,
            motor_units=result.drive_units,
            battery_v=st.battery_v,
            n_tracks=len(self.latest_tracks),
            nearest_track_m=nearest)
        self.frames.append(frame)
        if not self.safety_events or \
                self.safety_events[-1][1] != frame.safety_state:
            self.safety_events.append(
                (now, frame.safety_state, frame.safety_reason))
        self._tick_count += 1
        self.t += self.dt
        return frame

    def run(self, duration_s: float | None = None) -> list[TelemetryFrame]:
        end = self.t + (duration_s if duration_s is not None
                        else self.scenario.duration_s)
        while self.t < end - 1e-9:
            self.tick()
        return self.frames


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    frames: list
    goal_reached: bool
    final_goal_distance_m: float
    min_pedestrian_distance_m: float
    safety_events: list

    def summary(self) -> str:
        lines = [f"scenario: {self.scenario}",
                 f"frames: {len(self.frames)}"]
        if math.isfinite(self.final_goal_distance_m):
            lines.append(f"goal reached: {self.goal_reached} "
                         f"(final distance {self.final_goal_distance_m:.3f} m)")
        if math.isfinite(self.min_pedestrian_distance_m):
            lines.append(f"min pedestrian distance: "
                         f"{self.min_pedestrian_distance_m:.3f} m")
        lines.append(f"safety events: "
                     + "; ".join(f"{t:.2f}s {s}({r})"
                                 for t, s, r in self.safety_events))
        return "\n".join(lines)


def run_scenario(scenario: Scenario, cfg: GatewayConfig | None = None,
                 log_path: str | Path | None = None,
                 calib: CalibrationMap | None = None) -> ScenarioResult:
    harness = SimHarness(cfg, scenario, calib)
    frames = harness.run()
    if log_path is not None:
        write_telemetry_csv(log_path, frames)
    st = harness.board.state
    if scenario.goal is not None:
        goal_dist = math.hypot(scenario.goal[0] - st.x, scenario.goal[1] - st.y)
        reached = harness.gateway.autopilot.done
    else:
        goal_dist = math.inf
        reached = False
    return ScenarioResult(
        scenario=scenario.name,
        frames=frames,
        goal_reached=reached,
        final_goal_distance_m=goal_dist,
        min_pedestrian_distance_m=harness.min_pedestrian_distance,
        safety_events=harness.safety_events)
