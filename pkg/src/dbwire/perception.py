"""RGB-D perception pipeline.

Pointcloud-to-laserscan projection with floor filtering, 2D-detection to
3D-box projection through the depth image, constant-velocity Kalman
smoothing of pedestrian tracks, and depth masking of detected pedestrians
(so moving people never leak into mapping input).

2D detection and 2D tracking are external: this module consumes detection
streams, either ground truth from the simulated scene or a real detector's
output via the line-delimited ingest format

    t,u,v,w,h,class,conf,track_id

Ordered point clouds use 20-byte chunks in image order: three little-endian
float32 (x, y, z, camera frame), a 4-byte packed color, 4 bytes padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import scan_accumulate

POINT_STEP = 20
INVALID_DEPTH = math.nan


class NoValidDepth(ValueError):
    """Every pixel in the sampled sub-box was invalid."""


class NonPSDCovariance(ValueError):
    """Covariance lost positive semidefiniteness beyond numerical tolerance."""


@dataclass(frozen=True, slots=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    range_min: float = 0.3
    range_max: float = 5.0
    pitch_offset: float = 0.0  # residual mounting pitch from leveling

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")
        if not self.range_min < self.range_max:
            raise ValueError("range_min must be below range_max")


@dataclass(frozen=True, slots=True)
class CameraMount:
    """Camera position on the vehicle, base frame."""
    forward_m: float = 0.4
    lateral_m: float = 0.0
    height_m: float = 0.6


@dataclass(frozen=True, slots=True)
class ScanSpec:
    angle_min: float = -0.45
    angle_max: float = 0.45
    angle_increment: float = 0.005
    range_min: float = 0.3
    range_max: float = 5.0
    floor_z_max: float = 0.05

    @property
    def nbins(self) -> int:
        return int(math.floor((self.angle_max - self.angle_min)
                              / self.angle_increment)) + 1


@dataclass(frozen=True, slots=True)
class LaserScan:
    angle_min: float
    angle_max: float
    angle_increment: float
    range_min: float
    range_max: float
    ranges: np.ndarray  # float64, +inf = no return


@dataclass(frozen=True, slots=True)
class Box2D:
    u_center: float
    v_center: float
    w: float
    h: float
    class_id: int = 0
    confidence: float = 1.0


@dataclass(frozen=True, slots=True)
class Box3D:
    x: float
    y: float
    z: float
    length: float
    width: float
    height: float


@dataclass(frozen=True, slots=True)
class TrackState:
    track_id: int
    position: np.ndarray    # (3,)
    velocity: np.ndarray    # (3,)
    covariance: np.ndarray  # (6, 6)
    last_update: float


# -- scan projection ----------------------------------------------------------

def cloud_to_scan(points: np.ndarray, spec: ScanSpec) -> LaserScan:
    """Project base-frame points into a 1D range scan.

    Floor contacts (z <= floor_z_max) are dropped; each bearing bin keeps
    the minimum planar range hypot(x, y) within the range band.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    ranges = scan_accumulate(
        np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
        np.ascontiguousarray(pts[:, 2]), spec.floor_z_max,
        spec.angle_min, spec.angle_increment, spec.nbins,
        spec.range_min, spec.range_max)
    return LaserScan(spec.angle_min, spec.angle_max, spec.angle_increment,
                     spec.range_min, spec.range_max, ranges)


# -- 2D -> 3D projection -------------------------------------------------------

def project_to_3d(box: Box2D, depth: np.ndarray, intr: CameraIntrinsics,
                  body_length: float = 0.4) -> Box3D:
    """Lift a 2D detection into a camera-frame 3D box.

    Depth is the median over the central 50% x 50% of the box, which
    resists background bleeding at the box edges. x right, y down, z
    forward (optical convention).
    """
    u0 = int(round(box.u_center - box.w / 4))
    u1 = int(round(box.u_center + box.w / 4))
    v0 = int(round(box.v_center - box.h / 4))
    v1 = int(round(box.v_center + box.h / 4))
    u0, u1 = max(0, u0), min(intr.width - 1, u1)
    v0, v1 = max(0, v0), min(intr.height - 1, v1)
    patch = np.asarray(depth)[v0:v1 + 1, u0:u1 + 1]
    valid = patch[np.isfinite(patch) & (patch > 0)]
    if valid.size == 0:
        raise NoValidDepth(f"no valid depth inside box at "
                           f"({box.u_center:.0f}, {box.v_center:.0f})")
    z = float(np.median(valid))
    return Box3D(
        x=(box.u_center - intr.cx) * z / intr.fx,
        y=(box.v_center - intr.cy) * z / intr.fy,
        z=z,
        length=body_length,
        width=box.w * z / intr.fx,
        height=box.h * z / intr.fy)


# -- Kalman smoothing ----------------------------------------------------------

DEFAULT_ACCEL_DENSITY = 2.0   # white-acceleration PSD, (m/s^2)^2 * s
DEFAULT_OBS_VAR = 0.04        # 0.2 m observation sigma, squared
INITIAL_POS_VAR = 0.5
INITIAL_VEL_VAR = 4.0


def new_track(track_id: int, position: np.ndarray, t: float) -> TrackState:
    cov = np.diag([INITIAL_POS_VAR] * 3 + [INITIAL_VEL_VAR] * 3)
    return TrackState(track_id, np.asarray(position, dtype=float).copy(),
                      np.zeros(3), cov, t)


def _checked(cov: np.ndarray) -> np.ndarray:
    cov = (cov + cov.T) / 2.0
    if np.min(np.linalg.eigvalsh(cov)) < -1e-9:
        raise NonPSDCovariance("covariance eigenvalue below -1e-9")
    return cov


def kalman_predict(track: TrackState, dt: float,
                   accel_density: float = DEFAULT_ACCEL_DENSITY) -> TrackState:
    """Constant-velocity prediction over dt seconds (dt=0 is a no-op)."""
    if dt < 0:
        raise ValueError(f"negative dt {dt}")
    eye = np.eye(3)
    f = np.block([[eye, dt * eye], [np.zeros((3, 3)), eye]])
    q = accel_density * np.block([
        [dt ** 3 / 3 * eye, dt ** 2 / 2 * eye],
        [dt ** 2 / 2 * eye, dt * eye]])
    state = np.concatenate([track.position, track.velocity])
    state = f @ state
    cov = _checked(f @ track.covariance @ f.T + q)
    return TrackState(track.track_id, state[:3], state[3:], cov,
                      track.last_update + dt)


def kalman_update(track: TrackState, obs: np.ndarray,
                  obs_var: float = DEFAULT_OBS_VAR) -> TrackState:
    """Position-observation update (Joseph form for numerical safety)."""
    h = np.hstack([np.eye(3), np.zeros((3, 3))])
    r = obs_var * np.eye(3)
    state = np.concatenate([track.position, track.velocity])
    innovation = np.asarray(obs, dtype=float) - h @ state
    s = h @ track.covariance @ h.T + r
    gain = track.covariance @ h.T @ np.linalg.inv(s)
    state = state + gain @ innovation
    ikh = np.eye(6) - gain @ h
    cov = _checked(ikh @ track.covariance @ ikh.T + gain @ r @ gain.T)
    return TrackState(track.track_id, state[:3], state[3:], cov,
                      track.last_update)


class PedestrianTracker:
    """Per-id constant-velocity smoothing of 3D pedestrian observations."""

    def __init__(self, accel_density: float = DEFAULT_ACCEL_DENSITY,
                 obs_var: float = DEFAULT_OBS_VAR, drop_after_s: float = 1.0):
        self.accel_density = accel_density
        self.obs_var = obs_var
        self.drop_after_s = drop_after_s
        self.tracks: dict[int, TrackState] = {}

    def update(self, t: float,
               observations: list[tuple[int, np.ndarray]]) -> list[TrackState]:
        for track_id, obs in observations:
            track = self.tracks.get(track_id)
            if track is None:
                track = new_track(track_id, obs, t)
            else:
                track = kalman_predict(track, max(0.0, t - track.last_update),
                                       self.accel_density)
            self.tracks[track_id] = kalman_update(track, obs, self.obs_var)
        stale = [tid for tid, tr in self.tracks.items()
                 if t - tr.last_update > self.drop_after_s]
        for tid in stale:
            del self.tracks[tid]
        return list(self.tracks.values())


# -- depth masking --------------------------------------------------------------

def mask_depth(depth: np.ndarray, boxes: list[Box2D]) -> np.ndarray:
    """Blank every pixel inside any box to the invalid sentinel; all other
    pixels pass through bit-identical."""
    out = np.array(depth, copy=True)
    height, width = out.shape
    for box in boxes:
        u0 = max(0, int(round(box.u_center - box.w / 2)))
        u1 = min(width - 1, int(round(box.u_center + box.w / 2)))
        v0 = max(0, int(round(box.v_center - box.h / 2)))
        v1 = min(height - 1, int(round(box.v_center + box.h / 2)))
        if u0 <= u1 and v0 <= v1:
            out[v0:v1 + 1, u0:u1 + 1] = INVALID_DEPTH
    return out


# -- frames and clouds -----------------------------------------------------------

def base_from_cam_rotation(pitch_offset: float) -> np.ndarray:
    """Rotation taking optical-frame vectors (x right, y down, z forward)
    to the vehicle base frame (x forward, y left, z up), including the
    measured mounting pitch (positive pitches the view down)."""
    cp, sp = math.cos(pitch_offset), math.sin(pitch_offset)
    return np.array([
        [0.0, -sp, cp],
        [-1.0, 0.0, 0.0],
        [0.0, -cp, -sp]])


def depth_to_points(depth: np.ndarray, intr: CameraIntrinsics) -> np.ndarray:
    """Back-project a depth image to camera-frame points, image-ordered
    (H, W, 3); invalid depths become NaN points."""
    depth = np.asarray(depth, dtype=np.float32)
    us = (np.arange(intr.width, dtype=np.float32) - intr.cx) / intr.fx
    vs = (np.arange(intr.height, dtype=np.float32) - intr.cy) / intr.fy
    a, b = np.meshgrid(us, vs)
    return np.stack([a * depth, b * depth, depth], axis=-1)


def cam_points_to_base(points: np.ndarray, intr: CameraIntrinsics,
                       mount: CameraMount) -> np.ndarray:
    """Apply the camera mounting transform (rotation incl. pitch offset,
    then translation) to camera-frame points."""
    rot = base_from_cam_rotation(intr.pitch_offset)
    offset = np.array([mount.forward_m, mount.lateral_m, mount.height_m])
    shape = np.asarray(points).shape
    flat = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return (flat @ rot.T + offset).reshape(shape)


def pack_pointcloud(points: np.ndarray,
                    colors: np.ndarray | None = None) -> bytes:
    """Serialize image-ordered camera-frame points to 20-byte chunks."""
    flat = np.asarray(points, dtype=np.float32).reshape(-1, 3)
    n = flat.shape[0]
    if colors is None:
        rgb = np.zeros((n, 3), dtype=np.uint8)
    else:
        rgb = np.asarray(colors, dtype=np.uint8).reshape(-1, 3)
        if rgb.shape[0] != n:
            raise ValueError("colors must match points")
    out = np.zeros((n, POINT_STEP), dtype=np.uint8)
    out[:, 0:12] = flat.astype("<f4").view(np.uint8).reshape(-1, 12)
    out[:, 12:15] = rgb
    return out.tobytes()


def unpack_pointcloud(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of pack_pointcloud: (points (N, 3) float32, colors (N, 3))."""
    if len(data) % POINT_STEP:
        raise ValueError(f"cloud length {len(data)} is not a multiple "
                         f"of {POINT_STEP}")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, POINT_STEP)
    points = raw[:, 0:12].copy().view("<f4").reshape(-1, 3)
    colors = raw[:, 12:15].copy()
    return points, colors


# -- detection ingest --------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class IngestDetection:
    t: float
    box: Box2D
    track_id: int


def parse_detection_line(line: str) -> IngestDetection:
    parts = line.strip().split(",")
    if len(parts) != 8:
        raise ValueError(f"expected 8 fields t,u,v,w,h,class,conf,track_id; "
                         f"got {len(parts)}: {line!r}")
    t, u, v, w, h = (float(p) for p in parts[:5])
    return IngestDetection(
        t=t,
        box=Box2D(u_center=u, v_center=v, w=w, h=h,
                  class_id=int(parts[5]), confidence=float(parts[6])),
        track_id=int(parts[7]))


def read_detections(path) -> list[IngestDetection]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(parse_detection_line(line))
    return out
