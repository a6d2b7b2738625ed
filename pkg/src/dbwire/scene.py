"""Synthetic depth scene for the simulated vehicle.

Ray-casts axis-aligned boxes (static obstacles and pedestrian bodies) plus
the ground plane into a depth image from the vehicle-mounted camera, and
labels pedestrian pixels to produce ground-truth 2D detections. This
stands in for the RGB-D sensor + detector pair so the perception pipeline
can be driven and checked at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import render_depth
from .perception import Box2D, CameraIntrinsics, CameraMount, base_from_cam_rotation
from .plant import PlantState

PEDESTRIAN_CLASS_ID = 0
# Pedestrian body extents: across-track width, along-view depth, height.
PED_BODY_W = 0.5
PED_BODY_D = 0.4
PED_BODY_H = 1.7


@dataclass(frozen=True, slots=True)
class ObstacleBox:
    """Axis-aligned box in the world frame (center + full sizes)."""
    x: float
    y: float
    z: float
    sx: float
    sy: float
    sz: float

    def bounds(self) -> tuple[float, float, float, float, float, float]:
        return (self.x - self.sx / 2, self.y - self.sy / 2, self.z - self.sz / 2,
                self.x + self.sx / 2, self.y + self.sy / 2, self.z + self.sz / 2)


@dataclass(frozen=True, slots=True)
class PedestrianTruth:
    """Ground-truth pedestrian body position (world frame, feet at z=0)."""
    ped_id: int
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0

    def body(self) -> ObstacleBox:
        return ObstacleBox(self.x, self.y, PED_BODY_H / 2,
                           PED_BODY_W, PED_BODY_D, PED_BODY_H)


@dataclass(frozen=True, slots=True)
class SceneRender:
    depth: np.ndarray            # (H, W) float32, NaN = no return
    labels: np.ndarray           # (H, W) int32 object index, -1 = none
    detections: list[Box2D]      # ground-truth pedestrian boxes
    ped_ids: list[int]           # pedestrian id per detection, same order


def camera_pose(state: PlantState, mount: CameraMount,
                intr: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """World-frame camera origin and world-from-camera rotation."""
    c, s = math.cos(state.theta), math.sin(state.theta)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    origin = np.array([state.x, state.y, 0.0]) + rz @ np.array(
        [mount.forward_m, mount.lateral_m, mount.height_m])
    rot = rz @ base_from_cam_rotation(intr.pitch_offset)
    return origin, rot


def synth_scene(state: PlantState, obstacles: list[ObstacleBox],
                pedestrians: list[PedestrianTruth], intr: CameraIntrinsics,
                mount: CameraMount, render_ground: bool = True,
                depth_noise_sigma: float = 0.0,
                rng: np.random.Generator | None = None) -> SceneRender:
    """Render the scene as the depth camera would see it.

    Optional multiplicative depth noise (sigma as a fraction of range) is
    applied after labeling, so ground-truth boxes stay exact while the
    measured depths carry sensor-like error.
    """
    origin, rot = camera_pose(state, mount, intr)
    bounds = [o.bounds() for o in obstacles] + \
             [p.body().bounds() for p in pedestrians]
    boxes = np.array(bounds, dtype=np.float64).reshape(-1, 6)
    ground = 0.0 if render_ground else math.nan
    depth, labels = render_depth(
        origin, rot, intr.fx, intr.fy, intr.cx, intr.cy,
        intr.width, intr.height, boxes, ground,
        intr.range_min, intr.range_max)

    detections: list[Box2D] = []
    ped_ids: list[int] = []
    for k, ped in enumerate(pedestrians):
        mask = labels == len(obstacles) + k
        if int(mask.sum()) < 4:
            continue
        rows, cols = np.nonzero(mask)
        u0, u1 = int(cols.min()), int(cols.max())
        v0, v1 = int(rows.min()), int(rows.max())
        detections.append(Box2D(
            u_center=(u0 + u1) / 2.0, v_center=(v0 + v1) / 2.0,
            w=float(u1 - u0 + 1), h=float(v1 - v0 + 1),
            class_id=PEDESTRIAN_CLASS_ID, confidence=1.0))
        ped_ids.append(ped.ped_id)

    if depth_noise_sigma > 0.0:
        if rng is None:
            raise ValueError("depth noise requires an explicit rng")
        noise = rng.normal(1.0, depth_noise_sigma, size=depth.shape)
        depth = (depth * noise.astype(np.float32))

    return SceneRender(depth=depth, labels=labels,
                       detections=detections, ped_ids=ped_ids)
