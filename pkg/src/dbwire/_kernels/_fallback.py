"""Pure-Python (numpy) implementations of the hot kernels.

Semantics must stay bit-identical to the compiled twin in _native.pyx:
same binning rule, same libm elementary functions, same tie handling.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def scan_accumulate(x: np.ndarray, y: np.ndarray, z: np.ndarray,
                    floor_z_max: float, angle_min: float,
                    angle_increment: float, nbins: int,
                    range_min: float, range_max: float) -> np.ndarray:
    """Bin points by bearing, keeping the nearest planar range per bin.

    Points at or below floor_z_max are floor contacts and are dropped, as
    are non-finite points and ranges outside [range_min, range_max]. Bin
    k covers bearings nearest angle_min + k*angle_increment. Empty bins
    read +inf.
    """
    ranges = np.full(nbins, np.inf, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    keep = np.isfinite(x) & np.isfinite(y) & np.isfinite(z) & (z > floor_z_max)
    if not keep.any():
        return ranges
    x, y = x[keep], y[keep]
    r = np.hypot(x, y)
    ang = np.arctan2(y, x)
    idx = np.floor((ang - angle_min) / angle_increment + 0.5)
    ok = (r >= range_min) & (r <= range_max) & (idx >= 0) & (idx < nbins)
    if not ok.any():
        return ranges
    np.minimum.at(ranges, idx[ok].astype(np.int64), r[ok])
    return ranges


def render_depth(origin: np.ndarray, rot: np.ndarray, fx: float, fy: float,
                 cx: float, cy: float, width: int, height: int,
                 boxes: np.ndarray, ground_z: float,
                 range_min: float, range_max: float
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Ray-cast axis-aligned boxes (plus an optional ground plane) into a
    depth image.

    origin: camera position, world frame. rot: world-from-camera rotation.
    boxes: (N, 6) [xmin ymin zmin xmax ymax zmax]. ground_z: plane height,
    NaN to disable. Returns (depth, labels): depth is the camera-frame Z of
    the nearest hit (NaN where no return inside [range_min, range_max]);
    labels holds the box index, N for the ground plane, -1 for no return.
    """
    origin = np.asarray(origin, dtype=np.float64)
    rot = np.asarray(rot, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 6)

    u = (np.arange(width, dtype=np.float64) - cx) / fx
    v = (np.arange(height, dtype=np.float64) - cy) / fy
    a, b = np.meshgrid(u, v)  # (H, W)
    # Direction with camera-frame z component 1, so the ray parameter of a
    # hit equals its camera-frame depth.
    dirs = (np.stack([a, b, np.ones_like(a)], axis=-1) @ rot.T)

    best = np.full((height, width), np.inf, dtype=np.float64)
    labels = np.full((height, width), -1, dtype=np.int32)

    with np.errstate(divide="ignore", invalid="ignore"):
        for i, box in enumerate(boxes):
            t1 = (box[:3] - origin) / dirs
            t2 = (box[3:] - origin) / dirs
            near = np.fmax.reduce(np.fmin(t1, t2), axis=-1)
            far = np.fmin.reduce(np.fmax(t1, t2), axis=-1)
            hit = (near <= far) & (near > 0.0) & (near < best)
            best[hit] = near[hit]
            labels[hit] = i
        if not math.isnan(ground_z):
            dz = dirs[..., 2]
            t = (ground_z - origin[2]) / dz
            hit = (dz < 0.0) & (t > 0.0) & (t < best)
            best[hit] = t[hit]
            labels[hit] = len(boxes)

    valid = np.isfinite(best) & (best >= range_min) & (best <= range_max)
    depth = np.where(valid, best, np.nan).astype(np.float32)
    labels[~valid] = -1
    return depth, labels
