# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _fallback.py. Keep the two in lockstep.

Same binning rule, same libm calls (hypot/atan2/floor), same tie handling:
the fallback is the executable spec, this file is the fast path.
"""

from libc.math cimport atan2, floor, hypot, isfinite, isnan, INFINITY, NAN

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def scan_accumulate(x, y, z, double floor_z_max, double angle_min,
                    double angle_increment, int nbins,
                    double range_min, double range_max):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = \
        np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] za = \
        np.ascontiguousarray(z, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ranges = \
        np.full(nbins, np.inf, dtype=np.float64)
    cdef Py_ssize_t i, n = xa.shape[0]
    cdef double px, py, pz, r, ang
    cdef long idx
    for i in range(n):
        px = xa[i]; py = ya[i]; pz = za[i]
        if not (isfinite(px) and isfinite(py) and isfinite(pz)):
            continue
        if pz <= floor_z_max:
            continue
        r = hypot(px, py)
        if r < range_min or r > range_max:
            continue
        ang = atan2(py, px)
        idx = <long>floor((ang - angle_min) / angle_increment + 0.5)
        if idx < 0 or idx >= nbins:
            continue
        if r < ranges[idx]:
            ranges[idx] = r
    return ranges


def render_depth(origin, rot, double fx, double fy, double cx, double cy,
                 int width, int height, boxes, double ground_z,
                 double range_min, double range_max):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] o = \
        np.ascontiguousarray(origin, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r = \
        np.ascontiguousarray(rot, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bx = \
        np.ascontiguousarray(boxes, dtype=np.float64).reshape(-1, 6)
    cdef cnp.ndarray[cnp.float32_t, ndim=2] depth = \
        np.empty((height, width), dtype=np.float32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels = \
        np.empty((height, width), dtype=np.int32)
    cdef Py_ssize_t nboxes = bx.shape[0]
    cdef int row, col
    cdef Py_ssize_t i, k
    cdef double a, b, dx, dy, dz, best, near, far, t1, t2, lo, hi, d, t
    cdef int best_label
    cdef bint has_ground = not isnan(ground_z)

    for row in range(height):
        b = (row - cy) / fy
        for col in range(width):
            a = (col - cx) / fx
            # world direction of the ray through this pixel; camera-frame z
            # component is 1 so ray parameter == camera-frame depth
            dx = r[0, 0] * a + r[0, 1] * b + r[0, 2]
            dy = r[1, 0] * a + r[1, 1] * b + r[1, 2]
            dz = r[2, 0] * a + r[2, 1] * b + r[2, 2]
            best = INFINITY
            best_label = -1
            for i in range(nboxes):
                near = -INFINITY
                far = INFINITY
                for k in range(3):
                    d = dx if k == 0 else (dy if k == 1 else dz)
                    if d == 0.0:
                        if o[k] < bx[i, k] or o[k] > bx[i, k + 3]:
                            near = INFINITY
                            far = -INFINITY
                            break
                        continue
                    t1 = (bx[i, k] - o[k]) / d
                    t2 = (bx[i, k + 3] - o[k]) / d
                    if t1 <= t2:
                        lo = t1; hi = t2
                    else:
                        lo = t2; hi = t1
                    if lo > near:
                        near = lo
                    if hi < far:
                        far = hi
                if near <= far and near > 0.0 and near < best:
                    best = near
                    best_label = <int>i
            if has_ground and dz < 0.0:
                t = (ground_z - o[2]) / dz
                if t > 0.0 and t < best:
                    best = t
                    best_label = <int>nboxes
            if isfinite(best) and range_min <= best <= range_max:
                depth[row, col] = <float>best
                labels[row, col] = best_label
            else:
                depth[row, col] = NAN
                labels[row, col] = -1
    return np.asarray(depth), np.asarray(labels)
