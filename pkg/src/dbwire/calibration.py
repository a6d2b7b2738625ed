"""Steering calibration: linear fit between wheel angle and actuator voltage.

The linkage is close to linear but the actuator is not mounted exactly on
the track centerline, so left/right readings are slightly asymmetric. A
single global least-squares line absorbs this; the residual is reported so
the asymmetry stays visible. A two-segment fit is a known extension point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

V_REF_DEFAULT = 5.0


class CalibrationError(ValueError):
    pass


class InsufficientData(CalibrationError):
    """Fewer than two samples."""


class DegenerateFit(CalibrationError):
    """All samples share one angle; the line is vertical."""


class NoCalibration(CalibrationError):
    """An operation needed a fitted map and none was provided."""


@dataclass(frozen=True, slots=True)
class CalibSample:
    delta: float    # measured virtual wheel angle, rad
    voltage: float  # actuator feedback, V

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.voltage)):
            raise ValueError("non-finite calibration sample")


@dataclass(frozen=True, slots=True)
class CalibrationMap:
    slope: float         # V per rad
    intercept: float     # V at zero angle
    rms_residual: float  # V
    v_min: float         # lowest voltage seen in the data (mechanical stop)
    v_max: float

    def __post_init__(self):
        if self.slope == 0.0:
            raise ValueError("zero slope")
        if not self.v_min < self.v_max:
            raise ValueError("v_min must be below v_max")


def fit_linear(samples: list[CalibSample]) -> CalibrationMap:
    """Ordinary least squares of voltage on angle."""
    if len(samples) < 2:
        raise InsufficientData(f"{len(samples)} samples, need at least 2")
    deltas = [s.delta for s in samples]
    volts = [s.voltage for s in samples]
    if len(set(deltas)) < 2:
        raise DegenerateFit("all samples share one angle")
    n = len(samples)
    mean_d = sum(deltas) / n
    mean_v = sum(volts) / n
    sxx = sum((d - mean_d) ** 2 for d in deltas)
    sxy = sum((d - mean_d) * (v - mean_v) for d, v in zip(deltas, volts))
    slope = sxy / sxx
    intercept = mean_v - slope * mean_d
    rms = math.sqrt(sum((v - (slope * d + intercept)) ** 2
                        for d, v in zip(deltas, volts)) / n)
    return CalibrationMap(slope=slope, intercept=intercept, rms_residual=rms,
                          v_min=min(volts), v_max=max(volts))


def angle_to_voltage(cal: CalibrationMap, delta: float) -> float:
    """Target feedback voltage for an angle, clamped at the mechanical stops."""
    v = cal.slope * delta + cal.intercept
    return max(cal.v_min, min(cal.v_max, v))


def voltage_to_angle(cal: CalibrationMap, voltage: float) -> float:
    return (voltage - cal.intercept) / cal.slope


# -- persistence -------------------------------------------------------------

_FIELDS = ("slope", "intercept", "rms_residual", "v_min", "v_max")


def save_map(cal: CalibrationMap, path: str | Path) -> None:
    """Write the fitted map as a flat key=value file."""
    lines = [f"{name} = {getattr(cal, name)!r}" for name in _FIELDS]
    Path(path).write_text("\n".join(lines) + "\n")


def load_map(path: str | Path) -> CalibrationMap:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CalibrationError(f"{path}:{lineno}: expected key = value")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise CalibrationError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = float(text.strip())
    missing = [f for f in _FIELDS if f not in values]
    if missing:
        raise CalibrationError(f"{path}: missing keys {missing}")
    return CalibrationMap(**values)


def read_samples_csv(path: str | Path) -> list[CalibSample]:
    """Read measurement samples from CSV with columns delta_rad,voltage_v."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                not {"delta_rad", "voltage_v"} <= set(reader.fieldnames):
            raise CalibrationError(
                f"{path}: expected CSV header delta_rad,voltage_v")
        for row in reader:
            samples.append(CalibSample(float(row["delta_rad"]),
                                       float(row["voltage_v"])))
    return samples
