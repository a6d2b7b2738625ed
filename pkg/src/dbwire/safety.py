"""Layered safety interlock.

Every control tick decides whether the traction power relay may be closed
and, by implication, whether the electromagnetic brake is released (the
brake is spring-applied and only releases while current flows, so it can
never be released without motor power).

Two classes of violation:

  * latching — an e-stop or an overcurrent trip moves the machine to
    FAULT_LATCHED, which only a deliberate reset() with all inputs safe
    can leave;
  * non-latching — a released dead man's handle, a stale heartbeat, low
    battery, or (in manual mode) a released enable button drop the machine
    to STANDBY and it re-arms by itself once the inputs clear.

The supervisor is owned by one control loop; decisions are immutable
snapshots safe to fan out to telemetry and the UI.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

LOW_BATTERY_V = 22.0


class Mode(Enum):
    MANUAL = "MANUAL"
    AUTONOMOUS = "AUTONOMOUS"


class SafetyState(Enum):
    INIT = "INIT"
    STANDBY = "STANDBY"
    ACTIVE = "ACTIVE"
    FAULT_LATCHED = "FAULT_LATCHED"


class Reason(Enum):
    ALL_CLEAR = "ALL_CLEAR"
    FAULT_LATCHED = "FAULT_LATCHED"
    ESTOP = "ESTOP"
    OVERCURRENT = "OVERCURRENT"
    DMH_RELEASED = "DMH_RELEASED"
    HEARTBEAT_STALE = "HEARTBEAT_STALE"
    LOW_BATTERY = "LOW_BATTERY"
    ENABLE_NOT_HELD = "ENABLE_NOT_HELD"


class UnsafeReset(RuntimeError):
    """reset() was attempted while an input is still unsafe."""


@dataclass(frozen=True, slots=True)
class SafetyInputs:
    dmh_held: bool            # hardware handle, normally open
    enable_held: bool         # gamepad-level enable (software DMH)
    estop_rx: bool
    heartbeat_stale: bool
    battery_v: float
    overcurrent_trip: bool
    mode: Mode = Mode.MANUAL


@dataclass(frozen=True, slots=True)
class SafetyDecision:
    motor_power: bool
    brake_released: bool
    state: SafetyState
    reason: Reason


def _first_violation(inputs: SafetyInputs, low_batt_v: float) -> Reason | None:
    """Highest-priority unsafe input, or None when everything is clear."""
    if inputs.estop_rx:
        return Reason.ESTOP
    if inputs.overcurrent_trip:
        return Reason.OVERCURRENT
    if not inputs.dmh_held:
        return Reason.DMH_RELEASED
    if inputs.heartbeat_stale:
        return Reason.HEARTBEAT_STALE
    if inputs.battery_v < low_batt_v:
        return Reason.LOW_BATTERY
    if inputs.mode is Mode.MANUAL and not inputs.enable_held:
        return Reason.ENABLE_NOT_HELD
    return None


def tick(state: SafetyState, inputs: SafetyInputs,
         low_batt_v: float = LOW_BATTERY_V) -> SafetyDecision:
    """One interlock evaluation. Total: every input combination decides.

    Motor power requires every condition simultaneously; a single unsafe
    input on any tick removes power on that same tick.
    """
    violation = _first_violation(inputs, low_batt_v)
    latch = state is SafetyState.FAULT_LATCHED or \
        violation in (Reason.ESTOP, Reason.OVERCURRENT)
    if latch:
        reason = violation if violation in (Reason.ESTOP, Reason.OVERCURRENT) \
            else Reason.FAULT_LATCHED
        return SafetyDecision(False, False, SafetyState.FAULT_LATCHED, reason)
    if violation is not None:
        return SafetyDecision(False, False, SafetyState.STANDBY, violation)
    return SafetyDecision(True, True, SafetyState.ACTIVE, Reason.ALL_CLEAR)


def reset(state: SafetyState, inputs: SafetyInputs,
          low_batt_v: float = LOW_BATTERY_V) -> SafetyState:
    """Clear a latched fault, allowed only while every input reads safe.

    The enable button is deliberately not required here: it gates motion,
    not re-arming. No-op outside FAULT_LATCHED.
    """
    if state is not SafetyState.FAULT_LATCHED:
        return state
    violation = _first_violation(inputs, low_batt_v)
    if violation is not None and violation is not Reason.ENABLE_NOT_HELD:
        raise UnsafeReset(f"cannot reset: {violation.value}")
    return SafetyState.STANDBY


class SafetySupervisor:
    """Stateful wrapper for the control loop."""

    def __init__(self, low_batt_v: float = LOW_BATTERY_V):
        self.low_batt_v = low_batt_v
        self.state = SafetyState.INIT
        self.last_decision: SafetyDecision | None = None

    def tick(self, inputs: SafetyInputs) -> SafetyDecision:
        decision = tick(self.state, inputs, self.low_batt_v)
        self.state = decision.state
        self.last_decision = decision
        return decision

    def reset(self, inputs: SafetyInputs) -> SafetyState:
        self.state = reset(self.state, inputs, self.low_batt_v)
        return self.state
