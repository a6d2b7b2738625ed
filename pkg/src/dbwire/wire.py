"""Binary codec and liveness bookkeeping for the UDP control link.

Packet layout (all multi-byte fields big-endian):

    offset  size  field
    0       2     magic 0x52 0x34
    2       1     version = 1
    3       1     msg_type
    4       2     seq (wrapping u16 counter)
    6       2     payload_len
    8       n     payload (fixed size per message type)
    8+n     2     checksum = byte-sum of all preceding bytes, mod 2^16

Message types and payloads:

    0x01  Heartbeat   (empty)
    0x02  DriveCmd    units: i16              motor driver units
    0x03  SteerCmd    target_mv: u16          actuator feedback target, mV
    0x04  RelayCmd    channel: u8, closed: u8
    0x05  EStop       (empty)
    0x10  Telemetry   steer_mv: u16, motor_units_echo: i16, flags: u8,
                      battery_cv: u16

Telemetry flags: bit0 DMH closed, bit1 brake engaged, bit2 power relay
closed, bit3 fault latched; bits 4-7 reserved, must be zero.

Receivers never reorder: commands are idempotent setpoints and the
heartbeat covers liveness, so lost or late datagrams are simply ignored.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

MAGIC = b"\x52\x34"
VERSION = 1
HEADER_LEN = 8
CHECKSUM_LEN = 2

MSG_HEARTBEAT = 0x01
MSG_DRIVE = 0x02
MSG_STEER = 0x03
MSG_RELAY = 0x04
MSG_ESTOP = 0x05
MSG_TELEMETRY = 0x10

FLAG_DMH_CLOSED = 0x01
FLAG_BRAKE_ENGAGED = 0x02
FLAG_POWER_RELAY_CLOSED = 0x04
FLAG_FAULT_LATCHED = 0x08

MAX_DRIVE_UNITS = 400
NUM_RELAY_CHANNELS = 8

DEFAULT_CMD_PORT = 40004
DEFAULT_TELEMETRY_PORT = 40005

_HEADER = struct.Struct(">2sBBHH")


class WireError(Exception):
    """Base class for codec errors."""


class InvalidMessage(WireError):
    """A message violates its variant invariants and cannot be encoded."""


class DecodeError(WireError):
    """Base class for decode rejections; each subclass is one cause."""


class BadMagic(DecodeError):
    pass


class BadVersion(DecodeError):
    pass


class BadLength(DecodeError):
    pass


class BadChecksum(DecodeError):
    pass


class UnknownType(DecodeError):
    pass


class BadFieldRange(DecodeError):
    pass


class ClockWentBackwards(WireError):
    """now went below the last receive time; the host clock is being misused."""


@dataclass(frozen=True, slots=True)
class Heartbeat:
    pass


@dataclass(frozen=True, slots=True)
class DriveCmd:
    units: int


@dataclass(frozen=True, slots=True)
class SteerCmd:
    target_mv: int


@dataclass(frozen=True, slots=True)
class RelayCmd:
    channel: int
    closed: bool


@dataclass(frozen=True, slots=True)
class EStop:
    pass


@dataclass(frozen=True, slots=True)
class Telemetry:
    steer_mv: int
    motor_units_echo: int
    flags: int
    battery_cv: int

    @property
    def dmh_closed(self) -> bool:
        return bool(self.flags & FLAG_DMH_CLOSED)

    @property
    def brake_engaged(self) -> bool:
        return bool(self.flags & FLAG_BRAKE_ENGAGED)

    @property
    def power_relay_closed(self) -> bool:
        return bool(self.flags & FLAG_POWER_RELAY_CLOSED)

    @property
    def fault_latched(self) -> bool:
        return bool(self.flags & FLAG_FAULT_LATCHED)


WireMessage = Heartbeat | DriveCmd | SteerCmd | RelayCmd | EStop | Telemetry

_PAYLOAD_LEN = {
    MSG_HEARTBEAT: 0,
    MSG_DRIVE: 2,
    MSG_STEER: 2,
    MSG_RELAY: 2,
    MSG_ESTOP: 0,
    MSG_TELEMETRY: 7,
}

_DRIVE_FMT = struct.Struct(">h")
_STEER_FMT = struct.Struct(">H")
_RELAY_FMT = struct.Struct(">BB")
_TELEMETRY_FMT = struct.Struct(">HhBH")


def checksum(data: bytes) -> int:
    """Sum of all byte values, modulo 2^16."""
    return sum(data) & 0xFFFF


def _encode_payload(msg: WireMessage, max_drive_units: int) -> tuple[int, bytes]:
    if isinstance(msg, Heartbeat):
        return MSG_HEARTBEAT, b""
    if isinstance(msg, DriveCmd):
        if abs(msg.units) > max_drive_units:
            raise InvalidMessage(
                f"drive units {msg.units} exceed ±{max_drive_units}")
        return MSG_DRIVE, _DRIVE_FMT.pack(msg.units)
    if isinstance(msg, SteerCmd):
        if not 0 <= msg.target_mv <= 0xFFFF:
            raise InvalidMessage(f"steer target {msg.target_mv} mV out of u16")
        return MSG_STEER, _STEER_FMT.pack(msg.target_mv)
    if isinstance(msg, RelayCmd):
        if not 0 <= msg.channel < NUM_RELAY_CHANNELS:
            raise InvalidMessage(f"relay channel {msg.channel} out of 0..7")
        return MSG_RELAY, _RELAY_FMT.pack(msg.channel, 1 if msg.closed else 0)
    if isinstance(msg, EStop):
        return MSG_ESTOP, b""
    if isinstance(msg, Telemetry):
        if msg.flags & ~0x0F:
            raise InvalidMessage(f"telemetry flags 0x{msg.flags:02x} use reserved bits")
        if not 0 <= msg.steer_mv <= 0xFFFF:
            raise InvalidMessage(f"steer_mv {msg.steer_mv} out of u16")
        if not -0x8000 <= msg.motor_units_echo <= 0x7FFF:
            raise InvalidMessage(f"motor echo {msg.motor_units_echo} out of i16")
        if not 0 <= msg.battery_cv <= 0xFFFF:
            raise InvalidMessage(f"battery_cv {msg.battery_cv} out of u16")
        return MSG_TELEMETRY, _TELEMETRY_FMT.pack(
            msg.steer_mv, msg.motor_units_echo, msg.flags, msg.battery_cv)
    raise InvalidMessage(f"unsupported message {msg!r}")


def encode_packet(msg: WireMessage, seq: int,
                  max_drive_units: int = MAX_DRIVE_UNITS) -> bytes:
    """Frame a message: header + payload + 16-bit byte-sum checksum."""
    msg_type, payload = _encode_payload(msg, max_drive_units)
    header = _HEADER.pack(MAGIC, VERSION, msg_type, seq & 0xFFFF, len(payload))
    body = header + payload
    return body + struct.pack(">H", checksum(body))


def decode_packet(data: bytes,
                  max_drive_units: int = MAX_DRIVE_UNITS) -> tuple[WireMessage, int]:
    """Decode one packet. Total over arbitrary bytes: raises DecodeError, never more.

    Checks run in order: length, magic, version, type, declared length,
    checksum, field ranges — so the first structural problem is the one
    reported.
    """
    if len(data) < HEADER_LEN + CHECKSUM_LEN:
        raise BadLength(f"{len(data)} bytes is shorter than header + checksum")
    magic, version, msg_type, seq, payload_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"magic {magic.hex()} != {MAGIC.hex()}")
    if version != VERSION:
        raise BadVersion(f"version {version} != {VERSION}")
    if msg_type not in _PAYLOAD_LEN:
        raise UnknownType(f"message type 0x{msg_type:02x}")
    if payload_len != _PAYLOAD_LEN[msg_type]:
        raise BadLength(
            f"type 0x{msg_type:02x} declares payload {payload_len}, "
            f"expected {_PAYLOAD_LEN[msg_type]}")
    if len(data) != HEADER_LEN + payload_len + CHECKSUM_LEN:
        raise BadLength(
            f"{len(data)} bytes, expected {HEADER_LEN + payload_len + CHECKSUM_LEN}")
    body = data[:HEADER_LEN + payload_len]
    (stated,) = struct.unpack_from(">H", data, HEADER_LEN + payload_len)
    computed = checksum(body)
    if stated != computed:
        raise BadChecksum(f"stated 0x{stated:04x}, computed 0x{computed:04x}")
    payload = data[HEADER_LEN:HEADER_LEN + payload_len]
    return _decode_payload(msg_type, payload, max_drive_units), seq


def _decode_payload(msg_type: int, payload: bytes,
                    max_drive_units: int) -> WireMessage:
    if msg_type == MSG_HEARTBEAT:
        return Heartbeat()
    if msg_type == MSG_DRIVE:
        (units,) = _DRIVE_FMT.unpack(payload)
        if abs(units) > max_drive_units:
            raise BadFieldRange(f"drive units {units} exceed ±{max_drive_units}")
        return DriveCmd(units)
    if msg_type == MSG_STEER:
        (target_mv,) = _STEER_FMT.unpack(payload)
        return SteerCmd(target_mv)
    if msg_type == MSG_RELAY:
        channel, closed = _RELAY_FMT.unpack(payload)
        if channel >= NUM_RELAY_CHANNELS:
            raise BadFieldRange(f"relay channel {channel} out of 0..7")
        if closed > 1:
            raise BadFieldRange(f"relay closed byte {closed} not 0/1")
        return RelayCmd(channel, bool(closed))
    if msg_type == MSG_ESTOP:
        return EStop()
    if msg_type == MSG_TELEMETRY:
        steer_mv, echo, flags, battery_cv = _TELEMETRY_FMT.unpack(payload)
        if flags & ~0x0F:
            raise BadFieldRange(f"telemetry flags 0x{flags:02x} use reserved bits")
        return Telemetry(steer_mv, echo, flags, battery_cv)
    raise UnknownType(f"message type 0x{msg_type:02x}")  # unreachable


@dataclass(frozen=True, slots=True)
class LivenessTracker:
    """Heartbeat bookkeeping for one direction of the link.

    Owned by a single control loop; hand copies to other threads.
    """

    last_rx_time: float = 0.0
    last_tx_time: float = 0.0
    timeout: float = 0.5

    def age(self, now: float) -> float:
        return now - self.last_rx_time

    def stale(self, now: float) -> bool:
        return self.age(now) > self.timeout


def liveness_update(tracker: LivenessTracker, now: float,
                    rx: bool) -> LivenessTracker:
    """Advance the tracker to `now`, recording a receive event if rx."""
    if now < tracker.last_rx_time:
        raise ClockWentBackwards(
            f"now={now} is before last rx {tracker.last_rx_time}")
    if rx:
        return replace(tracker, last_rx_time=now)
    return tracker


def mark_tx(tracker: LivenessTracker, now: float) -> LivenessTracker:
    return replace(tracker, last_tx_time=now)
