"""Datagram transports between the gateway and the control board.

Two interchangeable flavors: real UDP sockets for hardware, and an
in-process loopback pair for the simulator. The loopback preserves
datagram framing and can be severed to model link loss, while keeping
scenario runs fully deterministic.
"""

from __future__ import annotations

import socket
from collections import deque


class LoopbackLink:
    """One endpoint of an in-process datagram pair."""

    def __init__(self):
        self._inbox: deque[bytes] = deque()
        self._peer: LoopbackLink | None = None
        self._down = [False]  # shared with the peer after pairing

    def send(self, data: bytes) -> None:
        if self._peer is not None and not self._down[0]:
            self._peer._inbox.append(bytes(data))

    def recv_all(self) -> list[bytes]:
        out = list(self._inbox)
        self._inbox.clear()
        return out

    def sever(self) -> None:
        """Drop all traffic in both directions until restore()."""
        self._down[0] = True

    def restore(self) -> None:
        self._down[0] = False

    @property
    def down(self) -> bool:
        return self._down[0]


def loopback_pair() -> tuple[LoopbackLink, LoopbackLink]:
    a, b = LoopbackLink(), LoopbackLink()
    a._peer, b._peer = b, a
    b._down = a._down
    return a, b


class UdpLink:
    """Non-blocking UDP endpoint: bind one port, send to a fixed peer."""

    MAX_DATAGRAM = 2048

    def __init__(self, local_port: int, remote_host: str, remote_port: int,
                 bind_host: str = "0.0.0.0"):
        self.remote = (remote_host, remote_port)
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((bind_host, local_port))
        self.sock.setblocking(False)

    def send(self, data: bytes) -> None:
        try:
            self.sock.sendto(data, self.remote)
        except OSError:
            pass  # transient network errors are covered by the heartbeat

    def recv_all(self) -> list[bytes]:
        out = []
        while True:
            try:
                data, _ = self.sock.recvfrom(self.MAX_DATAGRAM)
            except BlockingIOError:
                return out
            except OSError:
                return out
            out.append(data)

    def close(self) -> None:
        self.sock.close()
