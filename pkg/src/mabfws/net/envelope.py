"""Message envelopes and the length-prefixed wire format."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

MAX_FRAME = 64 * 1024 * 1024
_HEADER = struct.Struct(">I")


class FramingError(ValueError):
    pass


class Kind(str, Enum):
    STATE = "state"
    STATUS = "status"
    TERMINATE = "terminate"
    TRACE_REQ = "trace_req"
    TRACE_REP = "trace_rep"


@dataclass(frozen=True)
class Envelope:
    kind: Kind
    sender: int
    dest: int
    msg_id: tuple[int, int]
    payload: dict[str, Any] = field(default_factory=dict)
    enqueue_us: int = 0
    deliver_us: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "sender": self.sender,
            "dest": self.dest,
            "msg_id": list(self.msg_id),
            "payload": self.payload,
            "enqueue_us": self.enqueue_us,
            "deliver_us": self.deliver_us,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Envelope":
        try:
            env = cls(
                Kind(d["kind"]),
                int(d["sender"]),
                int(d["dest"]),
                (int(d["msg_id"][0]), int(d["msg_id"][1])),
                dict(d["payload"]),
                int(d["enqueue_us"]),
                int(d["deliver_us"]),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FramingError(f"malformed envelope: {exc}") from exc
        if env.deliver_us < env.enqueue_us:
            raise FramingError("deliver time precedes enqueue time")
        return env

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")


def frame(env: Envelope) -> bytes:
    body = env.to_json()
    if len(body) > MAX_FRAME:
        raise FramingError(f"frame of {len(body)} bytes exceeds limit")
    return _HEADER.pack(len(body)) + body


def _decode_body(body: bytes) -> Envelope:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FramingError(f"invalid JSON payload: {exc}") from exc
    if not isinstance(doc, dict):
        raise FramingError("payload is not an object")
    return Envelope.from_dict(doc)


def _check_length(n: int) -> None:
    if n == 0:
        raise FramingError("empty frame")
    if n > MAX_FRAME:
        raise FramingError(f"frame length {n} exceeds limit")


def unframe(data: bytes) -> Envelope:
    """Decode exactly one frame."""
    if len(data) < _HEADER.size:
        raise FramingError("truncated frame header")
    (n,) = _HEADER.unpack_from(data)
    _check_length(n)
    if len(data) - _HEADER.size < n:
        raise FramingError("truncated frame body")
    if len(data) - _HEADER.size > n:
        raise FramingError("trailing bytes after frame")
    return _decode_body(data[_HEADER.size:])


class FrameDecoder:
    """Incremental decoder for a byte stream of frames."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Envelope]:
        self._buf.extend(data)
        out = []
        while len(self._buf) >= _HEADER.size:
            (n,) = _HEADER.unpack_from(self._buf)
            _check_length(n)
            if len(self._buf) - _HEADER.size < n:
                break
            body = bytes(self._buf[_HEADER.size:_HEADER.size + n])
            del self._buf[:_HEADER.size + n]
            out.append(_decode_body(body))
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)
