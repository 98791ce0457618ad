"""Binary wire protocol for commanding the sonar and streaming scan lines.

Frame layout, all multi-byte fields little-endian:

    magic       2 bytes   0x50 0x33 ("P3")
    version     1 byte    0x01
    msg_id      u16
    payload_len u16
    payload     payload_len bytes
    checksum    u16       sum of all preceding frame bytes, mod 65536

The streaming decoder accepts arbitrary chunking and resynchronizes on the
magic bytes after garbage or a failed checksum.
"""

import struct
from dataclasses import dataclass
from typing import Iterable, Union

__all__ = [
    "MAGIC",
    "VERSION",
    "TICK_SECONDS",
    "ScanRequest",
    "ScanLineData",
    "DeviceInfo",
    "ErrorReply",
    "Message",
    "EncodeError",
    "DecodeEvent",
    "ChecksumMismatch",
    "UnknownMsgId",
    "PayloadTooLarge",
    "MalformedPayload",
    "MalformedPayloadError",
    "checksum",
    "encode",
    "StreamDecoder",
    "decode_stream",
    "period_to_ticks",
    "ticks_to_period",
]

MAGIC = b"\x50\x33"
VERSION = 0x01
HEADER = struct.Struct("<2sBHH")   # magic, version, msg_id, payload_len
CHECKSUM = struct.Struct("<H")
MAX_PAYLOAD = 65535

MSG_DEVICE_INFO = 0x0001
MSG_SCAN_REQUEST = 0x0010
MSG_SCAN_LINE_DATA = 0x0011
MSG_ERROR_REPLY = 0x00FF

TICK_SECONDS = 25e-9   # hardware sample-period granularity


class EncodeError(ValueError):
    """Message violates its invariants and cannot be framed."""


@dataclass(frozen=True)
class ScanRequest:
    sector_start_grad: int
    sector_end_grad: int
    angular_step_grad: int
    sample_count: int
    sample_period_ticks: int
    gain: int

    _STRUCT = struct.Struct("<hhBHHB")

    def validate(self) -> None:
        if not -32768 <= self.sector_start_grad <= 32767:
            raise EncodeError("sector_start_grad out of int16 range")
        if not -32768 <= self.sector_end_grad <= 32767:
            raise EncodeError("sector_end_grad out of int16 range")
        if not 1 <= self.angular_step_grad <= 255:
            raise EncodeError("angular_step_grad must be in [1, 255]")
        if not 0 <= self.sample_count <= 65535:
            raise EncodeError("sample_count out of u16 range")
        if not 0 <= self.sample_period_ticks <= 65535:
            raise EncodeError("sample_period_ticks out of u16 range")
        if self.gain not in (0, 1, 2):
            raise EncodeError(f"gain must be 0, 1 or 2, got {self.gain}")

    def payload(self) -> bytes:
        return self._STRUCT.pack(
            self.sector_start_grad, self.sector_end_grad,
            self.angular_step_grad, self.sample_count,
            self.sample_period_ticks, self.gain)

    @classmethod
    def from_payload(cls, payload: bytes) -> "ScanRequest":
        if len(payload) != cls._STRUCT.size:
            raise MalformedPayloadError(MSG_SCAN_REQUEST,
                                   f"expected 10 bytes, got {len(payload)}")
        msg = cls(*cls._STRUCT.unpack(payload))
        try:
            msg.validate()
        except EncodeError as exc:
            raise MalformedPayloadError(MSG_SCAN_REQUEST, str(exc)) from None
        return msg


@dataclass(frozen=True)
class ScanLineData:
    angle_grad: int
    gain: int
    intensities: bytes

    _HEAD = struct.Struct("<hBH")

    def validate(self) -> None:
        if not -32768 <= self.angle_grad <= 32767:
            raise EncodeError("angle_grad out of int16 range")
        if self.gain not in (0, 1, 2):
            raise EncodeError(f"gain must be 0, 1 or 2, got {self.gain}")
        if len(self.intensities) > 65535:
            raise EncodeError("too many intensity samples for one frame")

    @property
    def sample_count(self) -> int:
        return len(self.intensities)

    def payload(self) -> bytes:
        return self._HEAD.pack(self.angle_grad, self.gain,
                               len(self.intensities)) + bytes(self.intensities)

    @classmethod
    def from_payload(cls, payload: bytes) -> "ScanLineData":
        if len(payload) < cls._HEAD.size:
            raise MalformedPayloadError(MSG_SCAN_LINE_DATA, "payload shorter than head")
        angle, gain, count = cls._HEAD.unpack_from(payload)
        if len(payload) != cls._HEAD.size + count:
            raise MalformedPayloadError(
                MSG_SCAN_LINE_DATA,
                f"declared {count} samples but payload holds "
                f"{len(payload) - cls._HEAD.size}")
        msg = cls(angle, gain, payload[cls._HEAD.size:])
        try:
            msg.validate()
        except EncodeError as exc:
            raise MalformedPayloadError(MSG_SCAN_LINE_DATA, str(exc)) from None
        return msg


@dataclass(frozen=True)
class DeviceInfo:
    firmware_major: int
    firmware_minor: int

    _STRUCT = struct.Struct("<BB")

    def validate(self) -> None:
        if not (0 <= self.firmware_major <= 255 and 0 <= self.firmware_minor <= 255):
            raise EncodeError("firmware version bytes out of range")

    def payload(self) -> bytes:
        return self._STRUCT.pack(self.firmware_major, self.firmware_minor)

    @classmethod
    def from_payload(cls, payload: bytes) -> "DeviceInfo":
        if len(payload) != cls._STRUCT.size:
            raise MalformedPayloadError(MSG_DEVICE_INFO,
                                   f"expected 2 bytes, got {len(payload)}")
        return cls(*cls._STRUCT.unpack(payload))


@dataclass(frozen=True)
class ErrorReply:
    code: int
    detail: str = ""

    def validate(self) -> None:
        if not 0 <= self.code <= 255:
            raise EncodeError("error code out of u8 range")
        if 1 + len(self.detail.encode("utf-8")) > MAX_PAYLOAD:
            raise EncodeError("error detail too long")

    def payload(self) -> bytes:
        return bytes([self.code]) + self.detail.encode("utf-8")

    @classmethod
    def from_payload(cls, payload: bytes) -> "ErrorReply":
        if len(payload) < 1:
            raise MalformedPayloadError(MSG_ERROR_REPLY, "empty payload")
        try:
            detail = payload[1:].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedPayloadError(MSG_ERROR_REPLY, f"detail not UTF-8: {exc}")
        return cls(payload[0], detail)


Message = Union[ScanRequest, ScanLineData, DeviceInfo, ErrorReply]

_MSG_IDS = {
    ScanRequest: MSG_SCAN_REQUEST,
    ScanLineData: MSG_SCAN_LINE_DATA,
    DeviceInfo: MSG_DEVICE_INFO,
    ErrorReply: MSG_ERROR_REPLY,
}
_PARSERS = {
    MSG_SCAN_REQUEST: ScanRequest.from_payload,
    MSG_SCAN_LINE_DATA: ScanLineData.from_payload,
    MSG_DEVICE_INFO: DeviceInfo.from_payload,
    MSG_ERROR_REPLY: ErrorReply.from_payload,
}


@dataclass(frozen=True)
class DecodeEvent:
    """Non-message outcome of the stream decoder; the stream continues."""

    reason: str = ""


@dataclass(frozen=True)
class ChecksumMismatch(DecodeEvent):
    expected: int = 0
    actual: int = 0


@dataclass(frozen=True)
class UnknownMsgId(DecodeEvent):
    msg_id: int = 0


@dataclass(frozen=True)
class PayloadTooLarge(DecodeEvent):
    declared: int = 0


@dataclass(frozen=True)
class MalformedPayload(DecodeEvent):
    """Known msg_id whose payload does not parse."""

    msg_id: int = 0


class MalformedPayloadError(ValueError):
    """Raised by the per-message payload parsers on direct use."""

    def __init__(self, msg_id: int, reason: str):
        super().__init__(reason)
        self.msg_id = msg_id
        self.reason = reason

    def as_event(self) -> MalformedPayload:
        return MalformedPayload(reason=self.reason, msg_id=self.msg_id)


def checksum(data: bytes) -> int:
    """Byte sum of ``data`` modulo 65536."""
    return sum(data) & 0xFFFF


def encode(msg: Message) -> bytes:
    """Frame one message; total length is 9 + payload length."""
    try:
        msg_id = _MSG_IDS[type(msg)]
    except KeyError:
        raise EncodeError(f"not a protocol message: {type(msg).__name__}")
    msg.validate()
    payload = msg.payload()
    if len(payload) > MAX_PAYLOAD:
        raise EncodeError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    head = HEADER.pack(MAGIC, VERSION, msg_id, len(payload))
    body = head + payload
    return body + CHECKSUM.pack(checksum(body))


class StreamDecoder:
    """Incremental frame decoder for byte-at-a-time network input.

    Feed arbitrary chunks; complete checksum-valid frames come back as
    messages, anything else as :class:`DecodeEvent` records. Garbage before
    a frame is skipped by scanning for the magic bytes. Not thread-safe;
    use one decoder per connection.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self.bytes_skipped = 0

    def feed(self, chunk: bytes) -> list[Union[Message, DecodeEvent]]:
        """Consume a chunk and return everything completed by it."""
        self._buf.extend(chunk)
        out: list[Union[Message, DecodeEvent]] = []
        while True:
            item = self._next()
            if item is None:
                break
            out.append(item)
        return out

    def _next(self) -> Union[Message, DecodeEvent, None]:
        buf = self._buf
        while True:
            # Resync: drop everything before the first magic candidate.
            start = buf.find(MAGIC)
            if start < 0:
                # Keep a possible first magic byte at the tail.
                keep = 1 if buf and buf[-1] == MAGIC[0] else 0
                self.bytes_skipped += len(buf) - keep
                del buf[:len(buf) - keep]
                return None
            if start > 0:
                self.bytes_skipped += start
                del buf[:start]
            if len(buf) < HEADER.size:
                return None
            _, version, msg_id, payload_len = HEADER.unpack_from(buf)
            if version != VERSION:
                # False sync; skip one byte and rescan.
                self.bytes_skipped += 1
                del buf[:1]
                continue
            if payload_len > MAX_PAYLOAD:
                # Unreachable with a u16 length field; guards header changes.
                del buf[:1]
                return PayloadTooLarge(
                    reason=f"declared payload of {payload_len} bytes",
                    declared=payload_len)
            total = HEADER.size + payload_len + CHECKSUM.size
            if len(buf) < total:
                return None
            frame = bytes(buf[:total])
            expected = checksum(frame[:-CHECKSUM.size])
            (actual,) = CHECKSUM.unpack_from(frame, total - CHECKSUM.size)
            if actual != expected:
                # Header may itself be garbage: advance one byte, rescan.
                del buf[:1]
                return ChecksumMismatch(
                    reason=f"checksum 0x{actual:04x} != computed 0x{expected:04x}",
                    expected=expected, actual=actual)
            del buf[:total]
            payload = frame[HEADER.size:-CHECKSUM.size]
            parser = _PARSERS.get(msg_id)
            if parser is None:
                return UnknownMsgId(reason=f"unknown msg_id 0x{msg_id:04x}",
                                    msg_id=msg_id)
            try:
                return parser(payload)
            except MalformedPayloadError as exc:
                return exc.as_event()


def decode_stream(chunks: Iterable[bytes]) -> list[Union[Message, DecodeEvent]]:
    """Decode a finite sequence of byte chunks with a fresh decoder."""
    dec = StreamDecoder()
    out = []
    for chunk in chunks:
        out.extend(dec.feed(chunk))
    return out


def period_to_ticks(sample_period_s: float) -> int:
    """Quantize a real sample period to hardware ticks (round to nearest)."""
    ticks = int(round(sample_period_s / TICK_SECONDS))
    if not 0 <= ticks <= 65535:
        raise EncodeError(f"sample period {sample_period_s} s is {ticks} ticks, "
                          "outside the u16 wire field")
    return ticks


def ticks_to_period(ticks: int) -> float:
    return ticks * TICK_SECONDS
