"""Dynamixel Protocol 2.0 codec, XL-320 control-table driver, and a simulated
servo bus.

Frame layout:
    FF FF FD 00 | id | len_l len_h | instr | stuffed payload | crc_l crc_h

len counts instr + stuffed payload + crc (so payload bytes = len - 3).
For status frames (instr 0x55) the payload starts with the error byte.
CRC-16 poly 0x8005, init 0, no reflection, over everything before the CRC.
Byte stuffing inserts 0xFD after any FF FF FD inside the payload.
"""

from __future__ import annotations

from dataclasses import dataclass

HEADER = bytes([0xFF, 0xFF, 0xFD, 0x00])
BROADCAST_ID = 0xFE
MAX_ID = 0xFC
MAX_PARAMS = 65532

INSTR_PING = 0x01
INSTR_READ = 0x02
INSTR_WRITE = 0x03
INSTR_SYNC_WRITE = 0x83
INSTR_STATUS = 0x55

# status error byte values
ERR_NONE = 0x00
ERR_INSTRUCTION = 0x02
ERR_DATA_RANGE = 0x04
ERR_ACCESS = 0x07

XL320_MODEL_NUMBER = 350
XL320_FIRMWARE = 0


class ProtocolError(Exception):
    pass


class EncodeError(ProtocolError):
    pass


class BadHeader(ProtocolError):
    pass


class LengthMismatch(ProtocolError):
    pass


class CrcMismatch(ProtocolError):
    pass


class TruncatedFrame(ProtocolError):
    """Not enough bytes yet; feeding more input may complete the frame."""


class FramingError(ProtocolError):
    """Malformed byte stuffing."""


class BusTimeout(ProtocolError):
    pass


@dataclass(frozen=True)
class InstructionPacket:
    id: int
    instruction: int
    params: bytes = b""

    def __post_init__(self):
        if not (0 <= self.id <= MAX_ID or self.id == BROADCAST_ID):
            raise ValueError(f"invalid servo id {self.id}")
        if len(self.params) > MAX_PARAMS:
            raise ValueError("params too long")


@dataclass(frozen=True)
class StatusPacket:
    id: int
    error: int
    params: bytes = b""


# ---------------------------------------------------------------------------
# CRC

def _make_crc_table(poly: int = 0x8005) -> list[int]:
    table = []
    for i in range(256):
        crc = i << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return table


_CRC_TABLE = _make_crc_table()


def crc16(data: bytes) -> int:
    """CRC-16 poly 0x8005, init 0x0000, no reflection."""
    crc = 0
    for b in data:
        crc = ((crc << 8) ^ _CRC_TABLE[((crc >> 8) ^ b) & 0xFF]) & 0xFFFF
    return crc


# ---------------------------------------------------------------------------
# Byte stuffing

def stuff(payload: bytes) -> bytes:
    out = bytearray()
    for b in payload:
        out.append(b)
        if b == 0xFD and out[-3:] == b"\xff\xff\xfd":
            out.append(0xFD)
    return bytes(out)


def destuff(data: bytes) -> bytes:
    out = bytearray()
    i = 0
    n = len(data)
    while i < n:
        b = data[i]
        out.append(b)
        i += 1
        if b == 0xFD and bytes(out[-3:]) == b"\xff\xff\xfd":
            if i >= n or data[i] != 0xFD:
                raise FramingError("FF FF FD in payload not followed by stuffing byte")
            i += 1
    return bytes(out)


# ---------------------------------------------------------------------------
# Encode / decode

def _assemble(pkt_id: int, instruction: int, payload: bytes) -> bytes:
    stuffed = stuff(payload)
    length = len(stuffed) + 3
    frame = bytearray(HEADER)
    frame.append(pkt_id)
    frame += length.to_bytes(2, "little")
    frame.append(instruction)
    frame += stuffed
    frame += crc16(bytes(frame)).to_bytes(2, "little")
    return bytes(frame)


def encode_packet(p: InstructionPacket) -> bytes:
    if len(p.params) > MAX_PARAMS:
        raise EncodeError("params too long")
    return _assemble(p.id, p.instruction, p.params)


def encode_status(p: StatusPacket) -> bytes:
    return _assemble(p.id, INSTR_STATUS, bytes([p.error]) + p.params)


def decode_packet(data: bytes) -> InstructionPacket | StatusPacket:
    """Decode one complete frame. The buffer must start at the frame header."""
    pkt, consumed = decode_prefix(data)
    if consumed != len(data):
        raise LengthMismatch(f"{len(data) - consumed} trailing bytes after frame")
    return pkt


def decode_prefix(data: bytes) -> tuple[InstructionPacket | StatusPacket, int]:
    """Decode a frame at the start of `data`; returns (packet, bytes consumed)."""
    if len(data) < 7:
        raise TruncatedFrame("need at least 7 bytes")
    if data[:4] != HEADER:
        raise BadHeader(f"expected FF FF FD 00, got {data[:4].hex()}")
    pkt_id = data[4]
    length = int.from_bytes(data[5:7], "little")
    if length < 3:
        raise LengthMismatch(f"declared length {length} below minimum 3")
    total = 7 + length
    if len(data) < total:
        raise TruncatedFrame(f"need {total} bytes, have {len(data)}")
    wire_crc = int.from_bytes(data[total - 2:total], "little")
    calc = crc16(data[:total - 2])
    if wire_crc != calc:
        raise CrcMismatch(f"crc {wire_crc:#06x} != computed {calc:#06x}")
    instruction = data[7]
    payload = destuff(data[8:total - 2])
    if instruction == INSTR_STATUS:
        if not payload:
            raise LengthMismatch("status frame without error byte")
        return StatusPacket(id=pkt_id, error=payload[0], params=payload[1:]), total
    return InstructionPacket(id=pkt_id, instruction=instruction, params=payload), total


class PacketDecoder:
    """Incremental byte-stream decoder with resynchronization.

    Feed arbitrary chunks; complete packets come out in order. Garbage before
    a frame is skipped; a corrupted candidate frame is abandoned one byte at
    a time so a real frame later in the stream is still found.
    """

    def __init__(self):
        self._buf = bytearray()
        self.dropped_bytes = 0

    def feed(self, data: bytes) -> list[InstructionPacket | StatusPacket]:
        self._buf += data
        out = []
        while True:
            idx = self._buf.find(HEADER)
            if idx < 0:
                # keep a possible partial header tail
                keep = min(3, len(self._buf))
                self.dropped_bytes += len(self._buf) - keep
                del self._buf[:len(self._buf) - keep]
                break
            if idx > 0:
                self.dropped_bytes += idx
                del self._buf[:idx]
            try:
                pkt, consumed = decode_prefix(bytes(self._buf))
            except TruncatedFrame:
                break
            except ProtocolError:
                # false or corrupt header: skip one byte and rescan
                self.dropped_bytes += 1
                del self._buf[:1]
                continue
            out.append(pkt)
            del self._buf[:consumed]
        return out


# ---------------------------------------------------------------------------
# XL-320 control table and unit conversion

@dataclass(frozen=True)
class Register:
    name: str
    address: int
    size: int
    writable: bool


TORQUE_ENABLE = Register("torque_enable", 24, 1, True)
GOAL_POSITION = Register("goal_position", 30, 2, True)
MOVING_SPEED = Register("moving_speed", 32, 2, True)
PRESENT_POSITION = Register("present_position", 37, 2, False)

CONTROL_TABLE = (TORQUE_ENABLE, GOAL_POSITION, MOVING_SPEED, PRESENT_POSITION)
_REGISTER_FILE_SIZE = 64

POSITION_UNITS_MAX = 1023
POSITION_DEG_MAX = 300.0


def deg_to_units(deg: float) -> int:
    """0..300 deg -> 0..1023 position units, round half away from zero."""
    if not 0.0 <= deg <= POSITION_DEG_MAX:
        raise ValueError(f"position {deg} deg outside 0..300")
    x = deg * POSITION_UNITS_MAX / POSITION_DEG_MAX
    return int(x + 0.5)


def units_to_deg(units: int) -> float:
    if not 0 <= units <= POSITION_UNITS_MAX:
        raise ValueError(f"position units {units} outside 0..1023")
    return units * POSITION_DEG_MAX / POSITION_UNITS_MAX


# ---------------------------------------------------------------------------
# Simulated bus

from .plant import ServoModel, ServoState, step_servo  # noqa: E402


class SimServo:
    """Register file plus an attached servo dynamics state."""

    def __init__(self, servo_id: int, model: ServoModel | None = None,
                 initial_deg: float = 150.0, instant: bool = False):
        self.id = servo_id
        self.model = model or ServoModel()
        self.instant = instant
        self.state = ServoState(position_deg=initial_deg, goal_deg=initial_deg)
        self.registers = bytearray(_REGISTER_FILE_SIZE)
        self._writable = bytearray(_REGISTER_FILE_SIZE)
        for reg in CONTROL_TABLE:
            for off in range(reg.size):
                self._writable[reg.address + off] = 1 if reg.writable else 0
        self._set_register(GOAL_POSITION, deg_to_units(initial_deg))
        self._set_register(PRESENT_POSITION, deg_to_units(initial_deg))

    def _set_register(self, reg: Register, value: int) -> None:
        self.registers[reg.address:reg.address + reg.size] = value.to_bytes(reg.size, "little")

    def _get_register(self, reg: Register) -> int:
        return int.from_bytes(self.registers[reg.address:reg.address + reg.size], "little")

    def write(self, address: int, data: bytes) -> int:
        """Apply a register write; returns the status error byte."""
        span = range(address, address + len(data))
        if address < 0 or address + len(data) > _REGISTER_FILE_SIZE:
            return ERR_DATA_RANGE
        if not all(self._writable[a] for a in span):
            return ERR_ACCESS
        self.registers[address:address + len(data)] = data
        if span.start <= GOAL_POSITION.address < span.stop:
            units = self._get_register(GOAL_POSITION)
            if units > POSITION_UNITS_MAX:
                return ERR_DATA_RANGE
            goal_deg = units_to_deg(units)
            if self.instant:
                self.state = ServoState(position_deg=goal_deg, goal_deg=goal_deg)
                self._set_register(PRESENT_POSITION, units)
            else:
                self.state = ServoState(position_deg=self.state.position_deg,
                                        goal_deg=goal_deg)
        return ERR_NONE

    def read(self, address: int, count: int) -> tuple[int, bytes]:
        if address < 0 or count <= 0 or address + count > _REGISTER_FILE_SIZE:
            return ERR_DATA_RANGE, b""
        known = bytearray(_REGISTER_FILE_SIZE)
        for reg in CONTROL_TABLE:
            for off in range(reg.size):
                known[reg.address + off] = 1
        if not all(known[a] for a in range(address, address + count)):
            return ERR_ACCESS, b""
        return ERR_NONE, bytes(self.registers[address:address + count])

    def step(self, dt: float) -> None:
        """Advance servo dynamics and refresh the present-position register."""
        self.state = step_servo(self.model, self.state, dt)
        clamped = min(max(self.state.position_deg, 0.0), POSITION_DEG_MAX)
        self._set_register(PRESENT_POSITION, deg_to_units(clamped))

    @property
    def present_position_units(self) -> int:
        return self._get_register(PRESENT_POSITION)


class SimBus:
    """In-process bus with Protocol 2.0 request/response semantics."""

    def __init__(self, servos: list[SimServo]):
        self.servos: dict[int, SimServo] = {}
        for s in servos:
            if s.id in self.servos:
                raise ValueError(f"duplicate servo id {s.id}")
            self.servos[s.id] = s
        self.dropped_frames = 0

    def step(self, dt: float) -> None:
        for s in self.servos.values():
            s.step(dt)

    def dispatch(self, frame: bytes) -> list[bytes]:
        try:
            pkt = decode_packet(frame)
        except ProtocolError:
            self.dropped_frames += 1
            return []
        if not isinstance(pkt, InstructionPacket):
            self.dropped_frames += 1
            return []
        broadcast = pkt.id == BROADCAST_ID
        targets = (sorted(self.servos) if broadcast
                   else [pkt.id] if pkt.id in self.servos else [])
        responses = []
        for sid in targets:
            servo = self.servos[sid]
            status = self._execute(servo, pkt, broadcast)
            if status is not None:
                responses.append(encode_status(status))
        return responses

    @staticmethod
    def _execute(servo: SimServo, pkt: InstructionPacket, broadcast: bool
                 ) -> StatusPacket | None:
        if pkt.instruction == INSTR_PING:
            params = XL320_MODEL_NUMBER.to_bytes(2, "little") + bytes([XL320_FIRMWARE])
            return StatusPacket(id=servo.id, error=ERR_NONE, params=params)
        if pkt.instruction == INSTR_WRITE:
            if len(pkt.params) < 3:
                err, = (ERR_INSTRUCTION,)
            else:
                addr = int.from_bytes(pkt.params[0:2], "little")
                err = servo.write(addr, pkt.params[2:])
            return None if broadcast else StatusPacket(id=servo.id, error=err)
        if pkt.instruction == INSTR_READ:
            if len(pkt.params) != 4:
                return StatusPacket(id=servo.id, error=ERR_INSTRUCTION)
            addr = int.from_bytes(pkt.params[0:2], "little")
            count = int.from_bytes(pkt.params[2:4], "little")
            err, data = servo.read(addr, count)
            return None if broadcast else StatusPacket(id=servo.id, error=err, params=data)
        if pkt.instruction == INSTR_SYNC_WRITE:
            if len(pkt.params) < 4:
                return None
            addr = int.from_bytes(pkt.params[0:2], "little")
            dlen = int.from_bytes(pkt.params[2:4], "little")
            entries = pkt.params[4:]
            for i in range(0, len(entries) - (len(entries) % (dlen + 1)), dlen + 1):
                if entries[i] == servo.id:
                    servo.write(addr, entries[i + 1:i + 1 + dlen])
            return None  # sync write never elicits status frames
        return None if broadcast else StatusPacket(id=servo.id, error=ERR_INSTRUCTION)


class BusTransport:
    """Abstract frame transport: one talker, ordered whole-frame delivery."""

    def send(self, data: bytes) -> None:
        raise NotImplementedError

    def receive(self, deadline: float | None = None) -> bytes | None:
        """Return the next pending frame, or None if nothing arrives in time."""
        raise NotImplementedError


class LoopbackTransport(BusTransport):
    """Zero-latency transport wrapping a SimBus."""

    def __init__(self, bus: SimBus):
        self.bus = bus
        self._pending: list[bytes] = []

    def send(self, data: bytes) -> None:
        self._pending.extend(self.bus.dispatch(data))

    def receive(self, deadline: float | None = None) -> bytes | None:
        if self._pending:
            return self._pending.pop(0)
        return None


class ServoBusClient:
    """Control-table driver speaking Protocol 2.0 over a transport."""

    def __init__(self, transport: BusTransport, timeout_s: float = 0.05):
        self.transport = transport
        self.timeout_s = timeout_s
        self._decoder = PacketDecoder()

    def _await_status(self, expect_id: int) -> StatusPacket:
        frame = self.transport.receive(self.timeout_s)
        if frame is None:
            raise BusTimeout(f"no status from servo {expect_id}")
        for pkt in self._decoder.feed(frame):
            if isinstance(pkt, StatusPacket) and pkt.id == expect_id:
                return pkt
        raise BusTimeout(f"no status from servo {expect_id}")

    def ping(self, servo_id: int) -> int:
        """Returns the reported model number."""
        self.transport.send(encode_packet(InstructionPacket(servo_id, INSTR_PING)))
        status = self._await_status(servo_id)
        return int.from_bytes(status.params[0:2], "little")

    def write_goal_position(self, servo_id: int, deg: float) -> int:
        """Command a goal position; returns the servo-reported error byte."""
        units = deg_to_units(deg)
        params = GOAL_POSITION.address.to_bytes(2, "little") + units.to_bytes(2, "little")
        self.transport.send(encode_packet(
            InstructionPacket(servo_id, INSTR_WRITE, params)))
        return self._await_status(servo_id).error

    def read_present_position(self, servo_id: int) -> float:
        params = (PRESENT_POSITION.address.to_bytes(2, "little")
                  + PRESENT_POSITION.size.to_bytes(2, "little"))
        self.transport.send(encode_packet(
            InstructionPacket(servo_id, INSTR_READ, params)))
        status = self._await_status(servo_id)
        if status.error:
            raise ProtocolError(f"servo {servo_id} read error {status.error:#04x}")
        return units_to_deg(int.from_bytes(status.params[0:2], "little"))

    def sync_write_goals(self, goals: list[tuple[int, float]]) -> None:
        """One SYNC_WRITE frame carrying every (id, goal deg) pair."""
        ids = [sid for sid, _ in goals]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate servo id in sync write")
        params = bytearray(GOAL_POSITION.address.to_bytes(2, "little"))
        params += GOAL_POSITION.size.to_bytes(2, "little")
        for sid, deg in goals:
            params.append(sid)
            params += deg_to_units(deg).to_bytes(2, "little")
        self.transport.send(encode_packet(
            InstructionPacket(BROADCAST_ID, INSTR_SYNC_WRITE, bytes(params))))
