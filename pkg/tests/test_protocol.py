import pytest
from hypothesis import given, settings, strategies as st

from roboeye import protocol as pr
from roboeye.rng import SplitMix64


def crc16_bitwise(data: bytes) -> int:
    """Independent bit-by-bit oracle: poly 0x8005, init 0, no reflection."""
    crc = 0
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x8005) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    return crc


GOLDEN_PING = bytes.fromhex("fffffd0001030001194e")


class TestCrc:
    def test_empty(self):
        assert pr.crc16(b"") == 0x0000

    def test_golden_ping_prefix(self):
        assert pr.crc16(GOLDEN_PING[:-2]) == 0x4E19

    def test_deterministic(self):
        data = b"\x12\x34\x56"
        assert pr.crc16(data) == pr.crc16(data)

    def test_table_matches_bitwise_oracle(self):
        rng = SplitMix64(42)
        for _ in range(10_000):
            n = rng.next_u64() % 1025
            data = bytes(rng.next_u64() & 0xFF for _ in range(n))
            assert pr.crc16(data) == crc16_bitwise(data)


class TestStuffing:
    def test_no_pattern(self):
        assert pr.stuff(b"\x01\x02\x03") == b"\x01\x02\x03"

    def test_rule(self):
        assert pr.stuff(b"\xff\xff\xfd\x04") == b"\xff\xff\xfd\xfd\x04"

    def test_destuff_inverse(self):
        assert pr.destuff(b"\xff\xff\xfd\xfd") == b"\xff\xff\xfd"

    def test_destuff_malformed(self):
        with pytest.raises(pr.FramingError):
            pr.destuff(b"\xff\xff\xfd\x04")

    @given(st.binary(max_size=64))
    def test_round_trip(self, payload):
        assert pr.destuff(pr.stuff(payload)) == payload

    @given(st.binary(max_size=64))
    def test_no_header_in_stuffed(self, payload):
        assert b"\xff\xff\xfd" not in pr.stuff(payload).replace(b"\xff\xff\xfd\xfd", b"")


class TestCodec:
    def test_encode_ping_golden(self):
        frame = pr.encode_packet(pr.InstructionPacket(1, pr.INSTR_PING))
        assert frame == GOLDEN_PING

    def test_decode_ping_golden(self):
        pkt = pr.decode_packet(GOLDEN_PING)
        assert pkt == pr.InstructionPacket(id=1, instruction=pr.INSTR_PING)

    def test_write_frame_layout(self):
        params = bytes([0x1E, 0x00, 0x00, 0x02])  # addr 30, value 512
        frame = pr.encode_packet(pr.InstructionPacket(1, pr.INSTR_WRITE, params))
        assert frame[:4] == b"\xff\xff\xfd\x00"
        assert frame[4] == 1
        assert frame[5:7] == bytes([0x07, 0x00])  # 4 params + 3
        assert frame[7] == pr.INSTR_WRITE
        assert int.from_bytes(frame[-2:], "little") == crc16_bitwise(frame[:-2])

    def test_crc_corruption_detected(self):
        bad = GOLDEN_PING[:-1] + bytes([GOLDEN_PING[-1] ^ 0xFF])
        with pytest.raises(pr.CrcMismatch):
            pr.decode_packet(bad)

    def test_bad_header(self):
        with pytest.raises(pr.BadHeader):
            pr.decode_packet(b"\xfe\xff\xfd\x00" + GOLDEN_PING[4:])

    def test_truncated(self):
        with pytest.raises(pr.TruncatedFrame):
            pr.decode_packet(GOLDEN_PING[:6])

    def test_status_round_trip(self):
        status = pr.StatusPacket(id=3, error=0x04, params=b"\x10\x20")
        assert pr.decode_packet(pr.encode_status(status)) == status

    @settings(max_examples=200)
    @given(pkt_id=st.integers(0, 252),
           instr=st.sampled_from([pr.INSTR_PING, pr.INSTR_READ, pr.INSTR_WRITE,
                                  pr.INSTR_SYNC_WRITE]),
           prefix=st.binary(max_size=16), suffix=st.binary(max_size=16))
    def test_round_trip_with_header_pattern(self, pkt_id, instr, prefix, suffix):
        # params deliberately contain the header pattern to exercise stuffing
        pkt = pr.InstructionPacket(pkt_id, instr,
                                   prefix + b"\xff\xff\xfd" + suffix)
        assert pr.decode_packet(pr.encode_packet(pkt)) == pkt

    def test_round_trip_1000_randomized(self):
        rng = SplitMix64(7)
        for _ in range(1000):
            pkt_id = rng.next_u64() % 253
            n = rng.next_u64() % 32
            params = bytearray(rng.next_u64() & 0xFF for _ in range(n))
            # seed the header pattern into the payload
            if n >= 3:
                params[:3] = b"\xff\xff\xfd"
            pkt = pr.InstructionPacket(int(pkt_id), pr.INSTR_WRITE, bytes(params))
            assert pr.decode_packet(pr.encode_packet(pkt)) == pkt


class TestStreamDecoder:
    def test_resync_after_garbage(self):
        garbage = bytes(range(1, 17))  # 16 bytes, no header pattern
        dec = pr.PacketDecoder()
        pkts = dec.feed(garbage + GOLDEN_PING)
        assert pkts == [pr.InstructionPacket(id=1, instruction=pr.INSTR_PING)]

    def test_resync_after_corrupt_frame(self):
        corrupt = GOLDEN_PING[:-1] + b"\x00"
        dec = pr.PacketDecoder()
        assert dec.feed(corrupt + GOLDEN_PING) == [
            pr.InstructionPacket(id=1, instruction=pr.INSTR_PING)]

    def test_incremental_feed(self):
        dec = pr.PacketDecoder()
        assert dec.feed(GOLDEN_PING[:5]) == []
        assert dec.feed(GOLDEN_PING[5:]) == [
            pr.InstructionPacket(id=1, instruction=pr.INSTR_PING)]

    def test_multiple_frames_one_chunk(self):
        frame2 = pr.encode_packet(pr.InstructionPacket(2, pr.INSTR_PING))
        assert len(pr.PacketDecoder().feed(GOLDEN_PING + frame2)) == 2


class TestUnits:
    def test_endpoints(self):
        assert pr.deg_to_units(0.0) == 0
        assert pr.deg_to_units(300.0) == 1023
        assert pr.units_to_deg(0) == 0.0

    def test_rounding(self):
        assert pr.deg_to_units(37.5) == 128  # 127.875 rounds up

    def test_units_to_deg(self):
        assert pr.units_to_deg(512) == pytest.approx(150.147, abs=1e-3)

    def test_range_errors(self):
        with pytest.raises(ValueError):
            pr.deg_to_units(-1.0)
        with pytest.raises(ValueError):
            pr.units_to_deg(1024)

    @given(st.floats(0, 300))
    def test_quantization_bound(self, deg):
        back = pr.units_to_deg(pr.deg_to_units(deg))
        assert abs(back - deg) <= 300 / 1023 / 2 + 1e-12


class TestSimBus:
    def make_bus(self, instant=True):
        servos = [pr.SimServo(1, instant=instant), pr.SimServo(2, instant=instant)]
        bus = pr.SimBus(servos)
        return bus, pr.ServoBusClient(pr.LoopbackTransport(bus))

    def test_ping(self):
        _, client = self.make_bus()
        assert client.ping(1) == pr.XL320_MODEL_NUMBER

    def test_broadcast_ping_in_id_order(self):
        bus, _ = self.make_bus()
        frames = bus.dispatch(pr.encode_packet(
            pr.InstructionPacket(pr.BROADCAST_ID, pr.INSTR_PING)))
        ids = [pr.decode_packet(f).id for f in frames]
        assert ids == [1, 2]

    def test_write_and_read_goal(self):
        bus, client = self.make_bus()
        assert client.write_goal_position(1, 150.147) == pr.ERR_NONE
        servo = bus.servos[1]
        assert int.from_bytes(servo.registers[30:32], "little") == 512

    def test_read_after_write_quantization(self):
        _, client = self.make_bus()
        client.write_goal_position(1, 150.147)
        assert abs(client.read_present_position(1) - 150.147) <= 300 / 1023 / 2 + 1e-9

    def test_write_absent_id_times_out(self):
        _, client = self.make_bus()
        with pytest.raises(pr.BusTimeout):
            client.write_goal_position(9, 150.0)

    def test_write_read_only_register_errors(self):
        bus, _ = self.make_bus()
        params = pr.PRESENT_POSITION.address.to_bytes(2, "little") + b"\x00\x02"
        frames = bus.dispatch(pr.encode_packet(
            pr.InstructionPacket(1, pr.INSTR_WRITE, params)))
        assert pr.decode_packet(frames[0]).error != 0

    def test_unknown_register_read_errors(self):
        bus, _ = self.make_bus()
        params = (5).to_bytes(2, "little") + (2).to_bytes(2, "little")
        frames = bus.dispatch(pr.encode_packet(
            pr.InstructionPacket(1, pr.INSTR_READ, params)))
        assert pr.decode_packet(frames[0]).error != 0

    def test_unknown_write_never_mutates(self):
        bus, _ = self.make_bus()
        before = bytes(bus.servos[1].registers)
        params = pr.PRESENT_POSITION.address.to_bytes(2, "little") + b"\x01\x02"
        bus.dispatch(pr.encode_packet(pr.InstructionPacket(1, pr.INSTR_WRITE, params)))
        assert bytes(bus.servos[1].registers) == before
        assert len(bus.servos[1].registers) == len(before)

    def test_corrupted_frame_dropped_and_counted(self):
        bus, _ = self.make_bus()
        frame = pr.encode_packet(pr.InstructionPacket(1, pr.INSTR_PING))
        bad = frame[:-1] + bytes([frame[-1] ^ 0x01])
        assert bus.dispatch(bad) == []
        assert bus.dropped_frames == 1

    def test_sync_write(self):
        bus, client = self.make_bus()
        client.sync_write_goals([(1, 150.147), (2, 150.147)])
        for sid in (1, 2):
            assert int.from_bytes(bus.servos[sid].registers[30:32], "little") == 512

    def test_sync_write_empty(self):
        bus, client = self.make_bus()
        before = {sid: bytes(s.registers) for sid, s in bus.servos.items()}
        client.sync_write_goals([])
        assert all(bytes(bus.servos[sid].registers) == before[sid] for sid in before)

    def test_sync_write_duplicate_id(self):
        _, client = self.make_bus()
        with pytest.raises(ValueError):
            client.sync_write_goals([(1, 150.0), (1, 151.0)])

    def test_sync_write_byte_layout(self):
        frame = None

        class Capture(pr.BusTransport):
            def send(self, data):
                nonlocal frame
                frame = data

            def receive(self, deadline=None):
                return None

        client = pr.ServoBusClient(Capture())
        client.sync_write_goals([(1, 150.147), (2, 150.147)])
        pkt = pr.decode_packet(frame)
        assert pkt.instruction == pr.INSTR_SYNC_WRITE
        assert pkt.params[:4] == bytes([0x1E, 0x00, 0x02, 0x00])
        assert pkt.params[4:] == bytes([1, 0x00, 0x02, 2, 0x00, 0x02])

    def test_broadcast_write_no_status(self):
        bus, _ = self.make_bus()
        params = pr.GOAL_POSITION.address.to_bytes(2, "little") + b"\x00\x02"
        frames = bus.dispatch(pr.encode_packet(
            pr.InstructionPacket(pr.BROADCAST_ID, pr.INSTR_WRITE, params)))
        assert frames == []
