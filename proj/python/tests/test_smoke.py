import socket

import numpy as np
import pytest

import glovearm as g

CENTERS = [(60, 100), (110, 110), (160, 120), (210, 110), (260, 100)]


def test_synth_and_pgm_round_trip():
    frame = g.synth_frame(CENTERS, gain=0.5, offset=20)
    assert frame.shape == (240, 320)
    assert frame.dtype == np.uint8
    assert frame[100, 60] == 147
    assert frame[0, 0] == 20
    back = g.load_pgm(g.save_pgm(frame))
    assert np.array_equal(back, frame)


def test_pgm_errors():
    with pytest.raises(g.PgmError):
        g.load_pgm(b"P2 16 16 255\n" + bytes(256))
    assert g.load_pgm(b"P5 2 2 255 " + bytes([0, 255, 128, 7]), min_side=1).tolist() == [[0, 255], [128, 7]]


def test_detection_recovers_leds():
    frame = g.synth_frame(CENTERS, noise=8, seed=3)
    binary = g.normalize_and_threshold(frame)
    tips = g.select_fingertips(g.hough_circles(binary))
    for cx, cy in CENTERS:
        assert min(np.hypot(t.cx - cx, t.cy - cy) for t in tips) <= 2.0
    hc = g.hand_center(tips)
    xs, ys = [t.cx for t in tips], [t.cy for t in tips]
    assert hc.x == pytest.approx(abs(max(xs) - min(xs)) / 2)
    assert hc.y == pytest.approx(abs(max(ys) - min(ys)) / 2)


def test_uniform_frame_rejected():
    with pytest.raises(g.UniformFrameError):
        g.normalize_and_threshold(np.zeros((16, 16), np.uint8))


def test_fuzzy_examples():
    assert g.membership(0, 50, 100, 25) == 0.5
    assert g.infer_axis(0) == 90.0
    assert g.infer_axis(100) == 162.0
    assert g.infer_axis(-100) == 18.0
    ctl = g.Controller()
    assert ctl.step(0, 0, 0) == (90, 90, 90)
    assert ctl.step(100, 0, 0) == (105, 90, 90)
    custom = g.ControllerConfig.from_rules(g.default_rules())
    assert g.Controller(custom).step(100, 0, 0) == (105, 90, 90)


def test_arm_examples():
    assert g.forward_kinematics(0, 90, 90) == pytest.approx((0, 0, 77), abs=1e-9)
    assert g.forward_kinematics(90, 0, 90) == pytest.approx((0, 66, 11), abs=1e-9)
    t = g.static_torque(0, 0, 90, payload=0.1)
    assert t["shoulder"] == pytest.approx(16.96, abs=0.01)
    assert t["shoulder_overload"]
    assert g.encode_serial(90, 45, 120) == b"(90,45,120)\n"
    assert g.decode_serial(b"garbage(10,20,30)\n(1,2,3)\n") == [(10, 20, 30), (1, 2, 3)]
    with pytest.raises(g.SerialFrameRejected):
        g.decode_serial(b"(200,0,0)\n")


def test_wire_codec():
    assert g.wire_cmd(7, 90, 45, 120) == "CMD 7 90 45 120"
    assert g.wire_decode("CMD 7 90 45 120") == {"type": "CMD", "seq": 7, "x": 90, "y": 45, "z": 120}
    with pytest.raises(g.WireError) as exc:
        g.wire_decode("CMD 8 200 0 0")
    assert exc.value.code == 422


def test_pipeline_identical_frames():
    p = g.Pipeline()
    frame = g.synth_frame(CENTERS, noise=5, seed=1)
    first = p.step(frame)
    second = p.step(frame)
    assert first["cmd"] == (1, 90, 90, 90)
    assert second["displacement"] == (0.0, 0.0, 0.0)
    assert second["cmd"][1:3] == (90, 90)
    assert p.step(np.zeros((240, 320), np.uint8))["cmd"] is None
    assert p.frames == 3 and p.commands == 2


def test_service_round_trip():
    svc = g.Service()
    port, ws_port = svc.start()
    try:
        with socket.create_connection(("127.0.0.1", port), timeout=5) as s:
            f = s.makefile("rw", newline="\n")

            def request(line):
                f.write(line + "\n")
                f.flush()
                return f.readline().rstrip("\n")

            assert request("CMD 1 0 0 90") == "ERR 401 send HELLO first"
            assert request("HELLO py").startswith("WELCOME ")
            assert request("CMD 1 0 0 90") == "ACK 1"
            assert request("CMD 1 0 0 90").startswith("ERR 409")
            assert request("STATE?") == "STATE 0 0 90 66 0 11 0"
        assert svc.applied == 1
        assert svc.state() == "STATE 0 0 90 66 0 11 0"
    finally:
        svc.stop()
