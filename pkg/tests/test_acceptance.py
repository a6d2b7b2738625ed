"""Acceptance suite: one test per criterion, tolerances pinned here.

Run `pytest tests/test_acceptance.py -v -s` for one pass/fail line per
criterion with the measured values.
"""

import math
import random

import numpy as np

from dbwire import wire
from dbwire.calibration import CalibSample, angle_to_voltage, fit_linear, voltage_to_angle
from dbwire.config import GatewayConfig
from dbwire.perception import (ScanSpec, cloud_to_scan, kalman_predict,
                               kalman_update, new_track, project_to_3d)
from dbwire.plant import initial_state
from dbwire.safety import (LOW_BATTERY_V, Mode, SafetyInputs, SafetyState,
                           SafetySupervisor, tick as safety_tick)
from dbwire.scenario import Scenario, SimHarness
from dbwire.scene import PED_BODY_D, PedestrianTruth, synth_scene

from test_perception import random_cloud, scan_oracle
from test_safety import all_input_combos, oracle_motor_power, oracle_next_state, as_oracle_state, STATES

SMALL_CAM = dict(cam_fx=80.0, cam_fy=80.0, cam_cx=80.0, cam_cy=60.0,
                 cam_width=160, cam_height=120)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} — {detail}")
    assert ok, f"{name}: {detail}"


def fit_circle(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """Independent algebraic circle fit (least squares on
    x^2+y^2 + D x + E y + F = 0). Returns (cx, cy, radius)."""
    a = np.column_stack([xs, ys, np.ones_like(xs)])
    b = -(xs ** 2 + ys ** 2)
    (d, e, f), *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy = -d / 2, -e / 2
    return cx, cy, math.sqrt(cx * cx + cy * cy - f)


def test_a01_speed_cap_reproduction():
    """Full-deflection teleop: steady state 0.2 m/s ± 1%; every emitted
    DriveCmd within ±400 units."""
    h = SimHarness(GatewayConfig(), Scenario(name="cap", duration_s=1e9))
    h.set_stick(1.0, 0.0, enable=True)
    speeds, units = [], []
    for _ in range(int(8.0 / h.dt)):
        h.tick()
        units.extend(m.units for m in h.last_result.messages
                     if isinstance(m, wire.DriveCmd))
        if h.t > 4.0:  # past 5 motor time constants + servo transient
            speeds.append(h.board.state.v)
    steady = float(np.mean(speeds))
    worst = max(abs(u) for u in units)
    ok = abs(steady - 0.2) <= 0.01 * 0.2 and worst <= 400
    report("speed cap", ok,
           f"steady {steady:.4f} m/s (target 0.2 ± 1%), max |units| {worst}")


def test_a02_goal_tolerance_reproduction():
    """20 random forward goals, 5-15 m: every terminal distance ≤ 0.4 m."""
    rnd = random.Random(2025)
    worst = 0.0
    for k in range(20):
        dist = rnd.uniform(5.0, 15.0)
        bearing = rnd.uniform(-0.7, 0.7)
        goal = (dist * math.cos(bearing), dist * math.sin(bearing))
        h = SimHarness(GatewayConfig(), Scenario(name=f"goal{k}",
                                                 duration_s=1e9,
                                                 mode=Mode.AUTONOMOUS))
        h.gateway.set_goal(*goal)
        for _ in range(int(180.0 / h.dt)):
            h.tick()
            if h.gateway.autopilot.done and h.board.state.v < 0.005:
                break
        st = h.board.state
        final = math.hypot(goal[0] - st.x, goal[1] - st.y)
        worst = max(worst, final)
        assert h.gateway.autopilot.done, f"goal {k} never reached: {final:.2f} m"
        assert all(s == "ACTIVE" for _, s, _ in h.safety_events[1:]), \
            f"goal {k} tripped safety"
    report("goal tolerance", worst <= 0.4,
           f"20/20 goals reached, worst terminal distance {worst:.3f} m "
           f"(limit 0.40)")


def test_a03_pedestrian_range_accuracy():
    """Rendered pedestrians with ground truth 1-5 m: planar position error
    of the projected 3D box ≤ 0.2 m in ≥ 95% of frames."""
    cfg = GatewayConfig()
    intr = cfg.intrinsics()
    mount = cfg.mount()
    state = initial_state(cfg.plant_config())
    rng = np.random.default_rng(424242)
    errors = []
    walkers = [
        # toward the camera on-axis, then two oblique passes
        [(d, 0.0) for d in np.arange(4.8, 1.0, -0.05)],
        [(d, 0.35 * (d - 1.0)) for d in np.arange(4.8, 1.0, -0.05)],
        [(2.0 + 0.6 * abs(y), y) for y in np.arange(-1.2, 1.2, 0.04)],
    ]
    for path in walkers:
        for (px, py) in path:
            ped = PedestrianTruth(1, px, py)
            render = synth_scene(state, [], [ped], intr, mount,
                                 depth_noise_sigma=cfg.depth_noise_sigma,
                                 rng=rng)
            if not render.detections:
                continue
            box = project_to_3d(render.detections[0], render.depth, intr,
                                cfg.ped_body_length_m)
            # camera frame -> vehicle base frame, planar part
            est_x = mount.forward_m + box.z
            est_y = -box.x
            # ground truth: center of the visible near face
            true_x = px - PED_BODY_D / 2.0
            true_y = py
            errors.append(math.hypot(est_x - true_x, est_y - true_y))
    errors = np.array(errors)
    frac = float(np.mean(errors <= 0.2))
    ok = len(errors) > 100 and frac >= 0.95
    report("pedestrian range accuracy", ok,
           f"{len(errors)} frames, {100 * frac:.1f}% within 0.2 m "
           f"(worst {errors.max():.3f} m)")


def test_a04_min_turning_radius_conformance():
    """Sustained full-lock drive traces a circle of radius ≥ 2.05 m; the
    fitted radius carries the 2% measurement tolerance."""
    cfg = GatewayConfig()
    h = SimHarness(cfg, Scenario(name="lock", duration_s=1e9))
    h.set_stick(1.0, 1.0, enable=True)  # full speed, full left
    max_delta_cmd = 0.0
    xs, ys = [], []
    for _ in range(int(80.0 / h.dt)):
        h.tick()
        max_delta_cmd = max(max_delta_cmd, abs(h.last_result.ackermann.delta))
        if h.t > 15.0:  # transient: spin-up and steering travel
            xs.append(h.board.state.x)
            ys.append(h.board.state.y)
    geom = cfg.geometry()
    assert max_delta_cmd <= geom.max_steer_delta + 1e-12  # command-side bound
    _, _, radius = fit_circle(np.array(xs), np.array(ys))
    ok = radius >= 2.05 * 0.98 and radius <= 2.05 * 1.05
    report("min turning radius", ok,
           f"fitted circle radius {radius:.3f} m (bound ≥ 2.05 - 2%; "
           f"servo deadband allows ≤ +5%)")


def test_a05_safety_exhaustion():
    """tick() equals the independent truth-table oracle on every input
    combination x state x mode; latch and one-tick cutoff under fuzz."""
    mismatches = 0
    cases = 0
    for state in STATES:
        for inp in all_input_combos():
            decision = safety_tick(state, inp)
            want_power = oracle_motor_power(as_oracle_state(state), inp)
            want_state = oracle_next_state(as_oracle_state(state), inp)
            got_state = ("FAULT" if decision.state is SafetyState.FAULT_LATCHED
                         else ("ACTIVE" if decision.state is SafetyState.ACTIVE
                               else "STANDBY"))
            if decision.motor_power != want_power or got_state != want_state:
                mismatches += 1
            cases += 1

    rnd = random.Random(8080)
    sup = SafetySupervisor()
    cutoff_violations = latch_violations = 0
    for _ in range(100_000):
        inp = SafetyInputs(
            dmh_held=rnd.random() < 0.85, enable_held=rnd.random() < 0.85,
            estop_rx=rnd.random() < 0.005, heartbeat_stale=rnd.random() < 0.05,
            battery_v=rnd.choice((24.8, 24.8, 24.8, 21.0)),
            overcurrent_trip=rnd.random() < 0.005,
            mode=rnd.choice((Mode.MANUAL, Mode.AUTONOMOUS)))
        was_latched = sup.state is SafetyState.FAULT_LATCHED
        decision = sup.tick(inp)
        unsafe = (not inp.dmh_held or inp.estop_rx or inp.heartbeat_stale
                  or inp.battery_v < LOW_BATTERY_V or inp.overcurrent_trip
                  or (inp.mode is Mode.MANUAL and not inp.enable_held))
        if unsafe and decision.motor_power:
            cutoff_violations += 1
        if was_latched and decision.state is not SafetyState.FAULT_LATCHED:
            latch_violations += 1
    ok = mismatches == 0 and cutoff_violations == 0 and latch_violations == 0
    report("safety exhaustion", ok,
           f"{cases} oracle cases, {mismatches} mismatches; 10^5-step fuzz: "
           f"{cutoff_violations} cutoff / {latch_violations} latch violations")


def test_a06_fail_safe_on_link_loss():
    """Silencing the command link mid-drive stops the vehicle (brake
    engaged, v < 0.01) within heartbeat timeout + 0.5 s."""
    cfg = GatewayConfig()
    h = SimHarness(cfg, Scenario(name="cut", duration_s=1e9))
    h.set_stick(1.0, 0.0, enable=True)
    for _ in range(int(5.0 / h.dt)):
        h.tick()
    v_before = h.board.state.v
    h.sever_link()
    t_cut = h.t
    stopped_at = None
    for _ in range(int(3.0 / h.dt)):
        h.tick()
        st = h.board.state
        if st.brake_engaged and abs(st.v) < 0.01:
            stopped_at = h.t - t_cut
            break
    deadline = cfg.heartbeat_timeout_s + 0.5
    ok = stopped_at is not None and stopped_at <= deadline
    report("fail-safe on link loss", ok,
           f"driving at {v_before:.3f} m/s, stopped {stopped_at:.2f} s after "
           f"silence (limit {deadline} s)")


def test_a07_protocol_soundness():
    """10^5 round trips; decoder total under random and mutated-valid fuzz;
    single-byte corruption always detected."""
    from test_wire import random_message
    rnd = random.Random(1)
    for _ in range(100_000):
        msg = random_message(rnd)
        seq = rnd.randint(0, 0xFFFF)
        assert wire.decode_packet(wire.encode_packet(msg, seq)) == (msg, seq)

    garbage_ok = 0
    for _ in range(50_000):
        blob = bytes(rnd.randrange(256) for _ in range(rnd.randrange(0, 48)))
        try:
            wire.decode_packet(blob)
        except wire.DecodeError:
            pass
        garbage_ok += 1

    undetected = 0
    flips = 0
    for _ in range(500):
        pkt = wire.encode_packet(random_message(rnd), rnd.randint(0, 0xFFFF))
        for i in range(len(pkt)):
            mutated = bytearray(pkt)
            mutated[i] ^= rnd.randint(1, 255)
            flips += 1
            try:
                wire.decode_packet(bytes(mutated))
                undetected += 1
            except wire.DecodeError:
                pass
    report("protocol soundness", undetected == 0,
           f"10^5 round trips OK, {garbage_ok} garbage decodes total, "
           f"{flips} single-byte flips with {undetected} undetected")


def test_a08_scan_projection_oracle_equivalence():
    """cloud_to_scan equals the brute-force oracle bitwise on 1000 random
    clouds; floor contacts never reach the output."""
    rng = np.random.default_rng(31415)
    spec = ScanSpec()
    mismatches = 0
    for _ in range(1000):
        pts = random_cloud(rng, int(rng.integers(0, 500)))
        if not np.array_equal(cloud_to_scan(pts, spec).ranges,
                              scan_oracle(pts, spec)):
            mismatches += 1
    floor_leaks = 0
    for _ in range(100):
        pts = random_cloud(rng, 300)
        pts[:, 2] = rng.uniform(-0.5, spec.floor_z_max, 300)
        if np.isfinite(cloud_to_scan(pts, spec).ranges).any():
            floor_leaks += 1
    ok = mismatches == 0 and floor_leaks == 0
    report("scan projection oracle", ok,
           f"1000 clouds, {mismatches} mismatches; "
           f"100 all-floor clouds, {floor_leaks} leaks")


def test_a09_calibration_recovery():
    """Synthetic V = 1.8 δ + 2.4 + N(0, 0.02) over 21 angles recovers
    slope ± 0.05 and intercept ± 0.02; angle/voltage round trip to 1e-9."""
    rng = np.random.default_rng(777)
    deltas = np.linspace(-0.45, 0.45, 21)
    samples = [CalibSample(float(d),
                           float(1.8 * d + 2.4 + rng.normal(0.0, 0.02)))
               for d in deltas]
    cal = fit_linear(samples)
    slope_ok = abs(cal.slope - 1.8) <= 0.05
    inter_ok = abs(cal.intercept - 2.4) <= 0.02
    worst_rt = 0.0
    for d in np.linspace(-0.4, 0.4, 101):
        worst_rt = max(worst_rt,
                       abs(voltage_to_angle(cal, angle_to_voltage(cal, d)) - d))
    ok = slope_ok and inter_ok and worst_rt <= 1e-9
    report("calibration recovery", ok,
           f"slope {cal.slope:.4f} (1.8 ± 0.05), intercept {cal.intercept:.4f} "
           f"(2.4 ± 0.02), round-trip worst {worst_rt:.2e} rad")


def test_a10_kalman_sanity():
    """Stationary convergence, constant-velocity estimation, covariance PSD
    over 10^4 steps."""
    track = new_track(1, np.zeros(3), 0.0)
    target = np.array([1.0, 2.0, 0.0])
    for _ in range(100):
        track = kalman_predict(track, 0.1)
        track = kalman_update(track, target)
    pos_err = float(np.linalg.norm(track.position - target))
    vel_mag = float(np.linalg.norm(track.velocity))

    walker = new_track(2, np.zeros(3), 0.0)
    for k in range(1, 51):
        walker = kalman_predict(walker, 0.1)
        walker = kalman_update(walker, np.array([0.1 * k, 0.0, 0.0]))
    vel_err = abs(float(walker.velocity[0]) - 1.0)

    rng = np.random.default_rng(4)
    psd_min = math.inf
    noisy = new_track(3, np.zeros(3), 0.0)
    for _ in range(10_000):
        noisy = kalman_predict(noisy, 0.05)
        noisy = kalman_update(noisy, rng.normal(0.0, 0.2, 3))
        psd_min = min(psd_min, float(np.min(np.linalg.eigvalsh(noisy.covariance))))

    ok = pos_err < 0.01 and vel_mag < 0.01 and vel_err < 0.05 \
        and psd_min >= -1e-9
    report("kalman sanity", ok,
           f"stationary pos err {pos_err:.4f}, |vel| {vel_mag:.4f}; "
           f"walker vel err {vel_err:.4f} (< 0.05); min eig {psd_min:.2e}")
