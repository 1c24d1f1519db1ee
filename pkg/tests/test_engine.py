import math
from dataclasses import replace

import pytest

import physbench.engine as eng
from physbench import geometry, world
from physbench.engine import DT, GRAVITY, NumericalDivergence, contacts, simulate, step, total_energy
from physbench.rng import keyed_rng
from physbench.world import BodyKind, Goal, Role, WorldState, body_from_vocabulary, make_body

from test_geometry import closest_point_on_box_oracle


def ball(bid, r, pos, vel=(0.0, 0.0, 0.0), dynamic=True, role=Role.CONFOUNDING):
    return make_body(bid, geometry.Circle(r), (pos[0], pos[1], 0.0),
                     dynamic=dynamic, role=role, velocity=vel)


def random_clean_scene(seed, n_extra=3):
    """Non-overlapping random scene: static floor bar plus tossed bodies."""
    rng = keyed_rng("engine-test-scene", seed)
    w = WorldState()
    w.add(body_from_vocabulary(0, BodyKind.BAR, 0.7, (128.0, 6.0),
                               dynamic=False, role=Role.CONFOUNDING))
    next_id = 1
    tries = 0
    while next_id <= n_extra and tries < 200:
        tries += 1
        kind = [BodyKind.BALL, BodyKind.BALL, BodyKind.STANDING_STICK, BodyKind.JAR][rng.integers(0, 4)]
        scale = float(rng.uniform(0.08, 0.4))
        x = float(rng.uniform(25.0, 231.0))
        y = float(rng.uniform(30.0, 200.0))
        vel = (float(rng.uniform(-60, 60)), float(rng.uniform(-30, 30)), float(rng.uniform(-2, 2)))
        try:
            b = body_from_vocabulary(next_id, kind, scale, (x, y),
                                     dynamic=True, role=Role.CONFOUNDING, velocity=vel)
        except world.OutOfBounds:
            continue
        if any(world.body_gap(b, other) < 1.0 for other in w.bodies):
            continue
        w.add(b)
        next_id += 1
    return w


def near_anything(w, d=10.0):
    """True if any pair is within d, or any body is within d of a wall."""
    bodies = w.bodies
    for i, a in enumerate(bodies):
        lo_x, lo_y, hi_x, hi_y = a.aabb()
        if a.dynamic and (lo_x < d or lo_y < d or hi_x > w.bounds[0] - d or hi_y > w.bounds[1] - d):
            return True
        for b in bodies[i + 1:]:
            if not (a.dynamic or b.dynamic):
                continue
            if world.body_gap(a, b) < d:
                return True
    return False


class TestStep:
    def test_static_world_unchanged(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 50.0),
                                   dynamic=False, role=Role.CONFOUNDING))
        w.add(body_from_vocabulary(1, BodyKind.JAR, 0.3, (60.0, 100.0),
                                   dynamic=False, role=Role.CONFOUNDING))
        w2 = step(w)
        assert w2.time == pytest.approx(DT)
        for a, b in zip(w.bodies, w2.bodies):
            assert a.pose == b.pose
            assert a.velocity == b.velocity

    def test_free_fall_matches_parabola_within_one_percent(self):
        w = WorldState()
        w.add(ball(0, 5.0, (128.0, 220.0)))
        s = w
        for _ in range(60):
            s = step(s)
        drop = 220.0 - s.bodies[0].pose[1]
        assert drop == pytest.approx(0.5 * GRAVITY * 1.0, rel=0.01)

    def test_momentum_conserved_without_gravity(self, monkeypatch):
        monkeypatch.setattr(eng, "GRAVITY", 0.0)
        w = WorldState()
        w.add(ball(0, 8.0, (100.0, 128.0), vel=(30.0, 0.0, 0.0)))
        w.add(ball(1, 8.0, (140.0, 128.0), vel=(-20.0, 5.0, 0.0)))
        px0 = sum(b.mass * b.velocity[0] for b in w.bodies)
        py0 = sum(b.mass * b.velocity[1] for b in w.bodies)
        s = w
        for _ in range(120):
            s = step(s)
        px1 = sum(b.mass * b.velocity[0] for b in s.bodies)
        py1 = sum(b.mass * b.velocity[1] for b in s.bodies)
        assert abs(px1 - px0) < 1e-9
        assert abs(py1 - py0) < 1e-9
        assert s.bodies[0].velocity[0] != 30.0  # they really collided

    def test_statics_never_move_in_mixed_scene(self):
        w = random_clean_scene(7)
        static_poses = [b.pose for b in w.bodies if not b.dynamic]
        s = w
        for _ in range(240):
            s = step(s)
        assert [b.pose for b in s.bodies if not b.dynamic] == static_poses

    def test_divergence_detected(self):
        w = WorldState()
        w.add(replace(ball(0, 5.0, (100.0, 100.0)), velocity=(math.nan, 0.0, 0.0)))
        with pytest.raises(NumericalDivergence):
            step(w)

    def test_fixed_dt_enforced(self):
        w = WorldState()
        w.add(ball(0, 5.0, (100.0, 100.0)))
        with pytest.raises(ValueError):
            step(w, dt=0.02)


class TestNoTunneling:
    def test_speed_cap_ball_never_passes_floor(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.7, (128.0, 10.0),
                                   dynamic=False, role=Role.CONFOUNDING))
        floor_top = 13.0
        r = 4.0
        w.add(ball(1, r, (128.0, 200.0), vel=(0.0, -eng.SPEED_CAP, 0.0)))
        s = w
        for _ in range(180):
            s = step(s)
            y = s.bodies[1].pose[1]
            assert y - r >= floor_top - eng.SLOP - 1e-9

    def test_resting_gap_stays_within_band(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.7, (128.0, 10.0),
                                   dynamic=False, role=Role.CONFOUNDING))
        w.add(ball(1, 6.0, (128.0, 100.0)))
        s = w
        for _ in range(600):
            s = step(s)
        gap = world.body_gap(s.bodies[1], s.bodies[0])
        assert -eng.SLOP <= gap <= eng.SLOP + 1e-9


class TestEnergy:
    def test_contact_free_energy_never_increases(self):
        for seed in range(20):
            rng = keyed_rng("energy-free", seed)
            w = WorldState()
            w.add(ball(0, 4.0, (float(rng.uniform(60, 196)), 200.0),
                       vel=(float(rng.uniform(-20, 20)), float(rng.uniform(-10, 40)),
                            float(rng.uniform(-3, 3)))))
            w.add(make_body(1, geometry.Box(6.0, 2.0),
                            (float(rng.uniform(60, 196)), 160.0, float(rng.uniform(-3, 3))),
                            dynamic=True, role=Role.CONFOUNDING,
                            velocity=(float(rng.uniform(-20, 20)), float(rng.uniform(-10, 40)),
                                      float(rng.uniform(-3, 3)))))
            s = w
            e0 = total_energy(s)
            prev = e0
            for _ in range(25):  # stays airborne for the whole window
                s = step(s)
                e = total_energy(s)
                assert e <= prev + 1e-6 * e0
                prev = e

    def test_collision_scenes_dissipate(self):
        # rises may only happen near contact, and never survive an episode
        for seed in range(10):
            w = random_clean_scene(seed)
            s = w
            e0 = total_energy(s)
            prev = e0
            for k in range(480):
                s2 = step(s)
                e = total_energy(s2)
                if e > prev + 1e-6 * e0:
                    assert near_anything(s) or near_anything(s2), f"seed {seed} step {k}"
                s = s2
                prev = e
            assert total_energy(s) <= e0 + 1e-6 * e0


class TestContacts:
    def test_separated_pair_reports_nothing(self):
        w = WorldState()
        w.add(ball(0, 10.0, (60.0, 100.0)))
        w.add(ball(1, 10.0, (100.0, 100.0)))
        assert contacts(w) == []

    def test_resting_circle_on_bar(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 50.0),
                                   dynamic=False, role=Role.CONFOUNDING))
        w.add(ball(1, 6.0, (128.0, 59.0)))  # bar top at 53: exact touch
        cs = contacts(w)
        assert len(cs) == 1
        c = cs[0]
        assert (c.body_a, c.body_b) == (0, 1)
        assert c.normal == pytest.approx((0.0, 1.0))
        assert abs(c.penetration) < 1e-9
        assert c.point[1] == pytest.approx(53.0, abs=1e-9)

    def test_circle_on_rotated_box_matches_closest_point_oracle(self):
        angle = 0.7
        w = WorldState()
        w.add(make_body(0, geometry.Box(10.0, 4.0), (120.0, 80.0, angle),
                        dynamic=False, role=Role.CONFOUNDING))
        c, s_ = math.cos(angle), math.sin(angle)
        # surface point at local (2, 4), circle sits along the face normal
        sx = 120.0 + c * 2.0 - s_ * 4.0
        sy = 80.0 + s_ * 2.0 + c * 4.0
        r = 5.0
        center = (sx + (-s_) * (r + 0.2), sy + c * (r + 0.2))
        w.add(ball(1, r, center))
        cs = contacts(w)
        assert len(cs) == 1
        qx, qy, _ = closest_point_on_box_oracle(center[0], center[1], 120.0, 80.0, angle, 10.0, 4.0)
        assert cs[0].point[0] == pytest.approx(qx, abs=1e-6)
        assert cs[0].point[1] == pytest.approx(qy, abs=1e-6)
        assert cs[0].penetration == pytest.approx(-0.2, abs=1e-9)

    def test_sorted_by_id_pair(self):
        s = random_clean_scene(3)
        for _ in range(300):
            s = step(s)
        keys = [(c.body_a, c.body_b) for c in contacts(s)]
        assert keys == sorted(keys)


class TestSimulate:
    def goal_world(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 50.0),
                                   dynamic=False, role=Role.GOAL_OBJECT))
        w.add(ball(1, 6.0, (128.0, 59.0), role=Role.GOAL_SUBJECT))
        return w, Goal(subject_id=1, object_id=0)

    def test_resting_contact_solves_at_dwell(self):
        w, g = self.goal_world()
        res = simulate(w, g)
        assert res.solved
        assert res.first_satisfied_at == pytest.approx(0.0, abs=1e-9)
        assert res.end_time == pytest.approx(3.0, abs=1e-9)

    def test_separated_static_world_times_out(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.2, (50.0, 50.0),
                                   dynamic=False, role=Role.GOAL_OBJECT))
        w.add(body_from_vocabulary(1, BodyKind.BAR, 0.2, (200.0, 50.0),
                                   dynamic=False, role=Role.GOAL_SUBJECT))
        g = Goal(subject_id=1, object_id=0)
        res = simulate(w, g, time_limit=4.0)
        assert not res.solved
        assert res.end_time == pytest.approx(4.0, abs=1e-9)
        assert res.first_satisfied_at is None

    def test_drop_onto_target_matches_kinematics(self):
        # restitution-aware oracle: the ball bounces until the impact speed
        # falls below the bounce threshold, then the dwell clock runs
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 50.0),
                                   dynamic=False, role=Role.GOAL_OBJECT))
        r = 6.0
        w.add(ball(1, r, (128.0, 153.0 + r), role=Role.GOAL_SUBJECT))  # 100 above bar top
        g = Goal(subject_id=1, object_id=0)
        res = simulate(w, g)
        assert res.solved
        t_first = math.sqrt(2.0 * (100.0 - eng.EPS_TOUCH) / GRAVITY)
        v = math.sqrt(2.0 * GRAVITY * 100.0)
        t_settle = t_first
        while eng.RESTITUTION * v > eng.RESTITUTION_THRESHOLD:
            v *= eng.RESTITUTION
            t_settle += 2.0 * v / GRAVITY
        # sub-tolerance micro-hops can cross the touch line a few more times
        assert t_settle - 2 * DT <= res.first_satisfied_at <= t_settle + 0.3
        assert res.end_time == pytest.approx(res.first_satisfied_at + 3.0, abs=1e-9)

    def test_dwell_requires_consecutive_contact(self):
        w = WorldState()
        w.add(body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 30.0),
                                   dynamic=False, role=Role.GOAL_OBJECT))
        w.add(ball(1, 6.0, (128.0, 120.0), role=Role.GOAL_SUBJECT))
        g = Goal(subject_id=1, object_id=0)
        res = simulate(w, g)
        assert res.solved
        assert res.first_satisfied_at > 0.3  # bounces reset the clock

    def test_frames_cadence_and_final(self):
        w, g = self.goal_world()
        res = simulate(w, g, frame_stride=15)
        times = [f.time for f in res.frames]
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(res.end_time)
        for a, b in zip(times, times[1:]):
            assert b - a == pytest.approx(15 * DT, abs=1e-9) or b == times[-1]

    def test_bit_identical_repeat(self):
        for seed in (0, 4):
            w = random_clean_scene(seed, n_extra=3)
            g = Goal(subject_id=w.bodies[1].id, object_id=w.bodies[0].id)
            r1 = simulate(w, g, time_limit=6.0)
            r2 = simulate(w, g, time_limit=6.0)
            assert r1.solved == r2.solved
            assert r1.end_time == r2.end_time
            assert len(r1.frames) == len(r2.frames)
            for f1, f2 in zip(r1.frames, r2.frames):
                for b1, b2 in zip(f1.bodies, f2.bodies):
                    assert b1.pose == b2.pose
                    assert b1.velocity == b2.velocity

    def test_simulate_equals_manual_step_loop(self):
        w = random_clean_scene(11, n_extra=2)
        g = Goal(subject_id=w.bodies[1].id, object_id=w.bodies[0].id)
        res = simulate(w, g, time_limit=2.0, frame_stride=30)
        s = w
        manual = {0: s}
        for k in range(1, 121):
            s = step(s)
            manual[k] = s
        for f in res.frames:
            k = int(round(f.time / DT))
            for b1, b2 in zip(f.bodies, manual[k].bodies):
                assert b1.pose == b2.pose, f"frame at step {k}"
                assert b1.velocity == b2.velocity
