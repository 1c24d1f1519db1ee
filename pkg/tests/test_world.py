import json
import math

import pytest

from physbench import geometry, world
from physbench.world import (
    BadScale, Body, BodyKind, Goal, OutOfBounds, Role, WorldState,
    body_from_vocabulary, make_body,
)


def test_ball_construction():
    b = body_from_vocabulary(0, BodyKind.BALL, 0.1, (128.0, 128.0),
                             dynamic=True, role=Role.GOAL_SUBJECT)
    assert isinstance(b.shape, geometry.Circle)
    assert b.shape.radius == pytest.approx(0.1 * world.BALL_RADIUS_MAX)
    assert b.pose[:2] == (128.0, 128.0)
    assert b.mass == pytest.approx(math.pi * b.shape.radius ** 2)


def test_bar_symmetry_under_half_turn():
    a = body_from_vocabulary(0, BodyKind.BAR, 0.4, (128.0, 60.0), 0.0,
                             dynamic=False, role=Role.CONFOUNDING)
    b = body_from_vocabulary(1, BodyKind.BAR, 0.4, (128.0, 60.0), math.pi,
                             dynamic=False, role=Role.CONFOUNDING)
    # identical occupied region: probe a grid of points
    for i in range(40):
        for j in range(10):
            x = 70.0 + 3.0 * i
            y = 50.0 + 2.0 * j
            assert (geometry.point_in_shape(a.shape, a.pose, x, y)
                    == geometry.point_in_shape(b.shape, b.pose, x, y))


def test_jar_footprint_matches_point_membership_oracle():
    jar = body_from_vocabulary(3, BodyKind.JAR, 0.2, (50.0, 20.0),
                               dynamic=True, role=Role.CONFOUNDING)
    width = 0.2 * world.JAR_WIDTH_MAX
    t = world.JAR_WALL_FRACTION * width
    lo_x, lo_y, hi_x, hi_y = jar.aabb()
    assert hi_x - lo_x == pytest.approx(width, abs=1e-9)
    assert hi_y - lo_y == pytest.approx(width, abs=1e-9)
    assert (lo_x + hi_x) / 2 == pytest.approx(50.0)
    assert (lo_y + hi_y) / 2 == pytest.approx(20.0)

    def oracle(x, y):
        # jar parts in footprint coordinates: bottom-left of AABB at origin
        lx, ly = x - lo_x, y - lo_y
        in_base = 0 <= lx <= width and 0 <= ly <= t
        in_left = 0 <= lx <= t and t <= ly <= width
        in_right = width - t <= lx <= width and t <= ly <= width
        return in_base or in_left or in_right

    n_checked = 0
    for i in range(60):
        for j in range(60):
            x = lo_x - 2 + (width + 4) * i / 59
            y = lo_y - 2 + (width + 4) * j / 59
            got = geometry.point_in_shape(jar.shape, jar.pose, x, y)
            want = oracle(x, y)
            # skip points within float-noise of part boundaries
            if abs(x - lo_x) < 1e-6 or abs(y - lo_y) < 1e-6:
                continue
            assert got == want, (x, y)
            n_checked += 1
    assert n_checked > 3000


def test_jar_com_is_pose_point():
    jar = body_from_vocabulary(0, BodyKind.JAR, 0.3, (100.0, 100.0),
                               dynamic=True, role=Role.CONFOUNDING)
    _, com, _ = geometry.mass_properties(jar.shape)
    assert com == pytest.approx((0.0, 0.0), abs=1e-12)


def test_out_of_bounds_and_bad_scale():
    with pytest.raises(OutOfBounds):
        body_from_vocabulary(0, BodyKind.BALL, 0.5, (5.0, 128.0),
                             dynamic=True, role=Role.CONFOUNDING)
    with pytest.raises(BadScale):
        body_from_vocabulary(0, BodyKind.BALL, 0.0, (128.0, 128.0),
                             dynamic=True, role=Role.CONFOUNDING)
    with pytest.raises(BadScale):
        body_from_vocabulary(0, BodyKind.BALL, 1.5, (128.0, 128.0),
                             dynamic=True, role=Role.CONFOUNDING)


def test_static_bodies_must_be_at_rest():
    with pytest.raises(ValueError):
        make_body(0, geometry.Circle(5.0), (50.0, 50.0, 0.0), dynamic=False,
                  role=Role.CONFOUNDING, velocity=(1.0, 0.0, 0.0))


def test_world_rejects_duplicate_ids():
    w = WorldState()
    w.add(body_from_vocabulary(0, BodyKind.BALL, 0.1, (50.0, 50.0),
                               dynamic=True, role=Role.CONFOUNDING))
    with pytest.raises(ValueError):
        w.add(body_from_vocabulary(0, BodyKind.BALL, 0.1, (90.0, 50.0),
                                   dynamic=True, role=Role.CONFOUNDING))


def test_goal_validation():
    with pytest.raises(ValueError):
        Goal(subject_id=1, object_id=1)
    g = Goal(subject_id=0, object_id=1)
    w = WorldState()
    w.add(body_from_vocabulary(0, BodyKind.BALL, 0.1, (50.0, 50.0),
                               dynamic=True, role=Role.GOAL_SUBJECT))
    with pytest.raises(KeyError):
        g.validate(w)


def test_scene_json_round_trip_exact():
    w = WorldState()
    w.add(body_from_vocabulary(0, BodyKind.BAR, 0.371, (128.0, 17.3), -0.12345,
                               dynamic=False, role=Role.GOAL_OBJECT))
    w.add(body_from_vocabulary(1, BodyKind.JAR, 0.27, (201.5, 40.0),
                               dynamic=True, role=Role.CONFOUNDING))
    w.add(body_from_vocabulary(2, BodyKind.BALL, 1 / 3, (60.0, 210.0),
                               dynamic=True, role=Role.GOAL_SUBJECT,
                               velocity=(0.1, -0.25, 1e-7)))
    blob = json.dumps(world.scene_to_dict(w))
    w2 = world.scene_from_dict(json.loads(blob))
    assert len(w2.bodies) == len(w.bodies)
    for a, b in zip(w.bodies, w2.bodies):
        assert a.pose == b.pose
        assert a.velocity == b.velocity
        assert a.mass == b.mass
        assert a.inertia == b.inertia
        assert a.role == b.role
        assert a.kind == b.kind
        assert a.shape == b.shape


def test_overlap_uses_touch_tolerance():
    a = body_from_vocabulary(0, BodyKind.BALL, 0.25, (100.0, 100.0),
                             dynamic=True, role=Role.CONFOUNDING)
    r = a.shape.radius
    b = make_body(1, geometry.Circle(r), (100.0 + 2 * r, 100.0, 0.0),
                  dynamic=True, role=Role.CONFOUNDING)
    assert not world.overlap(a, b)
    c = make_body(2, geometry.Circle(r), (100.0 + 2 * r - 0.001, 100.0, 0.0),
                  dynamic=True, role=Role.CONFOUNDING)
    assert world.overlap(a, c)
